#include "dll/cli.hpp"

int main(int argc, char** argv) { return dll::cli::run(argc, argv); }
