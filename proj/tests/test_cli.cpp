#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "dll/cli.hpp"

using namespace dll;
using nlohmann::json;

namespace {

struct Run {
  int code;
  std::string out, err;
};

Run run(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::vector<std::string> lines(const std::string& s) {
  std::vector<std::string> v;
  std::istringstream in(s);
  for (std::string l; std::getline(in, l);) v.push_back(l);
  return v;
}

}  // namespace

TEST(CliSyntax, Ranges) {
  const auto r = cli::parse_range("-2:1:0.5");
  EXPECT_EQ(r.points().size(), 7u);
  EXPECT_THROW(cli::parse_range("1:2"), cli::UsageError);
  EXPECT_THROW(cli::parse_range("1:0:0.1"), cli::UsageError);
  EXPECT_THROW(cli::parse_range("a:1:1"), cli::UsageError);
}

TEST(CliSyntax, IntegerSets) {
  EXPECT_EQ(cli::parse_int_set("-2..3"), (std::vector<int>{-2, -1, 0, 1, 2, 3}));
  EXPECT_EQ(cli::parse_int_set("4,0,1..2,1"), (std::vector<int>{0, 1, 2, 4}));
  EXPECT_THROW(cli::parse_int_set("3..1"), cli::UsageError);
  EXPECT_THROW(cli::parse_int_set("x"), cli::UsageError);
}

TEST(Cli, Spectrum) {
  const auto r = run({"spectrum", "--b", "1", "--kmax", "3"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto l = lines(r.out);
  ASSERT_EQ(l.size(), 8u);
  EXPECT_EQ(l[0], "k,lambda");
  const double expected[] = {-std::sqrt(6.0), -2.0, -std::sqrt(2.0), 0.0, std::sqrt(2.0), 2.0, std::sqrt(6.0)};
  for (int i = 0; i < 7; ++i) {
    const auto comma = l[i + 1].find(',');
    EXPECT_EQ(std::stoi(l[i + 1].substr(0, comma)), i - 3);
    EXPECT_NEAR(std::stod(l[i + 1].substr(comma + 1)), expected[i], 1e-15);
  }
}

TEST(Cli, UsageErrors) {
  EXPECT_EQ(run({}).code, 2);
  EXPECT_EQ(run({"spectrum", "--b", "1"}).code, 2);
  EXPECT_EQ(run({"spectrum", "--b", "1", "--kmax", "2", "--bogus"}).code, 2);
  EXPECT_EQ(run({"spectrum", "--b", "-1", "--kmax", "2"}).code, 2);
  EXPECT_EQ(run({"verify", "--suite", "nope"}).code, 2);
  EXPECT_EQ(run({"dispersion", "--b", "1", "--xi", "0:1"}).code, 2);
  EXPECT_EQ(run({"kernel", "--kind", "Q"}).code, 2);
}

TEST(Cli, PreconditionViolationExitCode) {
  // a sweep that starts too close to the edge cannot label its branches
  const auto r = run({"dispersion", "--b", "1", "--xi", "-2:0:0.5", "--k", "0"});
  EXPECT_EQ(r.code, 2) << "precondition violations are usage errors";
  EXPECT_NE(r.err.find("dispersion"), std::string::npos);
}

TEST(Cli, KernelCsv) {
  const auto r = run({"kernel", "--kind", "edge", "--x1", "0:1:0.5", "--x2", "0:0.5:0.5", "--xp", "0.3,0.7",
                      "--sqrt-lambda", "1,2"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto l = lines(r.out);
  EXPECT_EQ(l[0], "x1,x2,xp1,xp2,sqrt_lambda,re11,im11,re12,im12,re21,im21,re22,im22");
  EXPECT_EQ(l.size(), 1u + 2 * 3 * 2);
}

TEST(Cli, DispersionCsvDeterministicAcrossJobs) {
  const std::vector<std::string> args{"dispersion", "--b", "1", "--xi", "-6.5:-5.5:0.25", "--k", "0,1"};
  auto a = args, c = args;
  a.insert(a.end(), {"--jobs", "1"});
  c.insert(c.end(), {"--jobs", "3"});
  const auto r1 = run(a), r3 = run(c);
  ASSERT_EQ(r1.code, 0) << r1.err;
  EXPECT_EQ(r1.out, r3.out);
  const auto l = lines(r1.out);
  EXPECT_EQ(l[0], "xi,k,lambda,velocity,bc_residual,ode_residual");
  EXPECT_EQ(l.size(), 1u + 2 * 5);
}

TEST(Cli, StredaJson) {
  const auto r = run({"streda", "--island", "0..1", "--b-grid", "0.8:1.2:0.1"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = json::parse(r.out);
  for (const char* key : {"b", "island", "bulk_value", "edge_value", "streda_slope", "chern_estimate", "spectral_flow",
                          "abs_err", "rel_err", "pass", "tolerances"})
    EXPECT_TRUE(j.contains(key)) << key;
  EXPECT_EQ(j["island"], json({0, 1}));
  EXPECT_NEAR(j["chern_estimate"].get<double>(), 2.0, 1e-9);
  EXPECT_TRUE(j["pass"].get<bool>());
}

TEST(Cli, StredaToleranceOverrideIsEchoed) {
  const auto r = run({"streda", "--island", "0", "--tol-streda", "1e-20"});
  const auto j = json::parse(r.out);
  EXPECT_EQ(j["tolerances"]["streda_abs"].get<double>(), 1e-20);
  EXPECT_EQ(r.code, j["pass"].get<bool>() ? 0 : 1);
}

TEST(Cli, ChernJson) {
  const auto r = run({"chern", "--b", "1"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = json::parse(r.out);
  EXPECT_NEAR(j["chern_estimate"].get<double>(), 1.0, 1e-3);
}

TEST(Cli, VerifySpecfun) {
  const auto r = run({"verify", "--suite", "specfun"});
  ASSERT_EQ(r.code, 0) << r.out << r.err;
  const auto j = json::parse(r.out);
  EXPECT_TRUE(j["pass"].get<bool>());
  EXPECT_EQ(j["suites"].size(), 1u);
}

TEST(Cli, OutputFile) {
  const std::string path = ::testing::TempDir() + "dll_spectrum.csv";
  const auto r = run({"spectrum", "--b", "2", "--kmax", "1", "-o", path});
  ASSERT_EQ(r.code, 0);
  EXPECT_TRUE(r.out.empty());
  std::ifstream f(path);
  std::string header;
  std::getline(f, header);
  EXPECT_EQ(header, "k,lambda");
}
