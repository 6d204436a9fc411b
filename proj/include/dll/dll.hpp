#pragma once

#include "dll/errors.hpp"
#include "dll/specfun.hpp"
#include "dll/quadrature.hpp"
#include "dll/kernels.hpp"
#include "dll/landau.hpp"
#include "dll/jet.hpp"
#include "dll/funcalc.hpp"
#include "dll/fiber.hpp"
#include "dll/correspondence.hpp"
