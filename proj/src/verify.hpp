// SPDX-License-Identifier: Apache-2.0
//
// Property suites and refinement studies.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "config.hpp"

namespace qle::verify {

struct Check {
  std::string name;
  double value = 0.0;
  double lo = -INFINITY, hi = INFINITY;
  bool passed = false;

  double margin() const { return std::min(value - lo, hi - value); }
};

struct SuiteResult {
  std::string suite;
  std::uint64_t seed = 1;
  std::vector<Check> checks;
  std::vector<std::string> notes;

  bool passed() const;
};

const std::vector<std::string>& suite_names();

/// Throws ValidationError for an unknown suite name.
SuiteResult run_suite(const std::string& suite, std::uint64_t seed = 1);

// individual suites, also used by the acceptance driver
SuiteResult clifford_suite();
/// Green and Lichnerowicz residuals on random smooth fields at nr = 12, 24, 48.
SuiteResult identities_suite(std::uint64_t seed);
SuiteResult kernel_suite(std::uint64_t seed);
/// Conformal specs with nonnegative scalar curvature, drawn from the seed.
SuiteResult positivity_suite(std::uint64_t seed, int count = 20, geometry::Resolution res = {24, 48});
SuiteResult agreement_suite(geometry::Resolution coarse = {24, 48}, int levels = 2);

/// Superharmonic radial conformal factors (1 - r^2)(a0 + a1 r^2 + a2 r^4) with a fixed seed.
std::vector<geometry::ConformalFlat> positive_curvature_specs(std::uint64_t seed, int count);

struct ConvergenceRow {
  geometry::Resolution resolution;
  double energy = 0.0;
  double error = 0.0;
  double order = NAN;  // log2(previous error / error)
  double runtime_seconds = 0.0;
};

struct ConvergenceResult {
  double oracle = 0.0;
  std::string oracle_formula;
  std::vector<ConvergenceRow> rows;
};

/// Doubles the resolution levels - 1 times. Throws ValidationError when the spec has
/// no finite closed-form oracle for the selected boundary.
ConvergenceResult run_convergence(const config::RunConfig& cfg, int levels);

config::json to_json(const SuiteResult& r);
config::json to_json(const ConvergenceResult& r, const config::RunConfig& cfg);

}  // namespace qle::verify
