// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace qle {

/// Invalid input: bad spec, config, multi-index, resolution.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Requested feature outside the supported range (odd n, wrong spec variant).
class UnsupportedError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A linear solve did not meet its residual contract.
class SolverError : public std::runtime_error {
 public:
  SolverError(const std::string& what, double dirac_residual, double boundary_residual)
      : std::runtime_error(what),
        dirac_residual_(dirac_residual),
        boundary_residual_(boundary_residual) {}

  double dirac_residual() const { return dirac_residual_; }
  double boundary_residual() const { return boundary_residual_; }

 private:
  double dirac_residual_;
  double boundary_residual_;
};

}  // namespace qle
