// SPDX-License-Identifier: Apache-2.0
//
// Quadrature-only energy formulas.

#pragma once

#include <string>
#include <vector>

#include "geometry.hpp"

namespace qle::closed_form {

enum class Formula { BrownYork, ConformalBoundary, ConformalInterior, RotSym };

const char* formula_name(Formula f);

struct ClosedFormResult {
  double energy = 0.0;
  bool neg_inf = false;
  Formula formula = Formula::ConformalBoundary;
  double quadrature_error = 0.0;
  double boundary_form = 0.0;   // conformal only
  double interior_form = 0.0;   // conformal only
  double min_normal_derivative = 0.0;  // conformal only: min of e_n phi over the boundary
};

/// 1/2 int_C (H_M - H_N) ds over the named components (all when C is empty).
double brown_york(const geometry::BoundaryGeometry& boundary, const std::vector<std::string>& C = {});

/// Energy of e^{2 phi} (flat) relative to the flat region, C = all of the boundary.
/// NEG_INF when the inward normal derivative of phi is negative somewhere on the boundary.
ClosedFormResult conformal_energy(const geometry::ConformalFlat& spec);

/// 1/2 Vol(dN) ((n-1)/k - H) with k = s(rho_max). Throws ValidationError unless H > 0.
ClosedFormResult rotsym_energy(const geometry::RotSym& spec);

}  // namespace qle::closed_form
