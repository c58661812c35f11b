// SPDX-License-Identifier: Apache-2.0

#include "closed_form.hpp"

#include <algorithm>
#include <cmath>

#include <boost/math/quadrature/gauss.hpp>

#include "errors.hpp"

namespace qle::closed_form {

namespace {

constexpr int kTheta = 512;
constexpr int kPanels = 32;

using Gauss = boost::math::quadrature::gauss<double, 20>;

// Inward normal derivative of phi on the circle of radius r; sign +1 on an inner circle.
double normal_derivative(const geometry::ScalarFunction& phi, double r, double theta, double sign) {
  const double c = std::cos(theta), s = std::sin(theta);
  const geometry::Jet2 j = phi.eval(r * c, r * s);
  return sign * (c * j.x + s * j.y);
}

}  // namespace

const char* formula_name(Formula f) {
  switch (f) {
    case Formula::BrownYork: return "brown_york";
    case Formula::ConformalBoundary: return "conformal_boundary";
    case Formula::ConformalInterior: return "conformal_interior";
    case Formula::RotSym: return "rotsym";
  }
  return "";
}

double brown_york(const geometry::BoundaryGeometry& b, const std::vector<std::string>& C) {
  for (const auto& name : C)
    if (std::find(b.labels.begin(), b.labels.end(), name) == b.labels.end())
      throw ValidationError("no boundary component named '" + name + "'");
  double sum = 0.0;
  for (std::size_t c = 0; c < b.labels.size(); ++c) {
    if (!C.empty() && std::find(C.begin(), C.end(), b.labels[c]) == C.end()) continue;
    for (std::size_t m = 0; m < b.ds[c].size(); ++m) sum += (b.H_M[c][m] - b.H_N[c][m]) * b.ds[c][m];
  }
  return 0.5 * sum;
}

ClosedFormResult conformal_energy(const geometry::ConformalFlat& spec) {
  geometry::validate_spec(spec);
  ClosedFormResult out;
  out.formula = Formula::ConformalBoundary;

  struct Circle {
    double r, sign;
  };
  std::vector<Circle> circles{{spec.r_out, -1.0}};
  if (spec.topology == geometry::Topology::Annulus) circles.push_back({spec.r_in, +1.0});

  const double ht = 2.0 * M_PI / kTheta;
  double bsum = 0.0;
  double min_dn = INFINITY;
  for (const auto& c : circles)
    for (int j = 0; j < kTheta; ++j) {
      const double dn = normal_derivative(spec.phi, c.r, j * ht, c.sign);
      min_dn = std::min(min_dn, dn);
      bsum += dn * c.r * ht;
    }
  out.boundary_form = 0.5 * bsum;
  out.min_normal_derivative = min_dn;

  // 1/4 int e^{2 phi} R' dvol with R' = -2 e^{-2 phi} Laplacian(phi)
  const double r0 = spec.topology == geometry::Topology::Annulus ? spec.r_in : 0.0;
  const double dr = (spec.r_out - r0) / kPanels;
  double isum = 0.0;
  for (int p = 0; p < kPanels; ++p) {
    const double a = r0 + p * dr;
    isum += Gauss::integrate(
        [&](double r) {
          double ring = 0.0;
          for (int j = 0; j < kTheta; ++j) {
            const double t = j * ht;
            const geometry::Jet2 q = spec.phi.eval(r * std::cos(t), r * std::sin(t));
            ring += -0.5 * (q.xx + q.yy);
          }
          return ring * ht * r;
        },
        a, a + dr);
  }
  out.interior_form = isum;
  out.quadrature_error = std::abs(out.boundary_form - out.interior_form);
  out.neg_inf = min_dn < -1e-12;
  out.energy = out.neg_inf ? -INFINITY : out.boundary_form;
  return out;
}

ClosedFormResult rotsym_energy(const geometry::RotSym& spec) {
  geometry::validate_spec(spec);
  const double H = geometry::rotsym_mean_curvature(spec, spec.rho_max);
  if (!(H > 0.0)) throw ValidationError("boundary mean curvature must be positive");
  const double k = spec.s.eval(spec.rho_max).v;
  const int n = spec.n;
  const double vol = geometry::sphere_volume(n - 1) * std::pow(k, n - 1);
  ClosedFormResult out;
  out.formula = Formula::RotSym;
  out.energy = 0.5 * vol * ((n - 1) / k - H);
  return out;
}

}  // namespace qle::closed_form
