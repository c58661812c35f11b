// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>

#include "errors.hpp"
#include "geometry.hpp"

using namespace qle::geometry;

namespace {

ConformalFlat quadratic_phi(double c) {
  ConformalFlat s;
  s.phi.f = ScalarFunction::PolyR2{{c, -c}};
  return s;
}

// Gaussian curvature from the first fundamental form (Brioschi formula).
double brioschi(const General2D& s, double x, double y) {
  const Jet2 E = s.g11.eval(x, y), F = s.g12.eval(x, y), G = s.g22.eval(x, y);
  Eigen::Matrix3d A, B;
  A << -0.5 * E.yy + F.xy - 0.5 * G.xx, 0.5 * E.x, F.x - 0.5 * E.y,  //
      F.y - 0.5 * G.x, E.v, F.v,                                      //
      0.5 * G.y, F.v, G.v;
  B << 0.0, 0.5 * E.y, 0.5 * G.x,  //
      0.5 * E.y, E.v, F.v,         //
      0.5 * G.x, F.v, G.v;
  const double det = E.v * G.v - F.v * F.v;
  return (A.determinant() - B.determinant()) / (det * det);
}

General2D bumped(double eps) {
  // g11 = 1 + eps (1 - r^2) (1 + x), g12 = eps (1 - r^2) x y, g22 = 1 + eps (1 - r^2) y^2
  const Poly2 bump{{{1.0, 0, 0}, {-1.0, 2, 0}, {-1.0, 0, 2}}};
  General2D s;
  s.g11 = Poly2::constant(1.0) + (bump * Poly2{{{1.0, 0, 0}, {1.0, 1, 0}}}).scaled(eps);
  s.g12 = (bump * Poly2{{{1.0, 1, 1}}}).scaled(eps);
  s.g22 = Poly2::constant(1.0) + (bump * Poly2{{{1.0, 0, 2}}}).scaled(eps);
  return s;
}

}  // namespace

TEST_CASE("flat disk area, frame and boundary") {
  const auto d = build_domain(FlatDisk{1.0}, {32, 64});
  double area = 0.0;
  for (double w : d.weight) area += w;
  CHECK(std::abs(area - M_PI) < 1e-3);
  for (const auto& p : d.geo) {
    CHECK((p.F.transpose() * p.g * p.F - Mat2::Identity()).norm() < 1e-12);
    CHECK(p.a.norm() == 0.0);
    CHECK(p.scalar_R == 0.0);
  }
  REQUIRE(d.boundary.size() == 1);
  double len = 0.0;
  for (std::size_t m = 0; m < d.boundary[0].nodes.size(); ++m) {
    CHECK(std::abs(d.boundary[0].H_N[m] - 1.0) < 1e-12);
    CHECK(std::abs(d.boundary[0].H_M[m] - 1.0) < 1e-12);
    len += d.boundary[0].ds[m];
  }
  CHECK(std::abs(len - 2.0 * M_PI) < 1e-12);
}

TEST_CASE("resolution and spec preconditions") {
  CHECK_THROWS_AS(build_domain(FlatDisk{1.0}, {4, 64}), qle::ValidationError);
  CHECK_THROWS_AS(build_domain(FlatDisk{1.0}, {16, 17}), qle::ValidationError);
  ConformalFlat bad;
  bad.phi.f = ScalarFunction::PolyR2{{0.5}};
  CHECK_THROWS_AS(build_domain(bad, {16, 32}), qle::ValidationError);
  General2D g = bumped(0.1);
  g.g22 = g.g22 + Poly2::constant(0.2);
  CHECK_THROWS_AS(build_domain(g, {16, 32}), qle::ValidationError);
  RotSym r;
  r.n = 2;
  r.s.kind = Profile::Kind::Sin;
  r.rho_max = 4.0;  // s < 0 beyond pi
  CHECK_THROWS_AS(validate_spec(r), qle::ValidationError);
}

TEST_CASE("conformal disk curvature, connection and mean curvature") {
  const auto d = build_domain(quadratic_phi(0.5), {32, 64});
  double len = 0.0;
  for (double s : d.boundary[0].ds) len += s;
  CHECK(std::abs(len - 2.0 * M_PI) < 1e-10);
  for (std::size_t k = 0; k < d.geo.size(); ++k) {
    const double r2 = d.x[k] * d.x[k] + d.y[k] * d.y[k];
    const double phi = 0.5 * (1.0 - r2);
    // Laplacian of phi is -2; R' = -2 e^{-2 phi} Delta phi
    CHECK(std::abs(d.geo[k].scalar_R - 4.0 * std::exp(-2.0 * phi)) < 1e-12);
    // omega_12 = phi_y dx - phi_x dy
    CHECK(std::abs(d.geo[k].a(0) - (-d.y[k])) < 1e-12);
    CHECK(std::abs(d.geo[k].a(1) - d.x[k]) < 1e-12);
  }
  // R'(0) = 4/e: evaluate at the origin through the point interface
  CHECK(std::abs(d.at(0.0, 0.0).scalar_R - 4.0 / std::exp(1.0)) < 1e-12);
  const auto bg = boundary_geometry(d);
  for (double h : bg.H_N[0]) CHECK(std::abs(h) < 1e-12);
  CHECK(bg.conformal_check < 1e-12);
  const auto l2 = lambda2_distortion(d);
  for (std::size_t k = 0; k < l2.size(); ++k) {
    CHECK(l2[k] > 0.0);
    const double r2 = d.x[k] * d.x[k] + d.y[k] * d.y[k];
    CHECK(std::abs(l2[k] - std::exp(-(1.0 - r2))) < 1e-12);
  }
  CHECK(std::abs(lambda2_distortion(build_domain(quadratic_phi(0.0), {8, 16}))[0] - 1.0) < 1e-15);
  CHECK_THROWS_AS(lambda2_distortion(build_domain(FlatDisk{}, {8, 16})), qle::UnsupportedError);
}

TEST_CASE("identity General2D reproduces the flat disk") {
  General2D g;
  g.g11 = Poly2::constant(1.0);
  g.g12 = Poly2::constant(0.0);
  g.g22 = Poly2::constant(1.0);
  const auto a = build_domain(g, {16, 32});
  const auto b = build_domain(FlatDisk{1.0}, {16, 32});
  for (std::size_t k = 0; k < a.geo.size(); ++k) {
    CHECK((a.geo[k].F - b.geo[k].F).norm() == 0.0);
    CHECK((a.geo[k].a - b.geo[k].a).norm() == 0.0);
    CHECK(a.weight[k] == b.weight[k]);
  }
}

TEST_CASE("General2D curvature matches the Brioschi formula") {
  const General2D s = bumped(0.3);
  const auto d = build_domain(s, {16, 32});
  for (std::size_t k = 0; k < d.geo.size(); k += 7) {
    const double K = brioschi(s, d.x[k], d.y[k]);
    CHECK(std::abs(d.geo[k].scalar_R - 2.0 * K) < 1e-9);
    CHECK((d.geo[k].F.transpose() * d.geo[k].g * d.geo[k].F - Mat2::Identity()).norm() < 1e-12);
  }
  double len = 0.0;
  for (double v : d.boundary[0].ds) len += v;
  CHECK(std::abs(len - 2.0 * M_PI) < 1e-10);
}

TEST_CASE("structure equation residual decays under refinement") {
  const General2D s = bumped(0.3);
  auto residual = [&](double h) {
    double worst = 0.0;
    for (double x : {-0.4, 0.1, 0.5})
      for (double y : {-0.3, 0.2}) {
        const auto p = point_geometry(metric_field(s)(x, y));
        auto E = [&](double px, double py) { return point_geometry(metric_field(s)(px, py)).E; };
        const Mat2 Ex = (E(x + h, y) - E(x - h, y)) / (2 * h);
        const Mat2 Ey = (E(x, y + h) - E(x, y - h)) / (2 * h);
        // d tau^1 = -omega ^ tau^2, d tau^2 = omega ^ tau^1 with omega = a_x dx + a_y dy
        const double c1 = Ex(0, 1) - Ey(0, 0);
        const double c2 = Ex(1, 1) - Ey(1, 0);
        const double w1 = -(p.a(0) * p.E(1, 1) - p.a(1) * p.E(1, 0));
        const double w2 = p.a(0) * p.E(0, 1) - p.a(1) * p.E(0, 0);
        worst = std::max({worst, std::abs(c1 - w1), std::abs(c2 - w2)});
      }
    return worst;
  };
  const double e1 = residual(0.02), e2 = residual(0.01);
  CHECK(e2 < e1);
  CHECK(std::log2(e1 / e2) >= 1.0);
}

TEST_CASE("gauge rotation leaves invariant data unchanged") {
  const General2D s = bumped(0.2);
  const auto a = build_domain(s, {16, 32}, 0.0);
  const auto b = build_domain(s, {16, 32}, 0.7);
  for (std::size_t k = 0; k < a.geo.size(); ++k) {
    CHECK(std::abs(a.geo[k].scalar_R - b.geo[k].scalar_R) < 1e-12);
    CHECK((a.geo[k].a - b.geo[k].a).norm() < 1e-12);
  }
  for (std::size_t m = 0; m < a.boundary[0].nodes.size(); ++m) {
    CHECK(std::abs(a.boundary[0].H_N[m] - b.boundary[0].H_N[m]) < 1e-12);
    const double da = std::remainder(a.boundary[0].normal_angle[m] - b.boundary[0].normal_angle[m], 2 * M_PI);
    CHECK(std::abs(da - 0.7) < 1e-12);
  }
}

TEST_CASE("annulus boundary geometry") {
  ConformalFlat s;
  s.topology = Topology::Annulus;
  s.r_in = 0.5;
  s.r_out = 1.0;
  s.phi.f = ScalarFunction::PolyR2{{0.0}};
  const auto d = build_domain(s, {16, 32});
  REQUIRE(d.boundary.size() == 2);
  double area = 0.0;
  for (double w : d.weight) area += w;
  CHECK(std::abs(area - M_PI * 0.75) < 1e-12);
  const auto& inner = d.component("inner");
  for (std::size_t m = 0; m < inner.nodes.size(); ++m) {
    CHECK(std::abs(inner.H_N[m] + 2.0) < 1e-12);
    CHECK(std::abs(inner.H_M[m] + 2.0) < 1e-12);
  }
}

TEST_CASE("rotationally symmetric profiles") {
  RotSym s3;
  s3.n = 3;
  s3.s.kind = Profile::Kind::Sin;
  s3.rho_max = M_PI / 3;
  for (double R : rotsym_scalar_curvature(s3, {0.1, 0.5, 1.0})) CHECK(std::abs(R - 6.0) < 1e-12);
  CHECK(std::abs(rotsym_mean_curvature(s3, M_PI / 3) - 2.0 / std::sqrt(3.0)) < 1e-12);
  CHECK_THROWS_AS(build_domain(s3, {16, 32}), qle::UnsupportedError);

  RotSym s2 = s3;
  s2.n = 2;
  const auto d = build_domain(s2, {16, 32});
  CHECK(std::abs(d.grid.r_out - std::sqrt(3.0) / 2.0) < 1e-15);
  for (const auto& p : d.geo) CHECK(std::abs(p.scalar_R - 2.0) < 1e-7);
  double len = 0.0;
  for (double v : d.boundary[0].ds) len += v;
  CHECK(std::abs(len - M_PI * std::sqrt(3.0)) < 1e-9);
  // geodesic curvature of the latitude circle is cot(rho0)
  for (double h : d.boundary[0].H_N) CHECK(std::abs(h - 1.0 / std::sqrt(3.0)) < 1e-8);
  CHECK(std::abs(sphere_volume(2) - 4.0 * M_PI) < 1e-12);
}
