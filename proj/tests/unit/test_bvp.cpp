// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>

#include "bvp.hpp"
#include "errors.hpp"

using namespace qle;
using namespace qle::bvp;
using dirac::Path;
using geometry::ConformalFlat;
using geometry::FlatDisk;

namespace {

const cd kI(0.0, 1.0);

ConformalFlat quadratic_phi(double c) {
  ConformalFlat s;
  s.phi.f = geometry::ScalarFunction::PolyR2{{c, -c}};
  return s;
}

ConformalFlat flat_annulus() {
  ConformalFlat s;
  s.topology = geometry::Topology::Annulus;
  s.r_in = 0.5;
  s.phi.f = geometry::ScalarFunction::PolyR2{{0.0}};
  return s;
}

FiberAction twisted() { return dirac::fiber_action(clifford::build_clifford_rep(2), Path::Twisted); }

Vec identity_fiber() {
  Vec v(4);
  v << 1.0, 0.0, 0.0, 1.0;
  return v;
}

// Orthogonal projector onto span(basis) in the L2 inner product.
Eigen::MatrixXcd span_projector(const DiscreteDomain& d, const FiberAction& f, const std::vector<Vec>& basis) {
  const long n = basis.front().size();
  Eigen::MatrixXcd P = Eigen::MatrixXcd::Zero(n, n);
  Eigen::VectorXd w(n);
  for (long i = 0; i < n; ++i) w(i) = f.kappa * d.weight[i / f.dim];
  for (const Vec& b : basis) P += b * (w.cwiseProduct(b.conjugate())).transpose();
  return P;
}

}  // namespace

TEST_CASE("method and path names round-trip") {
  for (Method m : {Method::BoundaryFormula, Method::NormalDerivative, Method::Bulk, Method::ClosedForm})
    CHECK(parse_method(method_name(m)) == m);
  for (PathChoice p : {PathChoice::Auto, PathChoice::Spinor, PathChoice::Twisted}) CHECK(parse_path(path_name(p)) == p);
  CHECK_THROWS_AS(parse_method("trace"), ValidationError);
  CHECK_THROWS_AS(parse_path("mixed"), ValidationError);
}

TEST_CASE("flat disk has a one-dimensional kernel along the volume element") {
  const auto d = geometry::build_domain(FlatDisk{1.0}, {12, 24});
  const auto f = twisted();
  const System sys(d, f, BoundaryCondition::Kind::PiPlus);
  CHECK(sys.matrix().rows() == sys.matrix().cols());
  const KernelInfo ker = kernel_basis(sys);
  REQUIRE(ker.dim == 1);
  CHECK_FALSE(ker.ambiguous);
  CHECK(ker.singular_values[0] < 1e-9);
  CHECK(ker.singular_values[1] > 0.5);

  const clifford::Matrix& eps = f.rep.epsilon;
  const Vec vol = dirac::constant_field(d.grid.nodes(), Eigen::Map<const Vec>(eps.data(), 4));
  const Vec& eta = ker.basis[0];
  const double cosine = std::abs(dirac::l2_inner(d, f, eta, vol)) /
                        std::sqrt(dirac::l2_inner(d, f, eta, eta).real() * dirac::l2_inner(d, f, vol, vol).real());
  CHECK(cosine > 0.999);
  CHECK(std::abs(dirac::l2_inner(d, f, eta, eta).real() - 1.0) < 1e-10);
}

TEST_CASE("flat disk energy vanishes and the solution is constant") {
  const auto d = geometry::build_domain(FlatDisk{1.0}, {12, 24});
  const auto f = twisted();
  const System sys(d, f, BoundaryCondition::Kind::PiPlus);
  const KernelInfo ker = kernel_basis(sys);
  const BoundaryData data = project_boundary_data(d, f, unit_data(d, f, {"outer"}, identity_fiber()), ker);
  CHECK_FALSE(data.modified);
  const Solution sol = solve_bvp(sys, data, ker);
  CHECK(sol.dirac_residual < 1e-12);
  CHECK(sol.boundary_residual < 1e-12);
  const MinimizeResult mr = minimize_energy(d, f, sol.psi, ker);
  CHECK_FALSE(mr.neg_inf);
  const Vec one = dirac::constant_field(d.grid.nodes(), identity_fiber());
  CHECK((mr.psi - one).cwiseAbs().maxCoeff() < 1e-9);
  CHECK(std::abs(energy_bulk(d, f, mr.psi)) < 1e-12);
  CHECK(std::abs(energy_boundary(d, f, mr.psi)) < 1e-12);
  CHECK(std::abs(energy_normal_derivative(d, f, mr.psi)) < 1e-10);

  const EnergyReport rep = quasilocal_energy(FlatDisk{1.0}, {}, {12, 24});
  CHECK(std::abs(rep.energy) < 1e-10);
  CHECK(rep.kernel.dim == 1);
  CHECK(std::abs(rep.brown_york) < 1e-12);
  REQUIRE(rep.closed_form.has_value());
  CHECK(std::abs(rep.closed_form->energy) < 1e-12);
}

TEST_CASE("conformal disk energy approaches pi") {
  const EnergyReport rep = quasilocal_energy(quadratic_phi(0.5), {}, {16, 32});
  CHECK_FALSE(rep.neg_inf);
  CHECK(rep.kernel.dim == 1);
  CHECK(std::abs(rep.energy - M_PI) < 0.02 * M_PI);
  CHECK(std::abs(rep.method_values.at("boundary_formula") - M_PI) < 0.02 * M_PI);
  CHECK(std::abs(rep.method_values.at("normal_derivative") - M_PI) < 0.02 * M_PI);
  CHECK(std::abs(rep.brown_york - M_PI) < 1e-8);
  CHECK(rep.residuals.at("dirac") < 1e-10);
  CHECK(rep.residuals.at("boundary") < 1e-10);
}

TEST_CASE("negative conformal factor is unbounded below") {
  const EnergyReport rep = quasilocal_energy(quadratic_phi(-0.5), {}, {12, 24});
  CHECK(rep.neg_inf);
  CHECK(std::isinf(rep.energy));
  CHECK(rep.energy < 0.0);
  REQUIRE(rep.closed_form.has_value());
  CHECK(rep.closed_form->neg_inf);
}

TEST_CASE("annulus kernel and boundary data projection") {
  const auto d = geometry::build_domain(flat_annulus(), {12, 24});
  const auto f = twisted();
  const System sys(d, f, BoundaryCondition::Kind::PiPlus);
  const KernelInfo ker = kernel_basis(sys);
  REQUIRE(ker.dim == 2);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      CHECK(std::abs(dirac::l2_inner(d, f, ker.basis[i], ker.basis[j]) - (i == j ? 1.0 : 0.0)) < 1e-10);

  const BoundaryData raw = unit_data(d, f, {"outer"}, identity_fiber());
  const BoundaryData proj = project_boundary_data(d, f, raw, ker);

  // least-squares projection onto the traces gamma^n eta via their Gram matrix
  const int fd = f.dim;
  std::vector<Vec> traces;
  for (const Vec& eta : ker.basis) {
    Vec t = Vec::Zero(eta.size());
    for (const auto& comp : d.boundary) {
      const auto gn = dirac::normal_gammas(d, f, comp);
      for (std::size_t m = 0; m < comp.nodes.size(); ++m) {
        const Eigen::Index k = static_cast<Eigen::Index>(comp.nodes[m]) * fd;
        t.segment(k, fd) = gn[m] * eta.segment(k, fd);
      }
    }
    traces.push_back(t);
  }
  auto bdot = [&](const Vec& a, const Vec& b) {
    cd s = 0.0;
    for (const auto& comp : d.boundary) s += dirac::boundary_inner(d, f, comp, dirac::restrict_to(comp, fd, a),
                                                                    dirac::restrict_to(comp, fd, b));
    return s;
  };
  Eigen::Matrix2cd G;
  Eigen::Vector2cd rhs;
  for (int i = 0; i < 2; ++i) {
    rhs(i) = bdot(traces[i], raw.values);
    for (int j = 0; j < 2; ++j) G(i, j) = bdot(traces[i], traces[j]);
  }
  const Eigen::Vector2cd c = G.ldlt().solve(rhs);
  const Vec expect = raw.values - c(0) * traces[0] - c(1) * traces[1];
  CHECK((proj.values - expect).cwiseAbs().maxCoeff() < 1e-10);
  CHECK(proj.modified);
  for (const Vec& t : traces) CHECK(std::abs(bdot(t, proj.values)) < 1e-10);

  const Solution sol = solve_bvp(sys, proj, ker);
  CHECK(sol.boundary_residual < 1e-10);
  for (const Vec& eta : ker.basis) CHECK(std::abs(dirac::l2_inner(d, f, eta, sol.psi)) < 1e-8);
}

TEST_CASE("energies are quadratic in the field") {
  const auto d = geometry::build_domain(quadratic_phi(0.3), {10, 20});
  const auto f = twisted();
  Vec psi(d.grid.nodes() * 4);
  for (int k = 0; k < d.grid.nodes(); ++k)
    for (int a = 0; a < 4; ++a) psi(k * 4 + a) = cd(std::cos(d.x[k] + a), d.y[k] * d.x[k] - 0.1 * a);
  const Vec two = 2.0 * psi;
  CHECK(std::abs(energy_bulk(d, f, two) - 4.0 * energy_bulk(d, f, psi)) < 1e-10);
  CHECK(std::abs(energy_boundary(d, f, two) - 4.0 * energy_boundary(d, f, psi)) < 1e-10);
  CHECK(std::abs(energy_normal_derivative(d, f, two) - 4.0 * energy_normal_derivative(d, f, psi)) < 1e-10);
  const Vec rot = std::polar(1.0, 0.8) * psi;
  CHECK(std::abs(energy_bulk(d, f, rot) - energy_bulk(d, f, psi)) < 1e-10);
}

TEST_CASE("kernel minimization finds the minimum along the kernel") {
  const auto d = geometry::build_domain(quadratic_phi(0.5), {12, 24});
  const auto f = twisted();
  const System sys(d, f, BoundaryCondition::Kind::PiPlus);
  const KernelInfo ker = kernel_basis(sys);
  REQUIRE(ker.dim == 1);
  const BoundaryData data = project_boundary_data(d, f, unit_data(d, f, {"outer"}, identity_fiber()), ker);
  const Solution sol = solve_bvp(sys, data, ker);
  const MinimizeResult mr = minimize_energy(d, f, sol.psi, ker);
  REQUIRE_FALSE(mr.neg_inf);
  CHECK((mr.Q - mr.Q.transpose()).norm() < 1e-12);
  for (double e : mr.eigenvalues) CHECK(e > 0.0);
  CHECK(std::abs(energy_bulk(d, f, mr.psi) - mr.energy) < 1e-10 * (1.0 + std::abs(mr.energy)));
  for (const Vec& dir : {ker.basis[0], Vec(kI * ker.basis[0])})
    for (double t : {-1e-2, 1e-2}) CHECK(energy_bulk(d, f, mr.psi + t * dir) >= mr.energy - 1e-12);
}

TEST_CASE("kernel span and energy do not depend on the seed") {
  const auto d = geometry::build_domain(flat_annulus(), {10, 20});
  const auto f = twisted();
  const System sys(d, f, BoundaryCondition::Kind::PiPlus);
  SolverOptions a, b;
  b.seed = 99;
  const KernelInfo ka = kernel_basis(sys, a), kb = kernel_basis(sys, b);
  REQUIRE(ka.dim == kb.dim);
  CHECK((span_projector(d, f, ka.basis) - span_projector(d, f, kb.basis)).norm() < 1e-6);

  const EnergyReport ra = quasilocal_energy(quadratic_phi(0.5), {}, {10, 20}, PathChoice::Twisted, Method::Bulk, a);
  const EnergyReport rb = quasilocal_energy(quadratic_phi(0.5), {}, {10, 20}, PathChoice::Twisted, Method::Bulk, b);
  CHECK(std::abs(ra.energy - rb.energy) < 1e-9);
}

TEST_CASE("energy is invariant under a frame rotation") {
  SolverOptions rotated;
  rotated.gauge_angle = 0.7;
  const EnergyReport a = quasilocal_energy(quadratic_phi(0.5), {}, {12, 24});
  const EnergyReport b = quasilocal_energy(quadratic_phi(0.5), {}, {12, 24}, PathChoice::Auto, Method::Bulk, rotated);
  for (const auto& [name, v] : a.method_values) CHECK(std::abs(v - b.method_values.at(name)) < 1e-9);
}

TEST_CASE("spinor path reports its decomposition and falls back with a kernel") {
  const EnergyReport rep = quasilocal_energy(quadratic_phi(0.5), {}, {12, 24}, PathChoice::Spinor);
  CHECK(rep.path_used == PathChoice::Twisted);
  CHECK_FALSE(rep.notes.empty());
  REQUIRE(rep.spinor_values.count("bulk") == 1);
  CHECK(std::abs(rep.spinor_values.at("bulk") - rep.method_values.at("bulk")) < 0.01);
}

TEST_CASE("residual contract violations raise SolverError") {
  SolverOptions strict;
  strict.dirac_tol = 0.0;
  strict.boundary_tol = 0.0;
  CHECK_THROWS_AS(quasilocal_energy(quadratic_phi(0.5), {}, {10, 20}, PathChoice::Twisted, Method::Bulk, strict),
                  SolverError);
  CHECK_THROWS_AS(quasilocal_energy(FlatDisk{1.0}, {"nowhere"}, {10, 20}), ValidationError);
  geometry::General2D flat;
  flat.g11 = geometry::Poly2::constant(1.0);
  flat.g12 = geometry::Poly2::constant(0.0);
  flat.g22 = geometry::Poly2::constant(1.0);
  CHECK_THROWS_AS(quasilocal_energy(flat, {}, {10, 20}, PathChoice::Auto, Method::ClosedForm), UnsupportedError);
}
