// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>
#include <random>

#include <unsupported/Eigen/MatrixFunctions>

#include "clifford.hpp"
#include "errors.hpp"

using namespace qle::clifford;

namespace {

const cd I1{0.0, 1.0};

Matrix pauli(int k) {
  Matrix m(2, 2);
  if (k == 0) m << 1, 0, 0, 1;
  if (k == 1) m << 0, 1, 1, 0;
  if (k == 2) m << 0, -I1, I1, 0;
  if (k == 3) m << 1, 0, 0, -1;
  return m;
}

Matrix kron2(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j) out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

// Independent rep of Cl_4: s_x (x) s_x, s_x (x) s_y, s_x (x) s_z, s_y (x) 1.
std::vector<Matrix> oracle_cl4() {
  return {kron2(pauli(1), pauli(1)), kron2(pauli(1), pauli(2)), kron2(pauli(1), pauli(3)),
          kron2(pauli(2), pauli(0))};
}

Matrix word(const std::vector<Matrix>& g, const MultiIndex& idx) {
  Matrix out = Matrix::Identity(g[0].rows(), g[0].cols());
  for (int v : idx) out = out * g[v - 1];
  return out;
}

Eigen::VectorXcd vec(const Matrix& m) { return Eigen::Map<const Eigen::VectorXcd>(m.data(), m.size()); }

// Twisted-fiber vector of the form (-i)^{|I|} gamma^I in the adapted frame.
Eigen::VectorXcd form(const CliffordRep& rep, double angle, const MultiIndex& idx) {
  std::vector<Matrix> adapted{gamma_along(rep, angle), gamma_along(rep, angle + M_PI / 2)};
  for (int a = 2; a < rep.n; ++a) adapted.push_back(rep.gamma[a]);
  Matrix m = word(adapted, idx);
  for (std::size_t k = 0; k < idx.size(); ++k) m *= -I1;
  return vec(m);
}

}  // namespace

TEST_CASE("clifford relations hold for every supported dimension") {
  for (int n : {2, 4, 6, 8}) {
    const auto rep = build_clifford_rep(n);
    const int d = rep.spinor_dim();
    CHECK(d == (1 << (n / 2)));
    const Matrix id = Matrix::Identity(d, d);
    for (int a = 0; a < n; ++a) {
      CHECK((rep.gamma[a] - rep.gamma[a].adjoint()).norm() == 0.0);
      CHECK((rep.epsilon * rep.gamma[a] + rep.gamma[a] * rep.epsilon).norm() < 1e-14);
      for (int b = 0; b < n; ++b) {
        const Matrix ac = rep.gamma[a] * rep.gamma[b] + rep.gamma[b] * rep.gamma[a];
        CHECK((ac - (a == b ? 2.0 : 0.0) * id).norm() == 0.0);
      }
    }
    CHECK((rep.epsilon * rep.epsilon - id).norm() < 1e-14);
    CHECK((rep.gamma0 - I1 * rep.epsilon).norm() == 0.0);
    CHECK((rep.gamma0 * rep.gamma0 + id).norm() < 1e-14);
    CHECK((rep.gamma0.adjoint() + rep.gamma0).norm() < 1e-14);
    for (const auto& idx : all_multi_indices(n))
      if (!idx.empty()) CHECK(std::abs(rep.product(idx).trace()) < 1e-12);
  }
}

TEST_CASE("unsupported dimensions are rejected") {
  for (int n : {0, 1, 3, 5, 10}) CHECK_THROWS_AS(build_clifford_rep(n), qle::UnsupportedError);
}

TEST_CASE("n=4 word traces match an independent tensor-product representation") {
  const auto rep = build_clifford_rep(4);
  const auto oracle = oracle_cl4();
  const auto idx = all_multi_indices(4);
  for (const auto& I : idx)
    for (const auto& J : idx) {
      const cd a = (rep.product(I) * rep.product(J)).trace();
      const cd b = (word(oracle, I) * word(oracle, J)).trace();
      CHECK(std::abs(a - b) < 1e-12);
    }
  const Matrix vol = rep.product({1, 2, 3, 4});
  CHECK(std::abs(vol.trace()) < 1e-12);
  CHECK(std::abs(rep.gamma[0].trace()) < 1e-12);
  const cd t = (rep.epsilon.adjoint() * vol).trace();
  CHECK(std::abs(std::abs(t) - 4.0) < 1e-12);
  CHECK(std::abs((vol * vol).trace() - 4.0) < 1e-12);
}

TEST_CASE("form dictionary") {
  const auto rep = build_clifford_rep(2);
  CHECK((form_endomorphism(rep, {{{}, 1.0}}) - Matrix::Identity(2, 2)).norm() == 0.0);
  const Matrix v = form_endomorphism(rep, {{{1, 2}, 1.0}});
  CHECK((v - rep.gamma[0] * rep.gamma[1]).norm() == 0.0);
  CHECK((v + v.adjoint()).norm() < 1e-14);
  CHECK((v * v + Matrix::Identity(2, 2)).norm() < 1e-14);
  CHECK_THROWS_AS(form_endomorphism(rep, {{{2, 1}, 1.0}}), qle::ValidationError);
  CHECK_THROWS_AS(form_endomorphism(rep, {{{3}, 1.0}}), qle::ValidationError);

  for (int n : {2, 4}) {
    const auto r = build_clifford_rep(n);
    std::mt19937_64 gen(7);
    std::normal_distribution<double> nd;
    std::map<MultiIndex, cd> coeffs;
    for (const auto& idx : all_multi_indices(n)) coeffs[idx] = cd(nd(gen), nd(gen));
    const auto back = endomorphism_coefficients(r, form_endomorphism(r, coeffs));
    // brute-force inversion over the full basis
    const auto idx = all_multi_indices(n);
    const int D = r.twisted_dim();
    Matrix basis(D, D);
    for (int k = 0; k < D; ++k) basis.col(k) = vec(r.product(idx[k]));
    Eigen::VectorXcd c = basis.fullPivLu().solve(vec(form_endomorphism(r, coeffs)));
    for (int k = 0; k < D; ++k) {
      CHECK(std::abs(back.at(idx[k]) - coeffs.at(idx[k])) < 1e-12);
      CHECK(std::abs(c(k) - coeffs.at(idx[k])) < 1e-12);
    }
    MultiIndex all;
    for (int a = 1; a <= n; ++a) all.push_back(a);
    CHECK((form_endomorphism(r, {{all, 1.0}}) - r.product(all)).norm() == 0.0);
  }
}

TEST_CASE("volume phase is a unit complex number") {
  for (int n : {2, 4, 6, 8}) {
    const auto rep = build_clifford_rep(n);
    const cd c = volume_phase(rep);
    CHECK(std::abs(std::abs(c) - 1.0) < 1e-12);
    MultiIndex all;
    for (int a = 1; a <= n; ++a) all.push_back(a);
    Matrix vol = rep.product(all);
    for (int a = 0; a < n; ++a) vol *= -I1;
    CHECK((rep.gamma0 - c * vol).norm() < 1e-12);
  }
}

TEST_CASE("boundary involution fixes tangential forms and negates normal ones") {
  const auto rep = build_clifford_rep(2);
  // normal = e_2: tangential direction is e_2 rotated by pi/2, i.e. -e_1
  const auto b = boundary_involution(rep, M_PI / 2);
  const Eigen::VectorXcd one = vec(Matrix::Identity(2, 2));
  Eigen::VectorXcd tau1(4), tau2(4), tau12(4);
  tau1 = vec(-I1 * rep.gamma[0]);
  tau2 = vec(-I1 * rep.gamma[1]);
  tau12 = vec(-1.0 * rep.gamma[0] * rep.gamma[1]);
  CHECK((b.T * one - one).norm() < 1e-14);
  CHECK((b.T * tau1 - tau1).norm() < 1e-14);
  CHECK((b.T * tau2 + tau2).norm() < 1e-14);
  CHECK((b.T * tau12 + tau12).norm() < 1e-14);
  CHECK((b.pi_plus * (tau1 + tau2) - tau1).norm() < 1e-14);
  CHECK(b.plus_basis.cols() == 2);
  CHECK(b.minus_basis.cols() == 2);
}

TEST_CASE("boundary algebra invariants at sampled angles") {
  for (int n : {2, 4}) {
    const auto rep = build_clifford_rep(n);
    const int D = rep.twisted_dim();
    const Matrix id = Matrix::Identity(D, D);
    for (double ang : {0.0, 0.3, 1.7, M_PI, 4.1}) {
      const auto b = boundary_involution(rep, ang);
      CHECK((b.T * b.T - id).norm() < 1e-12);
      CHECK((b.pi_plus + b.pi_minus - id).norm() < 1e-12);
      CHECK((b.pi_plus * b.pi_minus).norm() < 1e-12);
      CHECK((b.pi_plus - b.pi_plus.adjoint()).norm() < 1e-12);
      CHECK((b.pi_plus * b.pi_plus - b.pi_plus).norm() < 1e-12);
      CHECK((b.T * b.gamma_n + b.gamma_n * b.T).norm() < 1e-12);
      for (const auto& gt : b.gamma_t) {
        const Matrix c = b.gamma_n * gt;
        CHECK((b.T * c + c * b.T).norm() < 1e-12);
      }
      // gamma = i(E - I), gamma_hat = E + I
      for (std::size_t a = 0; a < b.ext.size(); ++a) {
        const Matrix left = a == 0 ? b.gamma_n : b.gamma_t[a - 1];
        const Matrix hat = a == 0 ? b.gamma_n_hat : b.gamma_t_hat[a - 1];
        CHECK((I1 * (b.ext[a] - b.intr[a]) - left).norm() < 1e-12);
        CHECK((b.ext[a] + b.intr[a] - hat).norm() < 1e-12);
        CHECK((hat * left + left * hat).norm() < 1e-12);
      }
      // tangential forms are fixed, forms containing the normal are negated
      for (const auto& idx : all_multi_indices(n)) {
        const bool has_normal = !idx.empty() && idx[0] == 1;
        const Eigen::VectorXcd f = form(rep, ang, idx);
        CHECK((b.T * f - (has_normal ? -1.0 : 1.0) * f).norm() < 1e-12);
      }
      // <1, gamma^n gamma^t gamma_hat^n gamma_hat^t 1> = 1
      const Eigen::VectorXcd one = vec(Matrix::Identity(rep.spinor_dim(), rep.spinor_dim()));
      const cd v = one.dot(b.gamma_n * b.gamma_t[0] * b.gamma_n_hat * b.gamma_t_hat[0] * one) /
                   double(rep.spinor_dim());
      CHECK(std::abs(v - 1.0) < 1e-12);
    }
  }
}

TEST_CASE("rotating the normal by pi conjugates T by the fiber rotation") {
  const auto rep = build_clifford_rep(2);
  for (double ang : {0.2, 2.5}) {
    const auto b0 = boundary_involution(rep, ang);
    const auto b1 = boundary_involution(rep, ang + M_PI);
    const Matrix spin = (0.5 * M_PI * rep.gamma[0] * rep.gamma[1]).exp();
    const Matrix rot = right_mult(spin.adjoint()) * left_mult(spin);
    CHECK((b1.T - rot * b0.T * rot.adjoint()).norm() < 1e-12);
    CHECK((b1.T * b1.T - Matrix::Identity(4, 4)).norm() < 1e-12);
  }
}

TEST_CASE("chirality projectors") {
  for (int n : {2, 4}) {
    const auto rep = build_clifford_rep(n);
    const int d = rep.spinor_dim();
    for (double ang : {0.0, 1.1}) {
      const auto p = chirality_projectors(rep, ang);
      CHECK((p.plus + p.minus - Matrix::Identity(d, d)).norm() < 1e-14);
      CHECK((p.plus * p.minus).norm() < 1e-14);
      CHECK(range_basis(p.plus).cols() == d / 2);
      CHECK(range_basis(p.minus).cols() == d / 2);
    }
  }
  // eigenvectors at theta = 0 and pi/2 are related by exp(theta g1 g2 / 2) up to phase
  const auto rep = build_clifford_rep(2);
  const Matrix v0 = range_basis(chirality_projectors(rep, 0.0).plus);
  const Matrix v1 = range_basis(chirality_projectors(rep, M_PI / 2).plus);
  const Matrix u = (-0.25 * M_PI * rep.gamma[0] * rep.gamma[1]).exp();
  const cd overlap = v1.col(0).dot(u * v0.col(0));
  CHECK(std::abs(std::abs(overlap) - 1.0) < 1e-12);
}
