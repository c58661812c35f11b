// SPDX-License-Identifier: Apache-2.0

#include "clifford.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "errors.hpp"

namespace qle::clifford {

namespace {

const cd kI{0.0, 1.0};

Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

Matrix pauli(char which) {
  Matrix m(2, 2);
  switch (which) {
    case 'x': m << 0, 1, 1, 0; break;
    case 'y': m << 0, -kI, kI, 0; break;
    case 'z': m << 1, 0, 0, -1; break;
    default: m = Matrix::Identity(2, 2);
  }
  return m;
}

cd ipow(const cd& base, int k) {
  cd out{1.0, 0.0};
  for (int i = 0; i < k; ++i) out *= base;
  return out;
}

void validate_index(const MultiIndex& index, int n) {
  int prev = 0;
  for (int v : index) {
    if (v < 1 || v > n || v <= prev) {
      std::string s;
      for (int w : index) s += std::to_string(w) + " ";
      throw ValidationError("malformed multi-index [" + s + "] for n=" + std::to_string(n));
    }
    prev = v;
  }
}

}  // namespace

Matrix CliffordRep::product(const MultiIndex& index) const {
  validate_index(index, n);
  Matrix out = Matrix::Identity(spinor_dim(), spinor_dim());
  for (int v : index) out = out * gamma[v - 1];
  return out;
}

CliffordRep build_clifford_rep(int n) {
  if (n < 2 || n > 8 || n % 2 != 0)
    throw UnsupportedError("unsupported dimension n=" + std::to_string(n) +
                           " (even 2..8 required)");
  const int m = n / 2;
  CliffordRep rep;
  rep.n = n;
  for (int k = 0; k < m; ++k) {
    for (char which : {'x', 'y'}) {
      Matrix g = Matrix::Identity(1, 1);
      for (int slot = 0; slot < m; ++slot) {
        char p = slot < k ? 'z' : (slot == k ? which : 'i');
        g = kron(g, pauli(p));
      }
      rep.gamma.push_back(g);
    }
  }
  Matrix vol = Matrix::Identity(rep.gamma[0].rows(), rep.gamma[0].cols());
  for (const auto& g : rep.gamma) vol = vol * g;
  rep.epsilon = ipow(-kI, m) * vol;
  rep.gamma0 = kI * rep.epsilon;
  return rep;
}

std::vector<MultiIndex> all_multi_indices(int n) {
  std::vector<MultiIndex> out;
  for (unsigned mask = 0; mask < (1u << n); ++mask) {
    MultiIndex idx;
    for (int b = 0; b < n; ++b)
      if (mask & (1u << b)) idx.push_back(b + 1);
    out.push_back(idx);
  }
  std::stable_sort(out.begin(), out.end(), [](const MultiIndex& a, const MultiIndex& b) {
    if (a.size() != b.size()) return a.size() < b.size();
    return a < b;
  });
  return out;
}

Matrix form_endomorphism(const CliffordRep& rep, const std::map<MultiIndex, cd>& coeffs) {
  const int d = rep.spinor_dim();
  Matrix out = Matrix::Zero(d, d);
  for (const auto& [index, c] : coeffs) out += c * rep.product(index);
  return out;
}

std::map<MultiIndex, cd> endomorphism_coefficients(const CliffordRep& rep, const Matrix& a) {
  std::map<MultiIndex, cd> out;
  const double norm = 1.0 / rep.spinor_dim();
  for (const auto& index : all_multi_indices(rep.n))
    out[index] = norm * (rep.product(index).adjoint() * a).trace();
  return out;
}

cd volume_phase(const CliffordRep& rep) {
  MultiIndex all;
  for (int a = 1; a <= rep.n; ++a) all.push_back(a);
  // gamma0 = c * (-i)^n gamma^{1..n}
  const Matrix vol = ipow(-kI, rep.n) * rep.product(all);
  return (vol.adjoint() * rep.gamma0).trace() / cd(rep.spinor_dim());
}

Matrix gamma_along(const CliffordRep& rep, double angle) {
  return std::cos(angle) * rep.gamma[0] + std::sin(angle) * rep.gamma[1];
}

Matrix left_mult(const Matrix& m) {
  return kron(Matrix::Identity(m.rows(), m.cols()), m);
}

Matrix right_mult(const Matrix& m) {
  return kron(m.transpose(), Matrix::Identity(m.rows(), m.cols()));
}

Matrix hat_action(const CliffordRep& rep, const Matrix& gamma) {
  return -kI * right_mult(rep.epsilon * gamma) * left_mult(rep.epsilon);
}

Matrix range_basis(const Matrix& projector, double tol) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (projector + projector.adjoint()));
  std::vector<Eigen::Index> keep;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i)
    if (es.eigenvalues()(i) > 0.5 + tol)
      keep.push_back(i);
  Matrix out(projector.rows(), static_cast<Eigen::Index>(keep.size()));
  for (std::size_t k = 0; k < keep.size(); ++k) out.col(k) = es.eigenvectors().col(keep[k]);
  return out;
}

BoundaryAlgebra boundary_involution(const CliffordRep& rep, double normal_angle) {
  BoundaryAlgebra b;
  b.normal_angle = normal_angle;
  const int d = rep.spinor_dim();

  // Adapted frame: normal, rotated e_2, then e_3..e_n.
  std::vector<Matrix> adapted;
  adapted.push_back(gamma_along(rep, normal_angle));
  adapted.push_back(gamma_along(rep, normal_angle + M_PI / 2));
  for (int a = 2; a < rep.n; ++a) adapted.push_back(rep.gamma[a]);

  b.chirality = rep.gamma0 * adapted[0];
  b.T = right_mult(b.chirality) * left_mult(b.chirality);
  const int D = d * d;
  const Matrix id = Matrix::Identity(D, D);
  b.pi_plus = 0.5 * (id + b.T);
  b.pi_minus = 0.5 * (id - b.T);
  b.plus_basis = range_basis(b.pi_plus);
  b.minus_basis = range_basis(b.pi_minus);

  b.gamma_n = left_mult(adapted[0]);
  b.gamma_n_hat = hat_action(rep, adapted[0]);
  for (std::size_t a = 1; a < adapted.size(); ++a) {
    b.gamma_t.push_back(left_mult(adapted[a]));
    b.gamma_t_hat.push_back(hat_action(rep, adapted[a]));
  }
  for (const auto& g : adapted) {
    const Matrix left = left_mult(g);
    const Matrix hat = hat_action(rep, g);
    b.ext.push_back(0.5 * (hat - kI * left));
    b.intr.push_back(0.5 * (hat + kI * left));
  }

  b.form_labels = all_multi_indices(rep.n);
  b.form_basis.resize(D, D);
  for (std::size_t k = 0; k < b.form_labels.size(); ++k) {
    Matrix e = Matrix::Identity(d, d);
    for (int v : b.form_labels[k]) e = e * adapted[v - 1];
    e *= ipow(-kI, static_cast<int>(b.form_labels[k].size()));
    b.form_basis.col(static_cast<Eigen::Index>(k)) =
        Eigen::Map<const Eigen::VectorXcd>(e.data(), D) / std::sqrt(double(d));
  }
  return b;
}

ChiralityProjectors chirality_projectors(const CliffordRep& rep, double normal_angle) {
  const Matrix x = rep.gamma0 * gamma_along(rep, normal_angle);
  const Matrix id = Matrix::Identity(rep.spinor_dim(), rep.spinor_dim());
  return {0.5 * (id + x), 0.5 * (id - x)};
}

}  // namespace qle::clifford
