// SPDX-License-Identifier: Apache-2.0
//
// Finite-dimensional Clifford algebra for even n: gamma matrices, the grading,
// the form <-> endomorphism dictionary, and the boundary involution acting on
// the twisted fiber End(S).

#pragma once

#include <complex>
#include <map>
#include <vector>

#include <Eigen/Dense>

namespace qle::clifford {

using cd = std::complex<double>;
using Matrix = Eigen::MatrixXcd;

/// Increasing 1-based multi-index; the empty index is the scalar 1.
using MultiIndex = std::vector<int>;

struct CliffordRep {
  int n = 0;
  std::vector<Matrix> gamma;  // gamma[a] is Clifford multiplication by e_{a+1}
  Matrix epsilon;             // Z2 grading, epsilon = (-i)^{n/2} gamma^1...gamma^n
  Matrix gamma0;              // i * epsilon

  int spinor_dim() const { return static_cast<int>(epsilon.rows()); }
  int twisted_dim() const { return spinor_dim() * spinor_dim(); }

  /// gamma^{i1} gamma^{i2} ... for an increasing multi-index.
  Matrix product(const MultiIndex& index) const;
};

/// Builds the rep by iterated Pauli tensor products (Jordan-Wigner).
/// Throws UnsupportedError unless n is even with 2 <= n <= 8.
CliffordRep build_clifford_rep(int n);

/// All 2^n increasing multi-indices over 1..n, ordered by degree then lexicographically.
std::vector<MultiIndex> all_multi_indices(int n);

/// Sum_I coeffs(I) gamma^I. Throws ValidationError on a malformed index.
Matrix form_endomorphism(const CliffordRep& rep,
                         const std::map<MultiIndex, cd>& coeffs);

/// Inverse of form_endomorphism through the trace pairing 2^{-n/2} tr(gamma^{I,dagger} A).
std::map<MultiIndex, cd> endomorphism_coefficients(const CliffordRep& rep,
                                                   const Matrix& a);

/// Unit phase c with gamma^0 = c * (tau^1 ^ ... ^ tau^n) in the form picture,
/// where tau^I corresponds to (-i)^{|I|} gamma^I.
cd volume_phase(const CliffordRep& rep);

/// Gamma matrix for the unit vector (cos angle) e_1 + (sin angle) e_2.
Matrix gamma_along(const CliffordRep& rep, double angle);

// --- twisted fiber End(S), vectorized column-major ---

/// Left multiplication A -> M A on vec(A).
Matrix left_mult(const Matrix& m);
/// Right multiplication A -> A M on vec(A).
Matrix right_mult(const Matrix& m);

/// Operators on the twisted fiber at a boundary point whose inward normal is
/// (cos angle) e_1 + (sin angle) e_2. Tangential directions are the rotated
/// e_2 together with e_3..e_n.
struct BoundaryAlgebra {
  double normal_angle = 0.0;
  Matrix chirality;              // X = gamma^0 gamma^n on S
  Matrix T;                      // A -> X A X
  Matrix pi_plus, pi_minus;      // (1 +- T)/2
  Matrix gamma_n;                // left multiplication by gamma^n
  Matrix gamma_n_hat;            // background Clifford action by the normal
  std::vector<Matrix> gamma_t;   // left multiplication, tangential directions
  std::vector<Matrix> gamma_t_hat;
  std::vector<Matrix> ext, intr; // E^i, I^i in the adapted frame; index 0 is the normal
  Matrix plus_basis;             // orthonormal columns spanning Im(pi_plus)
  Matrix minus_basis;
  Matrix form_basis;             // columns vec((-i)^{|I|} gamma_adapted^I), adapted frame
  std::vector<MultiIndex> form_labels;  // index 1 is the normal direction
};

/// Background Clifford action gamma_hat^a(A) = -i eps A eps gamma^a, odd with
/// respect to left multiplication.
Matrix hat_action(const CliffordRep& rep, const Matrix& gamma);

BoundaryAlgebra boundary_involution(const CliffordRep& rep, double normal_angle);

struct ChiralityProjectors {
  Matrix plus, minus;
};

/// P_{+-} = (I +- gamma^0 gamma^n)/2 on the spinor module.
ChiralityProjectors chirality_projectors(const CliffordRep& rep, double normal_angle);

/// Orthonormal basis (columns) of the range of a Hermitian projector.
Matrix range_basis(const Matrix& projector, double tol = 1e-10);

}  // namespace qle::clifford
