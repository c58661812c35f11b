// SPDX-License-Identifier: Apache-2.0
//
// Finite-difference Dirac-type operators on a DiscreteDomain (n = 2).
// Unknowns are ordered node-major: index = node * fiber_dim + component.

#pragma once

#include <array>
#include <string>
#include <vector>

#include <Eigen/Sparse>

#include "clifford.hpp"
#include "geometry.hpp"

namespace qle::dirac {

using clifford::cd;
using clifford::Matrix;
using SpMat = Eigen::SparseMatrix<cd, Eigen::ColMajor, long>;
using Vec = Eigen::VectorXcd;

enum class Path { Spinor, Twisted };

/// How the Clifford algebra acts on one fiber. Spinor: S itself. Twisted: End(S)
/// with left multiplication, plus the background action gamma_hat.
struct FiberAction {
  Path path = Path::Twisted;
  clifford::CliffordRep rep;
  int dim = 0;
  double kappa = 1.0;  // pointwise inner product is kappa * (Euclidean)
  std::array<Matrix, 2> gamma;
  Matrix g12;  // gamma^1 gamma^2
  Matrix id;

  Matrix gamma_along(double angle) const;
  Matrix hat_along(double angle) const;  // twisted only
};

FiberAction fiber_action(const clifford::CliffordRep& rep, Path path);

struct SpinorField {
  Vec values;
  int fiber_dim = 0;
  std::string gauge = "cartesian";

  /// Throws ValidationError on NaN/Inf or size mismatch.
  static SpinorField make(Vec values, int fiber_dim, int nodes);
};

enum class OperatorKind { DiracInterior, BoundaryConstraint, TangentialDirac, CovariantDerivative, Stabilizer };

struct DiscreteOperator {
  SpMat matrix;
  OperatorKind kind = OperatorKind::DiracInterior;
  int fiber_dim = 0;
  std::vector<int> row_nodes;  // node index of each row block
};

/// nabla_sigma for sigma = 1, 2 at every node; one-sided radial stencils on boundary rings.
std::array<DiscreteOperator, 2> assemble_covariant_derivative(const geometry::DiscreteDomain& domain,
                                                              const FiberAction& fiber);

/// D = -i sum_sigma gamma^sigma nabla_sigma at every node.
DiscreteOperator assemble_dirac(const geometry::DiscreteDomain& domain, const FiberAction& fiber);

/// Flux-form discretization of D^2 = nabla^* nabla + R/4 on non-boundary rings; zero rows elsewhere.
DiscreteOperator assemble_stabilizer(const geometry::DiscreteDomain& domain, const FiberAction& fiber);

/// nabla_{e_n} at the nodes of one boundary component (rows ordered as the component's nodes).
DiscreteOperator assemble_normal_derivative(const geometry::DiscreteDomain& domain, const FiberAction& fiber,
                                            const geometry::BoundaryComponent& comp);

/// Tangential Dirac operator -gamma^n gamma^t nabla_t - H/2 + (A_hat/2) gamma^n gamma^t gamma_hat^n gamma_hat^t
/// on one boundary component. The background term is present on the twisted path only.
DiscreteOperator assemble_tangential_dirac(const geometry::DiscreteDomain& domain, const FiberAction& fiber,
                                           const geometry::BoundaryComponent& comp);

/// Clifford multiplication by the inward normal at each node of a component.
std::vector<Matrix> normal_gammas(const geometry::DiscreteDomain& domain, const FiberAction& fiber,
                                  const geometry::BoundaryComponent& comp);

/// Boundary condition at every boundary node.
struct BoundaryCondition {
  enum class Kind { PiPlus, Chirality };
  Kind kind = Kind::PiPlus;
  int sign = +1;  // chirality: +1 imposes P_+, -1 imposes P_-
  Vec data;       // full-length field; only boundary nodes are read
};

struct BoundaryRows {
  DiscreteOperator op;  // data rows then closure rows per boundary node
  Vec rhs;
  std::vector<bool> is_data_row;
  std::vector<int> row_node;
};

/// Projected data rows B^H psi = B^H data and closure rows B^H (D psi) = 0 with B an
/// orthonormal basis of Im(pi_+) (twisted) or Im(P_sign) (spinor).
BoundaryRows assemble_boundary_rows(const geometry::DiscreteDomain& domain, const FiberAction& fiber,
                                    const BoundaryCondition& cond, const DiscreteOperator& dirac);

/// Orthonormal basis of the imposed projector range at one boundary node.
Matrix boundary_basis(const FiberAction& fiber, double normal_angle, BoundaryCondition::Kind kind, int sign);

// ---- discrete integrals ----

cd l2_inner(const geometry::DiscreteDomain& domain, const FiberAction& fiber, const Vec& a, const Vec& b);
cd boundary_inner(const geometry::DiscreteDomain& domain, const FiberAction& fiber,
                  const geometry::BoundaryComponent& comp, const Vec& a_rows, const Vec& b_rows);
/// Restriction of a field to the nodes of a component.
Vec restrict_to(const geometry::BoundaryComponent& comp, int fiber_dim, const Vec& field);

/// |int <D psi1, psi2> - int <psi1, D psi2> + i int_{dN} <psi1, gamma^n psi2>|
double green_residual(const geometry::DiscreteDomain& domain, const FiberAction& fiber, const Vec& psi1,
                      const Vec& psi2);

/// |int <D^2 psi, psi> - int |nabla psi|^2 - int (R/4)|psi|^2 - int_{dN} <nabla_n psi, psi>|
double lichnerowicz_residual(const geometry::DiscreteDomain& domain, const FiberAction& fiber, const Vec& psi);

/// int sum_sigma |nabla_sigma psi|^2 + (R/4)|psi|^2 as a Hermitian form evaluated on (a, b).
cd bulk_form(const geometry::DiscreteDomain& domain, const FiberAction& fiber,
             const std::array<DiscreteOperator, 2>& nabla, const Vec& a, const Vec& b);

/// Constant field equal to v at every node.
Vec constant_field(int nodes, const Vec& v);

}  // namespace qle::dirac
