// SPDX-License-Identifier: Apache-2.0
//
// Constrained Dirac boundary value problem, kernel handling and energy evaluation.

#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "closed_form.hpp"
#include "dirac.hpp"
#include "geometry.hpp"

namespace qle::bvp {

using dirac::BoundaryCondition;
using dirac::cd;
using dirac::FiberAction;
using dirac::SpMat;
using dirac::Vec;
using geometry::DiscreteDomain;

enum class Method { BoundaryFormula, NormalDerivative, Bulk, ClosedForm };
enum class PathChoice { Auto, Spinor, Twisted };

const char* method_name(Method m);
Method parse_method(const std::string& s);
const char* path_name(PathChoice p);
PathChoice parse_path(const std::string& s);

struct SolverOptions {
  int kernel_vectors = 6;
  int inverse_iterations = 12;
  double kernel_candidate = 0.05;  // singular values below this may belong to the kernel
  double kernel_gap = 100.0;       // required separation factor around the threshold
  double threshold_floor = 1e-8;
  double dirac_tol = 1e-6;
  double boundary_tol = 1e-8;
  double form_tol = 1e-8;          // relative zero level for the kernel quadratic form
  std::uint64_t seed = 1;
  double gauge_angle = 0.0;
};

/// Square system [sqrt(w) (D + i h/2 D^2) on interior nodes; boundary rows] in the
/// unknown y = sqrt(kappa w) psi, with a CHOLMOD factorization of its normal matrix.
class System {
 public:
  System(const DiscreteDomain& domain, FiberAction fiber, BoundaryCondition::Kind kind, int sign = +1);
  ~System();
  System(System&&) noexcept;
  System(const System&) = delete;
  System& operator=(const System&) = delete;

  const DiscreteDomain& domain() const { return *domain_; }
  const FiberAction& fiber() const { return fiber_; }
  BoundaryCondition::Kind kind() const { return kind_; }
  int sign() const { return sign_; }
  const SpMat& matrix() const { return A_; }
  long unknowns() const { return A_.cols(); }

  /// Scaled right-hand side for a boundary data field.
  Vec rhs(const Vec& data) const;
  Vec to_field(const Vec& y) const;
  Vec from_field(const Vec& psi) const;
  /// (A^H A + mu)^{-1} applied columnwise.
  Eigen::MatrixXcd solve_normal(const Eigen::MatrixXcd& b) const;
  /// (A A^H + mu)^{-1} applied columnwise.
  Eigen::MatrixXcd solve_normal_left(const Eigen::MatrixXcd& b) const;
  /// Solves A y + U lambda = b, V^H y = 0 for kernel coordinates V and cokernel basis U.
  Vec solve_bordered(const Eigen::MatrixXcd& V, const Eigen::MatrixXcd& U, const Vec& b) const;
  /// Rows carrying Dirac equations (interior and closure rows) versus data rows.
  const std::vector<bool>& dirac_row() const { return dirac_row_; }

 private:
  struct Factor;
  struct Bordered;
  Bordered& bordered(const Eigen::MatrixXcd& V, const Eigen::MatrixXcd& U) const;
  const DiscreteDomain* domain_;
  FiberAction fiber_;
  BoundaryCondition::Kind kind_;
  int sign_;
  SpMat A_;
  SpMat data_rows_;  // maps a data field to the scaled data rows
  Eigen::VectorXd col_scale_;
  std::vector<bool> dirac_row_;
  double border_scale_ = 1.0;
  std::unique_ptr<Factor> factor_;
  mutable std::unique_ptr<Bordered> bordered_;
};

struct KernelInfo {
  int dim = 0;
  std::vector<Vec> basis;               // L2-orthonormal fields
  std::vector<double> singular_values;  // smallest few, ascending
  double threshold = 0.0;
  double gap_ratio = 0.0;
  bool ambiguous = false;
  Eigen::MatrixXcd coords;  // basis in scaled unknowns
  Eigen::MatrixXcd left;    // matching left singular vectors
};

KernelInfo kernel_basis(const System& system, const SolverOptions& opts = {});

struct BoundaryData {
  std::vector<std::string> components;
  Vec values;  // full-length field; zero off the boundary
  bool modified = false;
  double removed_norm = 0.0;
};

/// value at every node of the named components, zero elsewhere.
BoundaryData unit_data(const DiscreteDomain& domain, const FiberAction& fiber,
                       const std::vector<std::string>& components, const Vec& value);

/// Removes the boundary L2 projection onto the traces gamma^n eta of the kernel fields.
BoundaryData project_boundary_data(const DiscreteDomain& domain, const FiberAction& fiber, const BoundaryData& raw,
                                   const KernelInfo& kernel);

struct Solution {
  Vec psi;
  double dirac_residual = 0.0;
  double boundary_residual = 0.0;
  double cokernel_defect = 0.0;
};

/// Minimum-norm least-squares solution orthogonal to the kernel. Throws SolverError
/// when the residual contract is not met.
Solution solve_bvp(const System& system, const BoundaryData& data, const KernelInfo& kernel,
                   const SolverOptions& opts = {});

double energy_boundary(const DiscreteDomain& domain, const FiberAction& fiber, const Vec& psi);
double energy_normal_derivative(const DiscreteDomain& domain, const FiberAction& fiber, const Vec& psi);
double energy_bulk(const DiscreteDomain& domain, const FiberAction& fiber, const Vec& psi);

struct MinimizeResult {
  bool neg_inf = false;
  bool flagged = false;
  Vec psi;
  double energy = 0.0;  // bulk form at the minimizer
  Eigen::MatrixXd Q;
  Eigen::VectorXd linear;
  Eigen::VectorXd coefficients;  // real coordinates (eta_j, i eta_j)
  std::vector<double> eigenvalues;
};

/// Minimizes the bulk form over particular + span(kernel).
MinimizeResult minimize_energy(const DiscreteDomain& domain, const FiberAction& fiber, const Vec& particular,
                               const KernelInfo& kernel, const SolverOptions& opts = {});

struct EnergyReport {
  double energy = 0.0;
  bool neg_inf = false;
  bool flagged = false;
  Method method = Method::Bulk;
  PathChoice path_used = PathChoice::Twisted;
  KernelInfo kernel;
  double brown_york = 0.0;
  std::optional<closed_form::ClosedFormResult> closed_form;
  std::map<std::string, double> method_values;
  std::map<std::string, double> cross_check_deltas;
  std::map<std::string, double> residuals;
  std::map<std::string, double> spinor_values;  // spinor decomposition, per method
  geometry::Resolution resolution;
  double runtime_seconds = 0.0;
  bool data_modified = false;
  std::vector<std::string> notes;
};

EnergyReport quasilocal_energy(const geometry::MetricSpec& spec, const std::vector<std::string>& C,
                               geometry::Resolution res, PathChoice path = PathChoice::Auto,
                               Method method = Method::Bulk, const SolverOptions& opts = {});

}  // namespace qle::bvp
