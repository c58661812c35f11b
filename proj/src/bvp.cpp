// SPDX-License-Identifier: Apache-2.0

#include "bvp.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <random>

#include <Eigen/CholmodSupport>
#include <Eigen/UmfPackSupport>

#include "errors.hpp"

namespace qle::bvp {

using dirac::DiscreteOperator;
using dirac::Matrix;
using geometry::BoundaryComponent;

namespace {

const cd kI(0.0, 1.0);
using Triplet = Eigen::Triplet<cd, long>;
using RowMat = Eigen::SparseMatrix<cd, Eigen::RowMajor, long>;

Eigen::MatrixXcd orthonormalize(const Eigen::MatrixXcd& m) {
  Eigen::HouseholderQR<Eigen::MatrixXcd> qr(m);
  return qr.householderQ() * Eigen::MatrixXcd::Identity(m.rows(), m.cols());
}

cd boundary_dot(const DiscreteDomain& d, const FiberAction& f, const Vec& a, const Vec& b) {
  cd s = 0.0;
  const int fd = f.dim;
  for (const auto& comp : d.boundary)
    for (std::size_t m = 0; m < comp.nodes.size(); ++m) {
      const Eigen::Index k = static_cast<Eigen::Index>(comp.nodes[m]) * fd;
      s += comp.ds[m] * a.segment(k, fd).dot(b.segment(k, fd));
    }
  return f.kappa * s;
}

std::vector<std::string> all_components(const DiscreteDomain& d) {
  std::vector<std::string> out;
  for (const auto& c : d.boundary) out.push_back(c.name);
  return out;
}

}  // namespace

const char* method_name(Method m) {
  switch (m) {
    case Method::BoundaryFormula: return "boundary_formula";
    case Method::NormalDerivative: return "normal_derivative";
    case Method::Bulk: return "bulk";
    case Method::ClosedForm: return "closed_form";
  }
  return "";
}

Method parse_method(const std::string& s) {
  for (Method m : {Method::BoundaryFormula, Method::NormalDerivative, Method::Bulk, Method::ClosedForm})
    if (s == method_name(m)) return m;
  throw ValidationError("unknown energy method '" + s + "'");
}

const char* path_name(PathChoice p) {
  switch (p) {
    case PathChoice::Auto: return "auto";
    case PathChoice::Spinor: return "spinor";
    case PathChoice::Twisted: return "twisted";
  }
  return "";
}

PathChoice parse_path(const std::string& s) {
  for (PathChoice p : {PathChoice::Auto, PathChoice::Spinor, PathChoice::Twisted})
    if (s == path_name(p)) return p;
  throw ValidationError("unknown path '" + s + "'");
}

// ---------------- system ----------------

struct System::Factor {
  using Llt = Eigen::CholmodSupernodalLLT<Eigen::SparseMatrix<cd, Eigen::ColMajor, int>, Eigen::Lower>;
  Llt right;  // A^H A + mu
  Llt left;   // A A^H + mu
};

// Square system bordered by dense kernel and cokernel bases, factored as a sparse
// border on pivot entries plus a rank 2k correction.
struct System::Bordered {
  using IntMat = Eigen::SparseMatrix<cd, Eigen::ColMajor, int>;
  IntMat M;  // the LU keeps a reference
  Eigen::UmfPackLU<IntMat> lu;
  Eigen::MatrixXcd V, U, Vd, Z;
  Eigen::PartialPivLU<Eigen::MatrixXcd> capacitance;
  std::vector<long> p, q;
};

System::System(System&&) noexcept = default;
System::~System() = default;

System::System(const DiscreteDomain& d, FiberAction f, BoundaryCondition::Kind kind, int sign)
    : domain_(&d), fiber_(std::move(f)), kind_(kind), sign_(sign) {
  const int fd = fiber_.dim;
  const long N = d.grid.nodes();
  const long n = N * fd;
  const double h = d.grid.hr;

  const DiscreteOperator D = dirac::assemble_dirac(d, fiber_);
  const SpMat L = dirac::assemble_stabilizer(d, fiber_).matrix;
  const RowMat W = SpMat(D.matrix + cd(0.0, 0.5 * h) * L);

  BoundaryCondition bc;
  bc.kind = kind;
  bc.sign = sign;
  bc.data = Vec::Zero(n);
  const dirac::BoundaryRows rows = dirac::assemble_boundary_rows(d, fiber_, bc, D);
  const RowMat B = rows.op.matrix;

  col_scale_.resize(n);
  for (long k = 0; k < N; ++k)
    for (int a = 0; a < fd; ++a) col_scale_(k * fd + a) = 1.0 / std::sqrt(fiber_.kappa * d.weight[k]);

  std::vector<Triplet> trip, dtrip;
  trip.reserve(static_cast<std::size_t>(W.nonZeros() + B.nonZeros()));
  long row = 0;
  for (long k = 0; k < N; ++k) {
    if (d.grid.boundary_ring(static_cast<int>(k / d.grid.nt))) continue;
    const double s = std::sqrt(d.weight[k]);
    for (int a = 0; a < fd; ++a, ++row) {
      for (RowMat::InnerIterator it(W, k * fd + a); it; ++it)
        trip.emplace_back(row, it.col(), s * it.value() * col_scale_(it.col()));
      dirac_row_.push_back(true);
    }
  }
  std::vector<double> ds_of(N, 0.0);
  for (const auto& comp : d.boundary)
    for (std::size_t m = 0; m < comp.nodes.size(); ++m) ds_of[comp.nodes[m]] = comp.ds[m];
  for (long q = 0; q < B.rows(); ++q, ++row) {
    const double ds = ds_of[rows.row_node[q]];
    const bool is_data = rows.is_data_row[q];
    const double s = is_data ? std::sqrt(ds / h) : std::sqrt(ds * h);
    for (RowMat::InnerIterator it(B, q); it; ++it) {
      trip.emplace_back(row, it.col(), s * it.value() * col_scale_(it.col()));
      if (is_data) dtrip.emplace_back(row, it.col(), s * it.value());
    }
    dirac_row_.push_back(!is_data);
  }
  if (row != n) throw SolverError("constrained system is not square", 0.0, 0.0);
  A_.resize(n, n);
  A_.setFromTriplets(trip.begin(), trip.end());
  data_rows_.resize(n, n);
  data_rows_.setFromTriplets(dtrip.begin(), dtrip.end());

  const SpMat Ah = A_.adjoint();
  SpMat normal = Ah * A_;
  SpMat normal_left = A_ * Ah;
  double mean_diag = 0.0;
  for (long i = 0; i < n; ++i) mean_diag += std::abs(normal.coeff(i, i));
  mean_diag /= static_cast<double>(n);
  border_scale_ = std::sqrt(mean_diag);
  SpMat shift(n, n);
  shift.setIdentity();
  normal += (1e-12 * mean_diag) * shift;
  normal_left += (1e-12 * mean_diag) * shift;
  factor_ = std::make_unique<Factor>();
  factor_->right.compute(Eigen::SparseMatrix<cd, Eigen::ColMajor, int>(normal));
  factor_->left.compute(Eigen::SparseMatrix<cd, Eigen::ColMajor, int>(normal_left));
  if (factor_->right.info() != Eigen::Success || factor_->left.info() != Eigen::Success)
    throw SolverError("Cholesky factorization of the normal equations failed", 0.0, 0.0);
}

Vec System::rhs(const Vec& data) const {
  if (data.size() != A_.cols()) throw ValidationError("boundary data has the wrong length");
  return data_rows_ * data;
}

Vec System::to_field(const Vec& y) const { return col_scale_.cwiseProduct(y); }

Vec System::from_field(const Vec& psi) const { return psi.cwiseQuotient(col_scale_.cast<cd>()); }

Eigen::MatrixXcd System::solve_normal(const Eigen::MatrixXcd& b) const { return factor_->right.solve(b); }

Eigen::MatrixXcd System::solve_normal_left(const Eigen::MatrixXcd& b) const { return factor_->left.solve(b); }

namespace {

// k row indices where the columns of B are jointly best conditioned
std::vector<long> pivot_rows(const Eigen::MatrixXcd& B) {
  const Eigen::MatrixXcd Bh = B.adjoint();
  Eigen::ColPivHouseholderQR<Eigen::MatrixXcd> qr(Bh);
  std::vector<long> out;
  for (long j = 0; j < B.cols(); ++j) out.push_back(qr.colsPermutation().indices()(j));
  return out;
}

}  // namespace

System::Bordered& System::bordered(const Eigen::MatrixXcd& V, const Eigen::MatrixXcd& U) const {
  if (bordered_ && bordered_->V.cols() == V.cols() && bordered_->U.cols() == U.cols() && bordered_->V == V &&
      bordered_->U == U)
    return *bordered_;
  const long n = A_.rows();
  const long k = V.cols();
  const double s = border_scale_;
  auto b = std::make_unique<Bordered>();
  b->V = V;
  b->U = U;
  b->p = pivot_rows(U);
  b->q = pivot_rows(V);

  std::vector<Eigen::Triplet<cd, int>> trip;
  trip.reserve(static_cast<std::size_t>(A_.nonZeros() + 2 * k));
  for (long c = 0; c < A_.outerSize(); ++c)
    for (SpMat::InnerIterator it(A_, c); it; ++it)
      trip.emplace_back(static_cast<int>(it.row()), static_cast<int>(it.col()), it.value());
  for (long j = 0; j < k; ++j) {
    trip.emplace_back(static_cast<int>(b->p[j]), static_cast<int>(n + j), s);
    trip.emplace_back(static_cast<int>(n + j), static_cast<int>(b->q[j]), s);
  }
  b->M.resize(n + k, n + k);
  b->M.setFromTriplets(trip.begin(), trip.end());
  b->lu.compute(b->M);
  if (b->lu.info() != Eigen::Success) throw SolverError("bordered factorization failed", 0.0, 0.0);

  // exact border = sparse border + P Q^H
  Eigen::MatrixXcd P = Eigen::MatrixXcd::Zero(n + k, 2 * k);
  Eigen::MatrixXcd Vd = s * V, Ud = s * U;
  for (long j = 0; j < k; ++j) {
    Ud(b->p[j], j) -= s;
    Vd(b->q[j], j) -= s;
  }
  P.topLeftCorner(n, k) = Ud;
  P.bottomRightCorner(k, k).setIdentity();
  b->Z = b->lu.solve(P);
  b->Vd = Vd;
  Eigen::MatrixXcd C = Eigen::MatrixXcd::Identity(2 * k, 2 * k);
  C.topRows(k) += b->Z.bottomRows(k);
  C.bottomRows(k) += Vd.adjoint() * b->Z.topRows(n);
  b->capacitance.compute(C);
  bordered_ = std::move(b);
  return *bordered_;
}

Vec System::solve_bordered(const Eigen::MatrixXcd& V, const Eigen::MatrixXcd& U, const Vec& b) const {
  const long n = A_.rows();
  const long k = V.cols();
  const double s = border_scale_;
  auto apply = [&](const Vec& x) {
    Vec out(n + k);
    out.head(n) = A_ * x.head(n) + s * (U * x.tail(k));
    out.tail(k) = s * (V.adjoint() * x.head(n));
    return out;
  };
  if (k == 0) {
    Vec rhs = b;
    Eigen::UmfPackLU<Eigen::SparseMatrix<cd, Eigen::ColMajor, int>> lu;
    const Eigen::SparseMatrix<cd, Eigen::ColMajor, int> A = A_;
    lu.compute(A);
    if (lu.info() != Eigen::Success) throw SolverError("factorization failed", 0.0, 0.0);
    Vec x = lu.solve(rhs);
    x += lu.solve(Vec(rhs - A_ * x));
    return x;
  }
  const Bordered& f = bordered(V, U);
  auto solve = [&](const Vec& r) {
    Vec x = f.lu.solve(r);
    Vec qx(2 * k);
    qx.head(k) = x.tail(k);
    qx.tail(k) = f.Vd.adjoint() * x.head(n);
    x -= f.Z * f.capacitance.solve(qx);
    return x;
  };
  Vec rhs = Vec::Zero(n + k);
  rhs.head(n) = b;
  Vec x = solve(rhs);
  for (int it = 0; it < 2; ++it) x += solve(Vec(rhs - apply(x)));
  return x.head(n);
}

// ---------------- kernel ----------------

KernelInfo kernel_basis(const System& sys, const SolverOptions& opts) {
  const long n = sys.unknowns();
  const int p = static_cast<int>(std::min<long>(opts.kernel_vectors, n));
  std::mt19937_64 rng(opts.seed);
  std::normal_distribution<double> nd;
  Eigen::MatrixXcd V(n, p);
  for (long i = 0; i < n; ++i)
    for (int j = 0; j < p; ++j) V(i, j) = cd(nd(rng), nd(rng));
  V = orthonormalize(V);
  Eigen::MatrixXcd U(n, p);
  for (long i = 0; i < n; ++i)
    for (int j = 0; j < p; ++j) U(i, j) = cd(nd(rng), nd(rng));
  U = orthonormalize(U);
  for (int it = 0; it < opts.inverse_iterations; ++it) {
    V = orthonormalize(sys.solve_normal(V));
    U = orthonormalize(sys.solve_normal_left(U));
  }

  // Rayleigh-Ritz on A V
  const Eigen::MatrixXcd AV = sys.matrix() * V;
  Eigen::HouseholderQR<Eigen::MatrixXcd> qr(AV);
  const Eigen::MatrixXcd Q = qr.householderQ() * Eigen::MatrixXcd::Identity(n, p);
  const Eigen::MatrixXcd R = Q.adjoint() * AV;
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(R, Eigen::ComputeFullV);
  // ascending order
  std::vector<int> order(p);
  for (int j = 0; j < p; ++j) order[j] = p - 1 - j;

  KernelInfo info;
  Eigen::MatrixXcd Vs(n, p);
  for (int j = 0; j < p; ++j) {
    info.singular_values.push_back(svd.singularValues()(order[j]));
    Vs.col(j) = V * svd.matrixV().col(order[j]);
  }
  const auto& s = info.singular_values;

  // largest candidate index followed by a clear gap; otherwise the largest gap
  int dim = 0, best_dim = 0;
  double best = 0.0, gap = 0.0;
  for (int k = 0; k + 1 < p; ++k) {
    if (s[k] >= opts.kernel_candidate) break;
    const double ratio = s[k + 1] / std::max(s[k], 1e-300);
    if (ratio >= opts.kernel_gap) {
      dim = k + 1;
      gap = ratio;
    }
    if (ratio > best) {
      best = ratio;
      best_dim = k + 1;
    }
  }
  if (dim == 0) {
    dim = best_dim;
    gap = best;
  }
  if (dim > 0) {
    info.threshold = std::max(opts.threshold_floor, std::sqrt(s[dim - 1] * s[dim]));
    info.gap_ratio = gap;
  } else {
    info.threshold = std::max(opts.threshold_floor, std::min(opts.kernel_candidate, s[0]) / 10.0);
    info.gap_ratio = s[0] / info.threshold;
  }
  for (int k = 0; k < p; ++k) dim = std::max(dim, s[k] <= opts.threshold_floor ? k + 1 : 0);
  info.dim = dim;
  info.ambiguous = info.gap_ratio < opts.kernel_gap;
  if (dim == p) info.ambiguous = true;
  info.coords = Vs.leftCols(dim);
  if (dim > 0) {
    // left singular vectors from A^H U, in the same ascending order
    const Eigen::MatrixXcd AhU = sys.matrix().adjoint() * U;
    Eigen::HouseholderQR<Eigen::MatrixXcd> lqr(AhU);
    const Eigen::MatrixXcd LQ = lqr.householderQ() * Eigen::MatrixXcd::Identity(n, p);
    Eigen::JacobiSVD<Eigen::MatrixXcd> lsvd(LQ.adjoint() * AhU, Eigen::ComputeFullV);
    info.left = U * lsvd.matrixV().rightCols(dim).rowwise().reverse();
  } else {
    info.left = Eigen::MatrixXcd(n, 0);
  }
  for (int j = 0; j < dim; ++j) info.basis.push_back(sys.to_field(Vs.col(j)));
  return info;
}

// ---------------- boundary data ----------------

BoundaryData unit_data(const DiscreteDomain& d, const FiberAction& f, const std::vector<std::string>& components,
                       const Vec& value) {
  if (components.empty()) throw ValidationError("boundary component set must be nonempty");
  if (value.size() != f.dim) throw ValidationError("boundary value has the wrong fiber dimension");
  BoundaryData out;
  out.components = components;
  out.values = Vec::Zero(static_cast<Eigen::Index>(d.grid.nodes()) * f.dim);
  for (const auto& name : components) {
    const BoundaryComponent& comp = d.component(name);
    for (int k : comp.nodes) out.values.segment(static_cast<Eigen::Index>(k) * f.dim, f.dim) = value;
  }
  return out;
}

BoundaryData project_boundary_data(const DiscreteDomain& d, const FiberAction& f, const BoundaryData& raw,
                                   const KernelInfo& kernel) {
  BoundaryData out = raw;
  const int fd = f.dim;
  std::vector<Vec> q;
  for (const Vec& eta : kernel.basis) {
    Vec t = Vec::Zero(eta.size());
    for (const auto& comp : d.boundary) {
      const auto gn = dirac::normal_gammas(d, f, comp);
      for (std::size_t m = 0; m < comp.nodes.size(); ++m) {
        const Eigen::Index k = static_cast<Eigen::Index>(comp.nodes[m]) * fd;
        t.segment(k, fd) = gn[m] * eta.segment(k, fd);
      }
    }
    for (const Vec& e : q) t -= boundary_dot(d, f, e, t) * e;
    const double nrm = std::sqrt(std::abs(boundary_dot(d, f, t, t)));
    if (nrm > 1e-12) q.push_back(t / nrm);
  }
  Vec removed = Vec::Zero(raw.values.size());
  for (const Vec& e : q) removed += boundary_dot(d, f, e, raw.values) * e;
  out.removed_norm = std::sqrt(std::abs(boundary_dot(d, f, removed, removed)));
  out.modified = out.removed_norm > 1e-10;
  if (out.modified) out.values -= removed;
  return out;
}

// ---------------- solve ----------------

Solution solve_bvp(const System& sys, const BoundaryData& data, const KernelInfo& kernel, const SolverOptions& opts) {
  const Vec b = sys.rhs(data.values);
  const double bnorm = b.norm();
  Solution sol;
  if (bnorm == 0.0) {
    sol.psi = Vec::Zero(b.size());
    return sol;
  }
  Vec bbar = b;
  if (kernel.dim > 0) {
    const Vec c = kernel.left.adjoint() * b;
    bbar -= kernel.left * c;
    sol.cokernel_defect = c.norm() / bnorm;
  }
  const SpMat& A = sys.matrix();
  Vec y = sys.solve_bordered(kernel.coords, kernel.left, bbar);
  if (kernel.dim > 0) y -= kernel.coords * (kernel.coords.adjoint() * y);
  const Vec r = bbar - A * y;
  double rd = 0.0, rb = 0.0;
  for (long i = 0; i < r.size(); ++i) (sys.dirac_row()[i] ? rd : rb) += std::norm(r(i));
  sol.dirac_residual = std::sqrt(rd) / bnorm;
  sol.boundary_residual = std::sqrt(rb) / bnorm;
  sol.psi = sys.to_field(y);
  if (sol.dirac_residual > opts.dirac_tol || sol.boundary_residual > opts.boundary_tol)
    throw SolverError("least-squares solve did not meet the residual tolerance", sol.dirac_residual,
                      sol.boundary_residual);
  return sol;
}

// ---------------- energies ----------------

double energy_normal_derivative(const DiscreteDomain& d, const FiberAction& f, const Vec& psi) {
  double e = 0.0;
  for (const auto& comp : d.boundary) {
    const Vec dn = dirac::assemble_normal_derivative(d, f, comp).matrix * psi;
    e -= dirac::boundary_inner(d, f, comp, dirac::restrict_to(comp, f.dim, psi), dn).real();
  }
  return e;
}

double energy_boundary(const DiscreteDomain& d, const FiberAction& f, const Vec& psi) {
  const int fd = f.dim;
  double e = 0.0;
  for (const auto& comp : d.boundary) {
    const Vec tr = dirac::restrict_to(comp, fd, psi);
    const Vec Dt = dirac::assemble_tangential_dirac(d, f, comp).matrix * psi;
    e -= dirac::boundary_inner(d, f, comp, tr, Dt).real();
    for (std::size_t m = 0; m < comp.nodes.size(); ++m) {
      const Vec v = tr.segment(static_cast<Eigen::Index>(m) * fd, fd);
      e -= 0.5 * comp.H_N[m] * comp.ds[m] * f.kappa * v.squaredNorm();
      if (f.path == dirac::Path::Twisted) {
        const auto& g = d.geo[comp.nodes[m]];
        const geometry::Vec2 tf = g.E * comp.tangent[m];
        const double an = comp.normal_angle[m], at = std::atan2(tf(1), tf(0));
        const Matrix op = f.gamma_along(an) * f.gamma_along(at) * f.hat_along(an) * f.hat_along(at);
        e += 0.5 * comp.A_hat[m] * comp.ds[m] * f.kappa * v.dot(op * v).real();
      }
    }
  }
  return e;
}

double energy_bulk(const DiscreteDomain& d, const FiberAction& f, const Vec& psi) {
  const auto nabla = dirac::assemble_covariant_derivative(d, f);
  return dirac::bulk_form(d, f, nabla, psi, psi).real();
}

MinimizeResult minimize_energy(const DiscreteDomain& d, const FiberAction& f, const Vec& particular,
                               const KernelInfo& kernel, const SolverOptions& opts) {
  MinimizeResult out;
  out.psi = particular;
  const int m = 2 * kernel.dim;
  const auto nabla = dirac::assemble_covariant_derivative(d, f);
  const double E0 = dirac::bulk_form(d, f, nabla, particular, particular).real();
  out.energy = E0;
  if (m == 0) return out;

  std::vector<Vec> dirs;
  for (const Vec& eta : kernel.basis) {
    dirs.push_back(eta);
    dirs.push_back(kI * eta);
  }
  out.Q.resize(m, m);
  out.linear.resize(m);
  for (int a = 0; a < m; ++a) {
    out.linear(a) = 2.0 * dirac::bulk_form(d, f, nabla, dirs[a], particular).real();
    for (int b = a; b < m; ++b) out.Q(a, b) = out.Q(b, a) = dirac::bulk_form(d, f, nabla, dirs[a], dirs[b]).real();
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(out.Q);
  const Eigen::VectorXd lam = es.eigenvalues();
  const Eigen::MatrixXd U = es.eigenvectors();
  const double scale = 1.0 + lam.cwiseAbs().maxCoeff();
  const double zero = opts.form_tol * scale;
  const double slope_zero = opts.form_tol * (1.0 + out.linear.norm());
  out.coefficients = Eigen::VectorXd::Zero(m);
  for (int i = 0; i < m; ++i) {
    out.eigenvalues.push_back(lam(i));
    const double slope = U.col(i).dot(out.linear);
    if (lam(i) < -zero) {
      out.neg_inf = true;
    } else if (lam(i) <= zero) {
      if (std::abs(slope) > slope_zero) {
        out.neg_inf = true;
        out.flagged = true;
      }
    } else {
      out.coefficients -= 0.5 * slope / lam(i) * U.col(i);
    }
  }
  if (out.neg_inf) {
    out.energy = -INFINITY;
    return out;
  }
  const Eigen::VectorXd& c = out.coefficients;
  out.energy = E0 + out.linear.dot(c) + c.dot(out.Q * c);
  for (int a = 0; a < m; ++a) out.psi += c(a) * dirs[a];
  return out;
}

// ---------------- orchestration ----------------

namespace {

struct MethodValues {
  double boundary = 0.0, normal = 0.0, bulk = 0.0;
};

MethodValues evaluate_all(const DiscreteDomain& d, const FiberAction& f, const Vec& psi) {
  return {energy_boundary(d, f, psi), energy_normal_derivative(d, f, psi), energy_bulk(d, f, psi)};
}

std::optional<closed_form::ClosedFormResult> closed_form_for(const geometry::MetricSpec& spec) {
  if (const auto* s = std::get_if<geometry::FlatDisk>(&spec)) {
    geometry::ConformalFlat c;
    c.r_out = s->radius;
    c.phi.f = geometry::ScalarFunction::PolyR2{{0.0}};
    return closed_form::conformal_energy(c);
  }
  if (const auto* s = std::get_if<geometry::ConformalFlat>(&spec)) return closed_form::conformal_energy(*s);
  if (const auto* s = std::get_if<geometry::RotSym>(&spec)) return closed_form::rotsym_energy(*s);
  return std::nullopt;
}

// 2^{-n/2} sum over a basis of both chiralities at a fixed reference normal.
std::map<std::string, double> spinor_decomposition(const DiscreteDomain& d, const std::vector<std::string>& C,
                                                   const SolverOptions& opts, std::vector<std::string>& notes,
                                                   bool& neg_inf) {
  const auto rep = clifford::build_clifford_rep(2);
  const FiberAction f = dirac::fiber_action(rep, dirac::Path::Spinor);
  const auto P = clifford::chirality_projectors(rep, 0.5 * M_PI);
  MethodValues total;
  for (int sign : {+1, -1}) {
    const System sys(d, f, BoundaryCondition::Kind::Chirality, sign);
    const KernelInfo ker = kernel_basis(sys, opts);
    if (ker.dim > 0)
      notes.push_back("spinor chirality problem (sign " + std::to_string(sign) + ") has kernel dimension " +
                      std::to_string(ker.dim));
    const Matrix basis = clifford::range_basis(sign > 0 ? P.plus : P.minus);
    for (Eigen::Index a = 0; a < basis.cols(); ++a) {
      const BoundaryData data = project_boundary_data(d, f, unit_data(d, f, C, basis.col(a)), ker);
      const Solution sol = solve_bvp(sys, data, ker, opts);
      const MinimizeResult mr = minimize_energy(d, f, sol.psi, ker, opts);
      if (mr.neg_inf) {
        neg_inf = true;
        continue;
      }
      const MethodValues v = evaluate_all(d, f, mr.psi);
      total.boundary += v.boundary;
      total.normal += v.normal;
      total.bulk += v.bulk;
    }
  }
  const double norm = std::pow(2.0, -0.5 * rep.n);
  return {{"boundary_formula", norm * total.boundary},
          {"normal_derivative", norm * total.normal},
          {"bulk", norm * total.bulk}};
}

}  // namespace

EnergyReport quasilocal_energy(const geometry::MetricSpec& spec, const std::vector<std::string>& C_in,
                               geometry::Resolution res, PathChoice path, Method method, const SolverOptions& opts) {
  const auto t0 = std::chrono::steady_clock::now();
  EnergyReport rep;
  rep.method = method;
  rep.resolution = res;

  const DiscreteDomain d = geometry::build_domain(spec, res, opts.gauge_angle);
  const std::vector<std::string> C = C_in.empty() ? all_components(d) : C_in;
  for (const auto& name : C) d.component(name);
  const bool full_boundary = C.size() == d.boundary.size();

  const auto crep = clifford::build_clifford_rep(2);
  const FiberAction f = dirac::fiber_action(crep, dirac::Path::Twisted);
  const System sys(d, f, BoundaryCondition::Kind::PiPlus);
  rep.kernel = kernel_basis(sys, opts);
  if (rep.kernel.ambiguous) rep.notes.push_back("kernel spectral gap below the required separation");

  Vec one(f.dim);
  one << 1.0, 0.0, 0.0, 1.0;
  const BoundaryData data = project_boundary_data(d, f, unit_data(d, f, C, one), rep.kernel);
  rep.data_modified = data.modified;
  const Solution sol = solve_bvp(sys, data, rep.kernel, opts);
  const MinimizeResult mr = minimize_energy(d, f, sol.psi, rep.kernel, opts);
  rep.flagged = mr.flagged;

  rep.residuals["dirac"] = sol.dirac_residual;
  rep.residuals["boundary"] = sol.boundary_residual;
  rep.residuals["cokernel"] = sol.cokernel_defect;
  rep.residuals["green"] = dirac::green_residual(d, f, mr.psi, mr.psi);
  rep.residuals["lichnerowicz"] = dirac::lichnerowicz_residual(d, f, mr.psi);

  rep.brown_york = closed_form::brown_york(geometry::boundary_geometry(d), C);
  if (full_boundary) rep.closed_form = closed_form_for(spec);

  rep.path_used = PathChoice::Twisted;
  if (mr.neg_inf) {
    rep.neg_inf = true;
    rep.energy = -INFINITY;
  } else {
    const MethodValues v = evaluate_all(d, f, mr.psi);
    rep.method_values = {{"boundary_formula", v.boundary}, {"normal_derivative", v.normal}, {"bulk", v.bulk}};
    rep.cross_check_deltas = {{"boundary_formula-normal_derivative", std::abs(v.boundary - v.normal)},
                              {"boundary_formula-bulk", std::abs(v.boundary - v.bulk)},
                              {"normal_derivative-bulk", std::abs(v.normal - v.bulk)}};
  }

  if (path == PathChoice::Spinor) {
    bool spinor_neg_inf = false;
    rep.spinor_values = spinor_decomposition(d, C, opts, rep.notes, spinor_neg_inf);
    if (rep.kernel.dim > 0) {
      rep.notes.push_back("spinor path requires a trivial kernel; twisted kernel has dimension " +
                          std::to_string(rep.kernel.dim) + ", fell back to the twisted path");
    } else {
      rep.path_used = PathChoice::Spinor;
      rep.neg_inf = spinor_neg_inf;
      if (!spinor_neg_inf) rep.method_values = rep.spinor_values;
    }
  }

  if (!rep.neg_inf) {
    if (method == Method::ClosedForm) {
      if (!rep.closed_form) throw UnsupportedError("no closed form is available for this specification");
      rep.neg_inf = rep.closed_form->neg_inf;
      rep.energy = rep.closed_form->energy;
    } else {
      rep.energy = rep.method_values.at(method_name(method));
    }
  } else {
    rep.energy = -INFINITY;
  }
  rep.runtime_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return rep;
}

}  // namespace qle::bvp
