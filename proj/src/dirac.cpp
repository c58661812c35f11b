// SPDX-License-Identifier: Apache-2.0

#include "dirac.hpp"

#include <cmath>
#include <map>

#include "errors.hpp"

namespace qle::dirac {

using geometry::BoundaryComponent;
using geometry::DiscreteDomain;
using geometry::Grid;
using geometry::Mat2;
using geometry::PointGeometry;
using geometry::Vec2;

namespace {

const cd kI(0.0, 1.0);

using Triplet = Eigen::Triplet<cd, long>;
using Stencil = std::vector<std::pair<int, double>>;
using Row = std::map<int, Matrix>;  // column node -> block

struct Builder {
  int fd;
  std::vector<Triplet> trip;

  void add(long row_block, long col_node, const Matrix& blk) {
    for (int a = 0; a < fd; ++a)
      for (int b = 0; b < fd; ++b)
        if (blk(a, b) != cd(0.0)) trip.emplace_back(row_block * fd + a, col_node * fd + b, blk(a, b));
  }
  void add_row(long row_block, const Row& row) {
    for (const auto& [node, blk] : row) add(row_block, node, blk);
  }
  SpMat build(long row_blocks, long col_nodes) const {
    SpMat m(row_blocks * fd, col_nodes * fd);
    m.setFromTriplets(trip.begin(), trip.end());
    return m;
  }
};

void accumulate(Row& row, int node, const Matrix& blk) {
  auto it = row.find(node);
  if (it == row.end())
    row.emplace(node, blk);
  else
    it->second += blk;
}

Stencil radial_stencil(const Grid& g, int i, int j) {
  const double h = g.hr;
  if (i == g.nr - 1)
    return {{g.node(i, j), 1.5 / h}, {g.node(i - 1, j), -2.0 / h}, {g.node(i - 2, j), 0.5 / h}};
  if (i == 0 && g.topology == geometry::Topology::Annulus)
    return {{g.node(0, j), -1.5 / h}, {g.node(1, j), 2.0 / h}, {g.node(2, j), -0.5 / h}};
  if (i == 0) return {{g.node(1, j), 0.5 / h}, {g.node(0, j + g.nt / 2), -0.5 / h}};
  return {{g.node(i + 1, j), 0.5 / h}, {g.node(i - 1, j), -0.5 / h}};
}

Stencil angular_stencil(const Grid& g, int i, int j) {
  return {{g.node(i, j + 1), 0.5 / g.ht}, {g.node(i, j - 1), -0.5 / g.ht}};
}

// M * nabla_v at node (i, j); v in Cartesian components.
void add_covariant(Row& row, const DiscreteDomain& d, const FiberAction& f, int i, int j, const Vec2& v,
                   const Matrix& M, bool tangential_only = false) {
  const Grid& g = d.grid;
  const int k = g.node(i, j);
  const double t = g.theta(j), r = g.r[i];
  const double c = std::cos(t), s = std::sin(t);
  const double cr = v(0) * c + v(1) * s;
  const double ct = (-v(0) * s + v(1) * c) / r;
  if (!tangential_only)
    for (const auto& [node, w] : radial_stencil(g, i, j)) accumulate(row, node, (cr * w) * M);
  for (const auto& [node, w] : angular_stencil(g, i, j)) accumulate(row, node, (ct * w) * M);
  accumulate(row, k, (0.5 * d.geo[k].a.dot(v)) * (M * f.g12));
}

struct PolarData {
  double sqrtG = 0.0;
  Mat2 M;  // sqrt(G) G^{-1} in (r, theta)
  Matrix Ar, At;
};

PolarData polar_data(const PointGeometry& p, double r, double t, const Matrix& g12) {
  Mat2 J;
  J << std::cos(t), -r * std::sin(t), std::sin(t), r * std::cos(t);
  const Mat2 G = J.transpose() * p.g * J;
  PolarData out;
  out.sqrtG = std::sqrt(G.determinant());
  out.M = out.sqrtG * G.inverse();
  out.Ar = (0.5 * p.a.dot(J.col(0))) * g12;
  out.At = (0.5 * p.a.dot(J.col(1))) * g12;
  return out;
}

PolarData polar_at(const DiscreteDomain& d, double r, double t, const Matrix& g12) {
  return polar_data(d.at(r * std::cos(t), r * std::sin(t)), r, t, g12);
}

double frame_angle(const PointGeometry& p, const Vec2& v) {
  const Vec2 f = p.E * v;
  return std::atan2(f(1), f(0));
}

DiscreteOperator finish(Builder& b, long row_blocks, long col_nodes, OperatorKind kind, std::vector<int> rows) {
  DiscreteOperator op;
  op.matrix = b.build(row_blocks, col_nodes);
  op.kind = kind;
  op.fiber_dim = b.fd;
  op.row_nodes = std::move(rows);
  return op;
}

}  // namespace

Matrix FiberAction::gamma_along(double angle) const {
  return std::cos(angle) * gamma[0] + std::sin(angle) * gamma[1];
}

Matrix FiberAction::hat_along(double angle) const {
  if (path != Path::Twisted) throw UnsupportedError("background Clifford action exists on the twisted path only");
  return clifford::hat_action(rep, clifford::gamma_along(rep, angle));
}

FiberAction fiber_action(const clifford::CliffordRep& rep, Path path) {
  if (rep.n != 2) throw UnsupportedError("discrete operators are implemented for n = 2 only");
  FiberAction f;
  f.path = path;
  f.rep = rep;
  const Matrix g12 = rep.gamma[0] * rep.gamma[1];
  if (path == Path::Twisted) {
    f.dim = rep.twisted_dim();
    f.kappa = std::pow(2.0, -0.5 * rep.n);
    f.gamma = {clifford::left_mult(rep.gamma[0]), clifford::left_mult(rep.gamma[1])};
    f.g12 = clifford::left_mult(g12);
  } else {
    f.dim = rep.spinor_dim();
    f.kappa = 1.0;
    f.gamma = {rep.gamma[0], rep.gamma[1]};
    f.g12 = g12;
  }
  f.id = Matrix::Identity(f.dim, f.dim);
  return f;
}

SpinorField SpinorField::make(Vec values, int fiber_dim, int nodes) {
  if (values.size() != static_cast<Eigen::Index>(fiber_dim) * nodes)
    throw ValidationError("spinor field has " + std::to_string(values.size()) + " entries, expected " +
                          std::to_string(static_cast<long>(fiber_dim) * nodes));
  if (!values.allFinite()) throw ValidationError("spinor field contains NaN or Inf");
  SpinorField s;
  s.values = std::move(values);
  s.fiber_dim = fiber_dim;
  return s;
}

std::array<DiscreteOperator, 2> assemble_covariant_derivative(const DiscreteDomain& d, const FiberAction& f) {
  std::array<DiscreteOperator, 2> out;
  const int N = d.grid.nodes();
  std::vector<int> rows(N);
  for (int k = 0; k < N; ++k) rows[k] = k;
  for (int sg = 0; sg < 2; ++sg) {
    Builder b{f.dim, {}};
    for (int i = 0; i < d.grid.nr; ++i)
      for (int j = 0; j < d.grid.nt; ++j) {
        const int k = d.grid.node(i, j);
        Row row;
        add_covariant(row, d, f, i, j, d.geo[k].F.col(sg), f.id);
        b.add_row(k, row);
      }
    out[sg] = finish(b, N, N, OperatorKind::CovariantDerivative, rows);
  }
  return out;
}

DiscreteOperator assemble_dirac(const DiscreteDomain& d, const FiberAction& f) {
  const int N = d.grid.nodes();
  Builder b{f.dim, {}};
  b.trip.reserve(static_cast<std::size_t>(N) * 14 * f.dim * f.dim / 2);
  std::vector<int> rows(N);
  for (int i = 0; i < d.grid.nr; ++i)
    for (int j = 0; j < d.grid.nt; ++j) {
      const int k = d.grid.node(i, j);
      rows[k] = k;
      Row row;
      for (int sg = 0; sg < 2; ++sg) add_covariant(row, d, f, i, j, d.geo[k].F.col(sg), -kI * f.gamma[sg]);
      b.add_row(k, row);
    }
  return finish(b, N, N, OperatorKind::DiracInterior, rows);
}

DiscreteOperator assemble_stabilizer(const DiscreteDomain& d, const FiberAction& f) {
  const Grid& g = d.grid;
  const int N = g.nodes();
  const double h = g.hr, ht = g.ht;
  std::vector<PolarData> node_pd(N);
  for (int i = 0; i < g.nr; ++i)
    for (int j = 0; j < g.nt; ++j) {
      const int k = g.node(i, j);
      node_pd[k] = polar_data(d.geo[k], g.r[i], g.theta(j), f.g12);
    }
  auto rcov = [&](Row& row, int i, int j, const Matrix& M) {
    for (const auto& [node, w] : radial_stencil(g, i, j)) accumulate(row, node, w * M);
    accumulate(row, g.node(i, j), M * node_pd[g.node(i, j)].Ar);
  };
  auto tcov = [&](Row& row, int i, int j, const Matrix& M) {
    for (const auto& [node, w] : angular_stencil(g, i, j)) accumulate(row, node, w * M);
    accumulate(row, g.node(i, j), M * node_pd[g.node(i, j)].At);
  };

  Builder b{f.dim, {}};
  std::vector<int> rows(N);
  for (int k = 0; k < N; ++k) rows[k] = k;
  for (int i = 0; i < g.nr; ++i) {
    if (g.boundary_ring(i)) continue;
    const double r = g.r[i];
    for (int j = 0; j < g.nt; ++j) {
      const int k = g.node(i, j);
      const double t = g.theta(j);
      const PolarData& c = node_pd[k];
      Row row;
      // radial faces; the face through the pole has zero length
      for (int side : {+1, -1}) {
        if (side == -1 && i == 0 && g.topology == geometry::Topology::Disk) continue;
        const int inb = i + side;
        const PolarData fp = polar_at(d, r + 0.5 * side * h, t, f.g12);
        Row flux;
        const int nb = g.node(inb, j);
        accumulate(flux, nb, fp.M(0, 0) * (side / h * f.id + 0.5 * fp.Ar));
        accumulate(flux, k, fp.M(0, 0) * (-side / h * f.id + 0.5 * fp.Ar));
        tcov(flux, i, j, 0.5 * fp.M(0, 1) * f.id);
        tcov(flux, inb, j, 0.5 * fp.M(0, 1) * f.id);
        const Matrix outer = (-1.0 / c.sqrtG) * (side / h * f.id + 0.5 * c.Ar);
        for (const auto& [node, blk] : flux) accumulate(row, node, outer * blk);
      }
      for (int side : {+1, -1}) {
        const PolarData fp = polar_at(d, r, t + 0.5 * side * ht, f.g12);
        Row flux;
        const int nb = g.node(i, j + side);
        accumulate(flux, nb, fp.M(1, 1) * (side / ht * f.id + 0.5 * fp.At));
        accumulate(flux, k, fp.M(1, 1) * (-side / ht * f.id + 0.5 * fp.At));
        rcov(flux, i, j, 0.5 * fp.M(1, 0) * f.id);
        rcov(flux, i, j + side, 0.5 * fp.M(1, 0) * f.id);
        const Matrix outer = (-1.0 / c.sqrtG) * (side / ht * f.id + 0.5 * c.At);
        for (const auto& [node, blk] : flux) accumulate(row, node, outer * blk);
      }
      accumulate(row, k, (0.25 * d.geo[k].scalar_R) * f.id);
      b.add_row(k, row);
    }
  }
  return finish(b, N, N, OperatorKind::Stabilizer, rows);
}

DiscreteOperator assemble_normal_derivative(const DiscreteDomain& d, const FiberAction& f,
                                            const BoundaryComponent& comp) {
  Builder b{f.dim, {}};
  const int nt = d.grid.nt;
  for (int m = 0; m < static_cast<int>(comp.nodes.size()); ++m) {
    Row row;
    add_covariant(row, d, f, comp.ring, comp.nodes[m] % nt, comp.normal[m], f.id);
    b.add_row(m, row);
  }
  return finish(b, static_cast<long>(comp.nodes.size()), d.grid.nodes(), OperatorKind::CovariantDerivative,
                comp.nodes);
}

std::vector<Matrix> normal_gammas(const DiscreteDomain& d, const FiberAction& f, const BoundaryComponent& comp) {
  std::vector<Matrix> out;
  out.reserve(comp.nodes.size());
  for (double a : comp.normal_angle) out.push_back(f.gamma_along(a));
  return out;
}

DiscreteOperator assemble_tangential_dirac(const DiscreteDomain& d, const FiberAction& f,
                                           const BoundaryComponent& comp) {
  Builder b{f.dim, {}};
  const int nt = d.grid.nt;
  for (int m = 0; m < static_cast<int>(comp.nodes.size()); ++m) {
    const int k = comp.nodes[m];
    const PointGeometry& p = d.geo[k];
    const double an = comp.normal_angle[m];
    const double at = frame_angle(p, comp.tangent[m]);
    const Matrix gn = f.gamma_along(an), gt = f.gamma_along(at);
    Row row;
    add_covariant(row, d, f, comp.ring, k % nt, comp.tangent[m], -gn * gt, true);
    Matrix diag = (-0.5 * comp.H_N[m]) * f.id;
    if (f.path == Path::Twisted) diag += (0.5 * comp.A_hat[m]) * (gn * gt * f.hat_along(an) * f.hat_along(at));
    accumulate(row, k, diag);
    b.add_row(m, row);
  }
  return finish(b, static_cast<long>(comp.nodes.size()), d.grid.nodes(), OperatorKind::TangentialDirac,
                comp.nodes);
}

Matrix boundary_basis(const FiberAction& f, double normal_angle, BoundaryCondition::Kind kind, int sign) {
  if (kind == BoundaryCondition::Kind::PiPlus) {
    if (f.path != Path::Twisted) throw ValidationError("pi_+ boundary condition requires the twisted fiber");
    return clifford::boundary_involution(f.rep, normal_angle).plus_basis;
  }
  if (sign != 1 && sign != -1) throw ValidationError("chirality sign must be +1 or -1");
  const auto P = clifford::chirality_projectors(f.rep, normal_angle);
  const Matrix& p = sign > 0 ? P.plus : P.minus;
  return clifford::range_basis(f.path == Path::Twisted ? clifford::left_mult(p) : p);
}

BoundaryRows assemble_boundary_rows(const DiscreteDomain& d, const FiberAction& f, const BoundaryCondition& cond,
                                    const DiscreteOperator& dirac) {
  const int N = d.grid.nodes(), fd = f.dim;
  if (cond.data.size() != static_cast<Eigen::Index>(N) * fd)
    throw ValidationError("boundary data has the wrong length for the fiber");
  if (!cond.data.allFinite()) throw ValidationError("boundary data contains NaN or Inf");
  const Eigen::SparseMatrix<cd, Eigen::RowMajor, long> D = dirac.matrix;

  BoundaryRows out;
  std::vector<Triplet> trip;
  std::vector<cd> rhs;
  long row = 0;
  for (const auto& comp : d.boundary) {
    for (std::size_t m = 0; m < comp.nodes.size(); ++m) {
      const int k = comp.nodes[m];
      const Matrix B = boundary_basis(f, comp.normal_angle[m], cond.kind, cond.sign);
      const Vec bd = B.adjoint() * cond.data.segment(static_cast<Eigen::Index>(k) * fd, fd);
      for (Eigen::Index c = 0; c < B.cols(); ++c, ++row) {
        for (int a = 0; a < fd; ++a)
          if (B(a, c) != cd(0.0)) trip.emplace_back(row, static_cast<long>(k) * fd + a, std::conj(B(a, c)));
        rhs.push_back(bd(c));
        out.is_data_row.push_back(true);
        out.row_node.push_back(k);
      }
      for (Eigen::Index c = 0; c < B.cols(); ++c, ++row) {
        for (int a = 0; a < fd; ++a) {
          const cd coef = std::conj(B(a, c));
          if (coef == cd(0.0)) continue;
          for (decltype(D)::InnerIterator it(D, static_cast<long>(k) * fd + a); it; ++it)
            trip.emplace_back(row, it.col(), coef * it.value());
        }
        rhs.push_back(0.0);
        out.is_data_row.push_back(false);
        out.row_node.push_back(k);
      }
    }
  }
  out.op.matrix.resize(row, static_cast<long>(N) * fd);
  out.op.matrix.setFromTriplets(trip.begin(), trip.end());
  out.op.kind = OperatorKind::BoundaryConstraint;
  out.op.fiber_dim = fd;
  out.op.row_nodes = out.row_node;
  out.rhs = Eigen::Map<const Vec>(rhs.data(), static_cast<Eigen::Index>(rhs.size()));
  return out;
}

cd l2_inner(const DiscreteDomain& d, const FiberAction& f, const Vec& a, const Vec& b) {
  cd s = 0.0;
  const int fd = f.dim;
  for (int k = 0; k < d.grid.nodes(); ++k)
    s += d.weight[k] * a.segment(static_cast<Eigen::Index>(k) * fd, fd).dot(b.segment(static_cast<Eigen::Index>(k) * fd, fd));
  return f.kappa * s;
}

cd boundary_inner(const DiscreteDomain&, const FiberAction& f, const BoundaryComponent& comp, const Vec& a_rows,
                  const Vec& b_rows) {
  cd s = 0.0;
  const int fd = f.dim;
  for (std::size_t m = 0; m < comp.nodes.size(); ++m)
    s += comp.ds[m] * a_rows.segment(static_cast<Eigen::Index>(m) * fd, fd).dot(b_rows.segment(static_cast<Eigen::Index>(m) * fd, fd));
  return f.kappa * s;
}

Vec restrict_to(const BoundaryComponent& comp, int fd, const Vec& field) {
  Vec out(static_cast<Eigen::Index>(comp.nodes.size()) * fd);
  for (std::size_t m = 0; m < comp.nodes.size(); ++m)
    out.segment(static_cast<Eigen::Index>(m) * fd, fd) = field.segment(static_cast<Eigen::Index>(comp.nodes[m]) * fd, fd);
  return out;
}

double green_residual(const DiscreteDomain& d, const FiberAction& f, const Vec& psi1, const Vec& psi2) {
  const SpMat D = assemble_dirac(d, f).matrix;
  cd s = l2_inner(d, f, D * psi1, psi2) - l2_inner(d, f, psi1, D * psi2);
  const int fd = f.dim;
  for (const auto& comp : d.boundary) {
    const auto gn = normal_gammas(d, f, comp);
    const Vec a = restrict_to(comp, fd, psi1), b = restrict_to(comp, fd, psi2);
    Vec gb(b.size());
    for (std::size_t m = 0; m < comp.nodes.size(); ++m)
      gb.segment(static_cast<Eigen::Index>(m) * fd, fd) = gn[m] * b.segment(static_cast<Eigen::Index>(m) * fd, fd);
    s += kI * boundary_inner(d, f, comp, a, gb);
  }
  return std::abs(s);
}

cd bulk_form(const DiscreteDomain& d, const FiberAction& f, const std::array<DiscreteOperator, 2>& nabla,
             const Vec& a, const Vec& b) {
  cd s = l2_inner(d, f, nabla[0].matrix * a, nabla[0].matrix * b) + l2_inner(d, f, nabla[1].matrix * a, nabla[1].matrix * b);
  const int fd = f.dim;
  cd c = 0.0;
  for (int k = 0; k < d.grid.nodes(); ++k)
    c += d.weight[k] * 0.25 * d.geo[k].scalar_R *
         a.segment(static_cast<Eigen::Index>(k) * fd, fd).dot(b.segment(static_cast<Eigen::Index>(k) * fd, fd));
  return s + f.kappa * c;
}

double lichnerowicz_residual(const DiscreteDomain& d, const FiberAction& f, const Vec& psi) {
  const SpMat D = assemble_dirac(d, f).matrix;
  const auto nabla = assemble_covariant_derivative(d, f);
  const Vec Dpsi = D * psi;
  cd s = l2_inner(d, f, D * Dpsi, psi) - bulk_form(d, f, nabla, psi, psi);
  for (const auto& comp : d.boundary) {
    const Vec dn = assemble_normal_derivative(d, f, comp).matrix * psi;
    s -= boundary_inner(d, f, comp, dn, restrict_to(comp, f.dim, psi));
  }
  return std::abs(s);
}

Vec constant_field(int nodes, const Vec& v) {
  Vec out(static_cast<Eigen::Index>(nodes) * v.size());
  for (int k = 0; k < nodes; ++k) out.segment(static_cast<Eigen::Index>(k) * v.size(), v.size()) = v;
  return out;
}

}  // namespace qle::dirac
