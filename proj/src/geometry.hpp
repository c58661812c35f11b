// SPDX-License-Identifier: Apache-2.0
//
// Metric specifications and their discretization on polar grids.

#pragma once

#include <functional>
#include <memory>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

namespace qle::geometry {

using Mat2 = Eigen::Matrix2d;
using Vec2 = Eigen::Vector2d;

/// Value and derivatives up to second order of a function of (x, y).
struct Jet2 {
  double v = 0, x = 0, y = 0, xx = 0, xy = 0, yy = 0;
};

/// Value and first two derivatives of a function of one variable.
struct Jet1 {
  double v = 0, d = 0, dd = 0;
};

/// Polynomial sum_k c_k x^px_k y^py_k.
struct Poly2 {
  struct Term {
    double c;
    int px, py;
  };
  std::vector<Term> terms;

  static Poly2 constant(double c);
  Jet2 eval(double x, double y) const;
  Poly2 operator+(const Poly2& o) const;
  Poly2 operator*(const Poly2& o) const;
  Poly2 scaled(double s) const;
  Poly2 power(int m) const;
};

/// Radial function f(r) given by samples. Either a uniform cubic B-spline over
/// values, or a quintic Hermite interpolant over values and two derivatives.
class RadialFunction {
 public:
  static RadialFunction uniform(double r0, double dr, std::vector<double> values);
  static RadialFunction hermite(std::vector<double> r, std::vector<double> f,
                                std::vector<double> df, std::vector<double> ddf);
  Jet1 eval(double r) const;
  double r_min() const;
  double r_max() const;

 private:
  struct Impl;
  std::shared_ptr<const Impl> impl_;
};

/// Scalar field on the plane (conformal factor).
struct ScalarFunction {
  struct PolyR2 {
    std::vector<double> coeffs;  // sum_k coeffs[k] (r^2)^k
  };
  std::variant<PolyR2, Poly2, RadialFunction> f;

  Jet2 eval(double x, double y) const;
};

/// Warped-product profile s(rho) for rotationally symmetric metrics.
struct Profile {
  enum class Kind { Linear, Sin, Sinh, Sampled };
  Kind kind = Kind::Linear;
  double a = 1.0;
  std::shared_ptr<const RadialFunction> samples;

  Jet1 eval(double rho) const;
};

enum class Topology { Disk, Annulus };

struct FlatDisk {
  double radius = 1.0;
};

/// g' = e^{2 phi} (dx^2 + dy^2) on a disk or annulus.
struct ConformalFlat {
  Topology topology = Topology::Disk;
  double r_in = 0.0, r_out = 1.0;
  ScalarFunction phi;
};

/// drho^2 + s(rho)^2 g_{S^{n-1}} on the geodesic ball rho <= rho_max.
struct RotSym {
  int n = 2;
  Profile s;
  double rho_max = 1.0;
};

/// Arbitrary metric with polynomial Cartesian components.
struct General2D {
  Topology topology = Topology::Disk;
  double r_in = 0.0, r_out = 1.0;
  Poly2 g11, g12, g22;
};

using MetricSpec = std::variant<FlatDisk, ConformalFlat, RotSym, General2D>;

/// Throws ValidationError naming the violated condition.
void validate_spec(const MetricSpec& spec);

/// Cartesian metric components and derivatives at a point.
struct MetricJet {
  Mat2 g, gx, gy, gxx, gxy, gyy;
};

using MetricField = std::function<MetricJet(double, double)>;

/// Pointwise Riemannian data in the Cartesian gauge.
struct PointGeometry {
  Mat2 g;
  Mat2 F;          // e_sigma = F(0, sigma) d_x + F(1, sigma) d_y
  Mat2 E;          // tau^alpha = E(alpha, 0) dx + E(alpha, 1) dy
  Mat2 Ex, Ey;     // derivatives of E
  Vec2 a;          // omega_12 on d_x, d_y
  Vec2 w;          // omega_12 on e_1, e_2
  double sqrt_det = 1.0;
  double scalar_R = 0.0;
};

/// Frame F = g^{-1/2} R(gauge_angle). omega_12(X) = <nabla_X e_2, e_1>.
PointGeometry point_geometry(const MetricJet& jet, double gauge_angle = 0.0);

/// Metric field of a spec on the plane. RotSym is supported for n = 2 only.
MetricField metric_field(const MetricSpec& spec);

/// Conformal factor of a 2-dimensional RotSym spec, on the disk of radius s(rho_max).
RadialFunction rotsym_conformal_factor(const RotSym& spec);

/// ConformalFlat equivalent of an n = 2 RotSym spec.
ConformalFlat rotsym_as_conformal(const RotSym& spec);

struct Grid {
  Topology topology = Topology::Disk;
  int nr = 0, nt = 0;
  double r_in = 0.0, r_out = 1.0;
  double hr = 0.0, ht = 0.0;
  std::vector<double> r;

  int nodes() const { return nr * nt; }
  int node(int i, int j) const { return i * nt + ((j % nt) + nt) % nt; }
  double theta(int j) const { return j * ht; }
  bool boundary_ring(int i) const {
    return i == nr - 1 || (topology == Topology::Annulus && i == 0);
  }
};

struct BoundaryComponent {
  std::string name;  // "outer" or "inner"
  int ring = 0;
  double radius = 0.0;
  std::vector<int> nodes;
  std::vector<double> normal_angle;  // inward normal in the gauge frame
  std::vector<Vec2> normal;          // inward unit normal, Cartesian components
  std::vector<Vec2> tangent;         // unit tangent along increasing theta
  std::vector<double> ds;            // boundary quadrature weight
  std::vector<double> H_N;
  std::vector<double> H_M;
  std::vector<double> A_hat;
};

struct DiscreteDomain {
  MetricSpec spec;
  Grid grid;
  double gauge_angle = 0.0;
  MetricField field;
  std::vector<double> x, y;
  std::vector<PointGeometry> geo;
  std::vector<double> weight;
  std::vector<BoundaryComponent> boundary;

  PointGeometry at(double px, double py) const { return point_geometry(field(px, py), gauge_angle); }
  const BoundaryComponent& component(const std::string& name) const;
};

struct Resolution {
  int nr = 32, nt = 64;
};

/// Requires nr >= 8, nt >= 16 and nt even.
DiscreteDomain build_domain(const MetricSpec& spec, Resolution res, double gauge_angle = 0.0);

std::vector<double> scalar_curvature(const DiscreteDomain& domain);

/// Scalar curvature of drho^2 + s^2 g_{S^{n-1}} at the given radii.
std::vector<double> rotsym_scalar_curvature(const RotSym& spec, const std::vector<double>& rho);

/// Mean curvature (n-1) s'/s of the sphere rho = rho0.
double rotsym_mean_curvature(const RotSym& spec, double rho0);

struct BoundaryGeometry {
  std::vector<std::string> labels;
  std::vector<std::vector<double>> H_N, H_M, A_hat, ds;
  /// For ConformalFlat: max |H_N - (H_flat - e_n phi)| over boundary nodes.
  double conformal_check = 0.0;
};

BoundaryGeometry boundary_geometry(const DiscreteDomain& domain);

/// e^{-2 phi} per node. Throws UnsupportedError for non-conformal specs.
std::vector<double> lambda2_distortion(const DiscreteDomain& domain);

/// Vol(S^{n-1}).
double sphere_volume(int n_minus_1);

}  // namespace qle::geometry
