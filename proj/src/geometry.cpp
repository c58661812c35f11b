// SPDX-License-Identifier: Apache-2.0

#include "geometry.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <boost/math/interpolators/cardinal_cubic_b_spline.hpp>
#include <boost/math/interpolators/quintic_hermite.hpp>
#include <boost/numeric/odeint.hpp>

#include "errors.hpp"

namespace qle::geometry {

namespace {

double ipow(double x, int k) {
  double out = 1.0;
  for (int i = 0; i < k; ++i) out *= x;
  return out;
}

// d^m/dx^m x^p
double dpow(double x, int p, int m) {
  if (p < m) return 0.0;
  double c = 1.0;
  for (int i = 0; i < m; ++i) c *= p - i;
  return c * ipow(x, p - m);
}

Jet2 radial_to_cartesian(const Jet1& f, double x, double y) {
  Jet2 out;
  out.v = f.v;
  const double r = std::hypot(x, y);
  if (r < 1e-14) {
    out.xx = out.yy = f.dd;
    return out;
  }
  const double cx = x / r, cy = y / r;
  out.x = f.d * cx;
  out.y = f.d * cy;
  const double t = f.d / r;
  out.xx = f.dd * cx * cx + t * (1.0 - cx * cx);
  out.yy = f.dd * cy * cy + t * (1.0 - cy * cy);
  out.xy = (f.dd - t) * cx * cy;
  return out;
}

Mat2 rotation(double angle) {
  Mat2 r;
  r << std::cos(angle), -std::sin(angle), std::sin(angle), std::cos(angle);
  return r;
}

// Solve S X + X S = C for X with S symmetric positive definite.
Mat2 sylvester(const Mat2& S, const Mat2& C) {
  Eigen::Matrix4d op = Eigen::Matrix4d::Zero();
  const Mat2 id = Mat2::Identity();
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b)
      for (int c = 0; c < 2; ++c)
        for (int d = 0; d < 2; ++d)
          op(a + 2 * b, c + 2 * d) = id(b, d) * S(a, c) + S(d, b) * id(a, c);
  Eigen::Vector4d rhs(C(0, 0), C(1, 0), C(0, 1), C(1, 1));
  Eigen::Vector4d sol = op.partialPivLu().solve(rhs);
  Mat2 X;
  X << sol(0), sol(2), sol(1), sol(3);
  return X;
}

MetricJet conformal_jet(const Jet2& p) {
  const double e = std::exp(2.0 * p.v);
  const Mat2 id = Mat2::Identity();
  MetricJet j;
  j.g = e * id;
  j.gx = 2.0 * p.x * e * id;
  j.gy = 2.0 * p.y * e * id;
  j.gxx = (4.0 * p.x * p.x + 2.0 * p.xx) * e * id;
  j.gxy = (4.0 * p.x * p.y + 2.0 * p.xy) * e * id;
  j.gyy = (4.0 * p.y * p.y + 2.0 * p.yy) * e * id;
  return j;
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

void check_radii(Topology topo, double r_in, double r_out) {
  if (!(r_out > 0.0)) throw ValidationError("outer radius must be positive");
  if (topo == Topology::Annulus && !(r_in > 0.0 && r_in < r_out))
    throw ValidationError("annulus radii must satisfy 0 < r_in < r_out");
}

struct Circle {
  std::string name;
  double radius;
};

std::vector<Circle> circles(Topology topo, double r_in, double r_out) {
  std::vector<Circle> out{{"outer", r_out}};
  if (topo == Topology::Annulus) out.push_back({"inner", r_in});
  return out;
}

}  // namespace

// ---------------- Poly2 ----------------

Poly2 Poly2::constant(double c) { return Poly2{{{c, 0, 0}}}; }

Jet2 Poly2::eval(double x, double y) const {
  Jet2 j;
  for (const auto& t : terms) {
    const double X0 = dpow(x, t.px, 0), X1 = dpow(x, t.px, 1), X2 = dpow(x, t.px, 2);
    const double Y0 = dpow(y, t.py, 0), Y1 = dpow(y, t.py, 1), Y2 = dpow(y, t.py, 2);
    j.v += t.c * X0 * Y0;
    j.x += t.c * X1 * Y0;
    j.y += t.c * X0 * Y1;
    j.xx += t.c * X2 * Y0;
    j.xy += t.c * X1 * Y1;
    j.yy += t.c * X0 * Y2;
  }
  return j;
}

Poly2 Poly2::operator+(const Poly2& o) const {
  Poly2 out = *this;
  out.terms.insert(out.terms.end(), o.terms.begin(), o.terms.end());
  return out;
}

Poly2 Poly2::operator*(const Poly2& o) const {
  Poly2 out;
  for (const auto& a : terms)
    for (const auto& b : o.terms) out.terms.push_back({a.c * b.c, a.px + b.px, a.py + b.py});
  return out;
}

Poly2 Poly2::scaled(double s) const {
  Poly2 out = *this;
  for (auto& t : out.terms) t.c *= s;
  return out;
}

Poly2 Poly2::power(int m) const {
  Poly2 out = constant(1.0);
  for (int i = 0; i < m; ++i) out = out * *this;
  return out;
}

// ---------------- RadialFunction ----------------

struct RadialFunction::Impl {
  std::unique_ptr<boost::math::interpolators::cardinal_cubic_b_spline<double>> spline;
  std::unique_ptr<boost::math::interpolators::quintic_hermite<std::vector<double>>> hermite;
  double lo = 0.0, hi = 0.0;
};

RadialFunction RadialFunction::uniform(double r0, double dr, std::vector<double> values) {
  if (values.size() < 4) throw ValidationError("sampled radial function needs at least 4 values");
  if (!(dr > 0.0)) throw ValidationError("sampled radial function needs dr > 0");
  auto impl = std::make_shared<Impl>();
  impl->lo = r0;
  impl->hi = r0 + dr * static_cast<double>(values.size() - 1);
  // Even extension through r = 0 keeps the function smooth at the origin.
  impl->spline = std::make_unique<boost::math::interpolators::cardinal_cubic_b_spline<double>>(
      values.begin(), values.end(), r0, dr, r0 == 0.0 ? 0.0 : std::numeric_limits<double>::quiet_NaN());
  RadialFunction f;
  f.impl_ = impl;
  return f;
}

RadialFunction RadialFunction::hermite(std::vector<double> r, std::vector<double> f,
                                       std::vector<double> df, std::vector<double> ddf) {
  if (r.size() < 2 || f.size() != r.size() || df.size() != r.size() || ddf.size() != r.size())
    throw ValidationError("hermite radial function needs matching sample arrays");
  auto impl = std::make_shared<Impl>();
  impl->lo = r.front();
  impl->hi = r.back();
  impl->hermite = std::make_unique<boost::math::interpolators::quintic_hermite<std::vector<double>>>(
      std::move(r), std::move(f), std::move(df), std::move(ddf));
  RadialFunction out;
  out.impl_ = impl;
  return out;
}

Jet1 RadialFunction::eval(double r) const {
  r = std::clamp(r, impl_->lo, impl_->hi);
  if (impl_->hermite)
    return {(*impl_->hermite)(r), impl_->hermite->prime(r), impl_->hermite->double_prime(r)};
  return {(*impl_->spline)(r), impl_->spline->prime(r), impl_->spline->double_prime(r)};
}

double RadialFunction::r_min() const { return impl_->lo; }
double RadialFunction::r_max() const { return impl_->hi; }

// ---------------- ScalarFunction / Profile ----------------

Jet2 ScalarFunction::eval(double x, double y) const {
  if (const auto* p = std::get_if<PolyR2>(&f)) {
    const double s = x * x + y * y;
    Jet1 q;  // as a function of s = r^2
    for (std::size_t k = 0; k < p->coeffs.size(); ++k) {
      const int kk = static_cast<int>(k);
      q.v += p->coeffs[k] * ipow(s, kk);
      if (kk >= 1) q.d += p->coeffs[k] * kk * ipow(s, kk - 1);
      if (kk >= 2) q.dd += p->coeffs[k] * kk * (kk - 1) * ipow(s, kk - 2);
    }
    Jet2 j;
    j.v = q.v;
    j.x = 2.0 * x * q.d;
    j.y = 2.0 * y * q.d;
    j.xx = 2.0 * q.d + 4.0 * x * x * q.dd;
    j.yy = 2.0 * q.d + 4.0 * y * y * q.dd;
    j.xy = 4.0 * x * y * q.dd;
    return j;
  }
  if (const auto* p = std::get_if<Poly2>(&f)) return p->eval(x, y);
  const auto& rf = std::get<RadialFunction>(f);
  return radial_to_cartesian(rf.eval(std::hypot(x, y)), x, y);
}

Jet1 Profile::eval(double rho) const {
  switch (kind) {
    case Kind::Linear:
      return {rho, 1.0, 0.0};
    case Kind::Sin:
      return {std::sin(a * rho) / a, std::cos(a * rho), -a * std::sin(a * rho)};
    case Kind::Sinh:
      return {std::sinh(a * rho) / a, std::cosh(a * rho), a * std::sinh(a * rho)};
    case Kind::Sampled:
      return samples->eval(rho);
  }
  return {};
}

double sphere_volume(int m) {
  // Vol(S^m) = 2 pi^{(m+1)/2} / Gamma((m+1)/2)
  return 2.0 * std::pow(M_PI, 0.5 * (m + 1)) / std::tgamma(0.5 * (m + 1));
}

// ---------------- validation ----------------

void validate_spec(const MetricSpec& spec) {
  if (const auto* s = std::get_if<FlatDisk>(&spec)) {
    if (!(s->radius > 0.0)) throw ValidationError("flat disk radius must be positive");
    return;
  }
  if (const auto* s = std::get_if<ConformalFlat>(&spec)) {
    check_radii(s->topology, s->r_in, s->r_out);
    for (const auto& c : circles(s->topology, s->r_in, s->r_out)) {
      for (int k = 0; k < 64; ++k) {
        const double t = 2.0 * M_PI * k / 64.0;
        const double v = s->phi.eval(c.radius * std::cos(t), c.radius * std::sin(t)).v;
        if (std::abs(v) > 1e-10)
          throw ValidationError("conformal factor must vanish on the " + c.name +
                                " boundary circle (phi = " + fmt(v) + " at theta = " + fmt(t) + ")");
      }
    }
    return;
  }
  if (const auto* s = std::get_if<RotSym>(&spec)) {
    if (s->n < 2) throw ValidationError("rotationally symmetric dimension must be at least 2");
    if (!(s->rho_max > 0.0)) throw ValidationError("rho_max must be positive");
    if (s->s.kind == Profile::Kind::Sampled && !s->s.samples)
      throw ValidationError("sampled profile has no samples");
    if ((s->s.kind == Profile::Kind::Sin || s->s.kind == Profile::Kind::Sinh) && !(s->s.a > 0.0))
      throw ValidationError("profile parameter a must be positive");
    const Jet1 z = s->s.eval(0.0);
    if (std::abs(z.v) > 1e-10) throw ValidationError("profile must satisfy s(0) = 0");
    if (std::abs(z.d - 1.0) > 1e-6) throw ValidationError("profile must satisfy s'(0) = 1");
    for (int k = 1; k <= 1000; ++k) {
      const double rho = s->rho_max * k / 1000.0;
      if (!(s->s.eval(rho).v > 0.0))
        throw ValidationError("profile must be positive on (0, rho_max]; fails at rho = " + fmt(rho));
    }
    return;
  }
  const auto& s = std::get<General2D>(spec);
  check_radii(s.topology, s.r_in, s.r_out);
  for (const auto& c : circles(s.topology, s.r_in, s.r_out)) {
    for (int k = 0; k < 64; ++k) {
      const double t = 2.0 * M_PI * k / 64.0;
      const double x = c.radius * std::cos(t), y = c.radius * std::sin(t);
      Mat2 g;
      g << s.g11.eval(x, y).v, s.g12.eval(x, y).v, s.g12.eval(x, y).v, s.g22.eval(x, y).v;
      const Vec2 T(-y, x);
      const double len = std::sqrt(T.dot(g * T));
      if (std::abs(len - c.radius) > 1e-10)
        throw ValidationError("induced metric on the " + c.name +
                              " boundary circle is not the round metric (|d_theta| = " + fmt(len) +
                              ", expected " + fmt(c.radius) + ")");
    }
  }
}

// ---------------- point geometry ----------------

PointGeometry point_geometry(const MetricJet& j, double gauge_angle) {
  PointGeometry p;
  p.g = j.g;
  Eigen::SelfAdjointEigenSolver<Mat2> es(j.g);
  if (es.eigenvalues().minCoeff() <= 0.0) throw ValidationError("metric is not positive definite");
  const Mat2 S = es.operatorSqrt();  // g^{1/2}
  const Mat2 Sx = sylvester(S, j.gx);
  const Mat2 Sy = sylvester(S, j.gy);
  const Mat2 Sxx = sylvester(S, j.gxx - 2.0 * Sx * Sx);
  const Mat2 Syy = sylvester(S, j.gyy - 2.0 * Sy * Sy);
  const Mat2 Sxy = sylvester(S, j.gxy - Sx * Sy - Sy * Sx);

  const Mat2 Rt = rotation(gauge_angle).transpose();
  p.E = Rt * S;
  p.F = p.E.inverse();
  p.Ex = Rt * Sx;
  p.Ey = Rt * Sy;
  const Mat2 Exx = Rt * Sxx, Exy = Rt * Sxy, Eyy = Rt * Syy;

  const double det = p.E.determinant();
  p.sqrt_det = det;
  const Mat2 Einv = p.F;
  const double detx = det * (Einv * p.Ex).trace();
  const double dety = det * (Einv * p.Ey).trace();

  // d tau^alpha = C^alpha dx ^ dy
  Vec2 C, Cx, Cy;
  for (int al = 0; al < 2; ++al) {
    C(al) = p.Ex(al, 1) - p.Ey(al, 0);
    Cx(al) = Exx(al, 1) - Exy(al, 0);
    Cy(al) = Exy(al, 1) - Eyy(al, 0);
  }
  p.w = -C / det;
  const Vec2 wx = -Cx / det + C * detx / (det * det);
  const Vec2 wy = -Cy / det + C * dety / (det * det);
  p.a = p.E.transpose() * p.w;
  // d omega_12 = (d_x a_y - d_y a_x) dx ^ dy = K tau^1 ^ tau^2
  const double dxay = wx.dot(p.E.col(1)) + p.w.dot(p.Ex.col(1));
  const double dyax = wy.dot(p.E.col(0)) + p.w.dot(p.Ey.col(0));
  p.scalar_R = 2.0 * (dxay - dyax) / det;
  return p;
}

// ---------------- rotsym rewriting ----------------

RadialFunction rotsym_conformal_factor(const RotSym& spec) {
  if (spec.n != 2) throw UnsupportedError("conformal rewriting requires n = 2");
  const double k = spec.s.eval(spec.rho_max).v;
  const double u0 = std::log(k);
  const double u1 = std::log(k * 1e-6);
  const int m = 4000;

  // rho(u) with u = log r: d rho / du = s(rho). Integrate in v = -u.
  using State = std::array<double, 1>;
  auto rhs = [&](const State& x, State& dx, double) { dx[0] = -spec.s.eval(x[0]).v; };
  std::vector<double> vs(m + 1);
  for (int i = 0; i <= m; ++i) vs[i] = -u0 + (u0 - u1) * i / m;
  std::vector<double> rhos;
  State st{spec.rho_max};
  namespace ode = boost::numeric::odeint;
  ode::integrate_times(ode::make_controlled(1e-13, 1e-13, ode::runge_kutta_dopri5<State>()), rhs, st,
                       vs.begin(), vs.end(), 1e-4,
                       [&](const State& x, double) { rhos.push_back(x[0]); });

  std::vector<double> r, f, df, ddf;
  for (int i = m; i >= 0; --i) {
    const double rr = std::exp(-vs[i]);
    const double rho = rhos[i];
    const Jet1 s = spec.s.eval(rho);
    r.push_back(rr);
    f.push_back(std::log(s.v / rr));
    df.push_back((s.d - 1.0) / rr);
    ddf.push_back(s.dd * s.v / (rr * rr) - (s.d - 1.0) / (rr * rr));
  }
  // Extend to the origin, where phi is even in r.
  r.insert(r.begin(), 0.0);
  f.insert(f.begin(), f.front());
  df.insert(df.begin(), 0.0);
  ddf.insert(ddf.begin(), ddf.front());
  return RadialFunction::hermite(std::move(r), std::move(f), std::move(df), std::move(ddf));
}

ConformalFlat rotsym_as_conformal(const RotSym& spec) {
  ConformalFlat c;
  c.topology = Topology::Disk;
  c.r_out = spec.s.eval(spec.rho_max).v;
  c.phi.f = rotsym_conformal_factor(spec);
  return c;
}

MetricField metric_field(const MetricSpec& spec) {
  if (std::holds_alternative<FlatDisk>(spec)) {
    return [](double, double) {
      MetricJet j;
      j.g = Mat2::Identity();
      j.gx = j.gy = j.gxx = j.gxy = j.gyy = Mat2::Zero();
      return j;
    };
  }
  if (const auto* s = std::get_if<ConformalFlat>(&spec)) {
    auto phi = s->phi;
    return [phi](double x, double y) { return conformal_jet(phi.eval(x, y)); };
  }
  if (const auto* s = std::get_if<RotSym>(&spec)) {
    if (s->n != 2)
      throw UnsupportedError("discrete grids support n = 2 only; rotationally symmetric n = " +
                             std::to_string(s->n) + " is available through the closed form");
    auto phi = rotsym_as_conformal(*s).phi;
    return [phi](double x, double y) { return conformal_jet(phi.eval(x, y)); };
  }
  const auto s = std::get<General2D>(spec);
  return [s](double x, double y) {
    const Jet2 a = s.g11.eval(x, y), b = s.g12.eval(x, y), c = s.g22.eval(x, y);
    auto m = [](double p, double q, double r) {
      Mat2 out;
      out << p, q, q, r;
      return out;
    };
    MetricJet j;
    j.g = m(a.v, b.v, c.v);
    j.gx = m(a.x, b.x, c.x);
    j.gy = m(a.y, b.y, c.y);
    j.gxx = m(a.xx, b.xx, c.xx);
    j.gxy = m(a.xy, b.xy, c.xy);
    j.gyy = m(a.yy, b.yy, c.yy);
    return j;
  };
}

// ---------------- domain ----------------

const BoundaryComponent& DiscreteDomain::component(const std::string& name) const {
  for (const auto& c : boundary)
    if (c.name == name) return c;
  throw ValidationError("no boundary component named '" + name + "'");
}

DiscreteDomain build_domain(const MetricSpec& spec_in, Resolution res, double gauge_angle) {
  validate_spec(spec_in);
  if (res.nr < 8 || res.nt < 16 || res.nt % 2 != 0)
    throw ValidationError("resolution must satisfy n_r >= 8, n_theta >= 16, n_theta even (got " +
                          std::to_string(res.nr) + ", " + std::to_string(res.nt) + ")");

  DiscreteDomain d;
  d.spec = spec_in;
  d.gauge_angle = gauge_angle;
  d.field = metric_field(spec_in);

  Grid& G = d.grid;
  G.nr = res.nr;
  G.nt = res.nt;
  G.ht = 2.0 * M_PI / res.nt;
  if (const auto* s = std::get_if<FlatDisk>(&spec_in)) {
    G.r_out = s->radius;
  } else if (const auto* s = std::get_if<ConformalFlat>(&spec_in)) {
    G.topology = s->topology;
    G.r_in = s->r_in;
    G.r_out = s->r_out;
  } else if (const auto* s = std::get_if<RotSym>(&spec_in)) {
    G.r_out = s->s.eval(s->rho_max).v;
  } else {
    const auto& g = std::get<General2D>(spec_in);
    G.topology = g.topology;
    G.r_in = g.r_in;
    G.r_out = g.r_out;
  }
  if (G.topology == Topology::Disk) {
    G.r_in = 0.0;
    G.hr = G.r_out / (G.nr - 0.5);
    for (int i = 0; i < G.nr; ++i) G.r.push_back((i + 0.5) * G.hr);
  } else {
    G.hr = (G.r_out - G.r_in) / (G.nr - 1);
    for (int i = 0; i < G.nr; ++i) G.r.push_back(G.r_in + i * G.hr);
  }
  G.r.back() = G.r_out;

  const int N = G.nodes();
  d.x.resize(N);
  d.y.resize(N);
  d.geo.resize(N);
  d.weight.resize(N);
  for (int i = 0; i < G.nr; ++i) {
    double area;  // flat polar cell area divided by h_theta
    if (i == G.nr - 1)
      area = 0.5 * (G.r_out * G.r_out - std::pow(G.r_out - 0.5 * G.hr, 2));
    else if (G.topology == Topology::Annulus && i == 0)
      area = 0.5 * (std::pow(G.r_in + 0.5 * G.hr, 2) - G.r_in * G.r_in);
    else
      area = G.r[i] * G.hr;
    for (int j = 0; j < G.nt; ++j) {
      const int k = G.node(i, j);
      d.x[k] = G.r[i] * std::cos(G.theta(j));
      d.y[k] = G.r[i] * std::sin(G.theta(j));
      d.geo[k] = point_geometry(d.field(d.x[k], d.y[k]), gauge_angle);
      d.weight[k] = area * G.ht * d.geo[k].sqrt_det;
    }
  }

  for (const auto& c : circles(G.topology, G.r_in, G.r_out)) {
    BoundaryComponent b;
    b.name = c.name;
    b.radius = c.radius;
    b.ring = c.name == "outer" ? G.nr - 1 : 0;
    const double sign = c.name == "outer" ? -1.0 : 1.0;
    for (int j = 0; j < G.nt; ++j) {
      const int k = G.node(b.ring, j);
      const double x = d.x[k], y = d.y[k];
      const MetricJet mj = d.field(x, y);
      const PointGeometry& p = d.geo[k];
      const Vec2 T(-y, x);
      const double len = std::sqrt(T.dot(mj.g * T));
      const Vec2 t = T / len;
      const Vec2 dr(x / c.radius, y / c.radius);
      const Mat2 ginv = mj.g.inverse();
      Vec2 nrm = sign * ginv * dr;
      nrm /= std::sqrt(dr.dot(ginv * dr));
      const Vec2 nf = p.E * nrm;
      const Vec2 tf = p.E * t;

      // d/ds of the frame components of t along the circle
      const Mat2 dE = -y * p.Ex + x * p.Ey;
      const Mat2 dg = -y * mj.gx + x * mj.gy;
      const Vec2 dT(-x, -y);
      const double dlen = (2.0 * T.dot(mj.g * dT) + T.dot(dg * T)) / (2.0 * len);
      const Vec2 dt = dT / len - T * dlen / (len * len);
      const Vec2 dtf = (dE * t + p.E * dt) / len;
      const double om = p.a.dot(t);
      const Vec2 cov(dtf(0) + tf(1) * om, dtf(1) - tf(0) * om);

      b.nodes.push_back(k);
      b.normal.push_back(nrm);
      b.tangent.push_back(t);
      b.normal_angle.push_back(std::atan2(nf(1), nf(0)));
      b.ds.push_back(len * G.ht);
      b.H_N.push_back(cov.dot(nf));
      const double hm = c.name == "outer" ? 1.0 / c.radius : -1.0 / c.radius;
      b.H_M.push_back(hm);
      b.A_hat.push_back(hm);
    }
    d.boundary.push_back(std::move(b));
  }
  return d;
}

std::vector<double> scalar_curvature(const DiscreteDomain& domain) {
  std::vector<double> out(domain.geo.size());
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = domain.geo[k].scalar_R;
  return out;
}

std::vector<double> rotsym_scalar_curvature(const RotSym& spec, const std::vector<double>& rho) {
  std::vector<double> out;
  const double n = spec.n;
  for (double r : rho) {
    const Jet1 s = spec.s.eval(r);
    out.push_back((n - 1.0) * (-2.0 * s.dd / s.v + (n - 2.0) * (1.0 - s.d * s.d) / (s.v * s.v)));
  }
  return out;
}

double rotsym_mean_curvature(const RotSym& spec, double rho0) {
  const Jet1 s = spec.s.eval(rho0);
  return (spec.n - 1.0) * s.d / s.v;
}

BoundaryGeometry boundary_geometry(const DiscreteDomain& domain) {
  BoundaryGeometry bg;
  const ConformalFlat* conf = std::get_if<ConformalFlat>(&domain.spec);
  ConformalFlat rot;
  if (const auto* r = std::get_if<RotSym>(&domain.spec)) {
    rot = rotsym_as_conformal(*r);
    conf = &rot;
  }
  for (const auto& b : domain.boundary) {
    bg.labels.push_back(b.name);
    bg.H_N.push_back(b.H_N);
    bg.H_M.push_back(b.H_M);
    bg.A_hat.push_back(b.A_hat);
    bg.ds.push_back(b.ds);
    if (conf) {
      for (std::size_t m = 0; m < b.nodes.size(); ++m) {
        const int k = b.nodes[m];
        const Jet2 p = conf->phi.eval(domain.x[k], domain.y[k]);
        // flat normal coincides with the g' normal on the boundary since phi = 0 there
        const double en_phi = b.normal[m](0) * p.x + b.normal[m](1) * p.y;
        const double h_flat = b.H_M[m];
        bg.conformal_check = std::max(bg.conformal_check, std::abs(b.H_N[m] - (h_flat - en_phi)));
      }
    }
  }
  return bg;
}

std::vector<double> lambda2_distortion(const DiscreteDomain& domain) {
  const ConformalFlat* conf = std::get_if<ConformalFlat>(&domain.spec);
  ConformalFlat rot;
  if (const auto* r = std::get_if<RotSym>(&domain.spec)) {
    rot = rotsym_as_conformal(*r);
    conf = &rot;
  }
  if (!conf) throw UnsupportedError("lambda2_distortion requires a conformally flat spec");
  std::vector<double> out;
  for (std::size_t k = 0; k < domain.x.size(); ++k)
    out.push_back(std::exp(-2.0 * conf->phi.eval(domain.x[k], domain.y[k]).v));
  return out;
}

}  // namespace qle::geometry
