// SPDX-License-Identifier: Apache-2.0

#include "verify.hpp"

#include <cstdio>
#include <random>

#include "clifford.hpp"
#include "closed_form.hpp"
#include "dirac.hpp"

namespace qle::verify {

using clifford::Matrix;
using dirac::cd;
using dirac::Vec;

namespace {

Check at_most(std::string name, double value, double hi) {
  Check c{std::move(name), value, -INFINITY, hi};
  c.passed = value <= hi;
  return c;
}

Check at_least(std::string name, double value, double lo) {
  Check c{std::move(name), value, lo, INFINITY};
  c.passed = value >= lo;
  return c;
}

Check within(std::string name, double value, double lo, double hi) {
  Check c{std::move(name), value, lo, hi};
  c.passed = value >= lo && value <= hi;
  return c;
}

geometry::General2D bumped_metric(double eps) {
  using geometry::Poly2;
  const Poly2 bump{{{1.0, 0, 0}, {-1.0, 2, 0}, {-1.0, 0, 2}}};
  geometry::General2D s;
  s.g11 = Poly2::constant(1.0) + (bump * Poly2{{{1.0, 0, 0}, {1.0, 1, 0}}}).scaled(eps);
  s.g12 = (bump * Poly2{{{1.0, 1, 1}}}).scaled(eps);
  s.g22 = Poly2::constant(1.0) + (bump * Poly2{{{1.0, 0, 2}}}).scaled(eps);
  return s;
}

geometry::ConformalFlat conformal(std::vector<double> coeffs) {
  geometry::ConformalFlat s;
  s.phi.f = geometry::ScalarFunction::PolyR2{std::move(coeffs)};
  return s;
}

// Sum of a few plane waves per fiber component, drawn once from the seed.
struct RandomField {
  struct Wave {
    double kx, ky;
    cd c;
  };
  std::vector<std::vector<Wave>> waves;

  RandomField(int fd, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> k(-2.0, 2.0);
    std::normal_distribution<double> nd;
    waves.resize(static_cast<std::size_t>(fd));
    for (auto& w : waves)
      for (int m = 0; m < 3; ++m) w.push_back({k(rng), k(rng), cd(nd(rng), nd(rng))});
  }

  Vec sample(const geometry::DiscreteDomain& d) const {
    const int fd = static_cast<int>(waves.size());
    Vec v(static_cast<Eigen::Index>(d.grid.nodes()) * fd);
    for (int n = 0; n < d.grid.nodes(); ++n)
      for (int a = 0; a < fd; ++a) {
        cd s = 0.0;
        for (const auto& w : waves[a]) s += w.c * std::polar(1.0, w.kx * d.x[n] + w.ky * d.y[n]);
        v(static_cast<Eigen::Index>(n) * fd + a) = s;
      }
    return v;
  }
};

std::vector<double> phi_coeffs(double a0, double a1, double a2) {
  // (1 - u)(a0 + a1 u + a2 u^2) in u = r^2
  return {a0, a1 - a0, a2 - a1, -a2};
}

// Laplacian of sum c_k u^k, u = r^2, is 4 sum k^2 c_k u^(k-1).
bool superharmonic(const std::vector<double>& c) {
  for (int i = 0; i <= 400; ++i) {
    const double u = i / 400.0;
    double lap = 0.0, p = 1.0;
    for (std::size_t k = 1; k < c.size(); ++k) {
      lap += 4.0 * static_cast<double>(k * k) * c[k] * p;
      p *= u;
    }
    if (lap > 0.0) return false;
  }
  return true;
}

}  // namespace

bool SuiteResult::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.passed; });
}

const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> names{"clifford", "identities", "kernel", "positivity", "agreement"};
  return names;
}

SuiteResult run_suite(const std::string& suite, std::uint64_t seed) {
  SuiteResult r;
  if (suite == "clifford")
    r = clifford_suite();
  else if (suite == "identities")
    r = identities_suite(seed);
  else if (suite == "kernel")
    r = kernel_suite(seed);
  else if (suite == "positivity")
    r = positivity_suite(seed);
  else if (suite == "agreement")
    r = agreement_suite();
  else
    throw ValidationError("unknown suite '" + suite + "' (clifford, identities, kernel, positivity, agreement)");
  r.seed = seed;
  return r;
}

SuiteResult clifford_suite() {
  SuiteResult out;
  out.suite = "clifford";
  for (int n : {2, 4}) {
    const auto rep = clifford::build_clifford_rep(n);
    const int d = rep.spinor_dim();
    const Matrix id = Matrix::Identity(d, d);
    const std::string tag = "n=" + std::to_string(n) + " ";
    double rel = 0.0, herm = 0.0, grading = 0.0;
    for (int a = 0; a < n; ++a) {
      herm = std::max(herm, (rep.gamma[a] - rep.gamma[a].adjoint()).norm());
      grading = std::max(grading, (rep.epsilon * rep.gamma[a] + rep.gamma[a] * rep.epsilon).norm());
      for (int b = 0; b < n; ++b) {
        const Matrix ac = rep.gamma[a] * rep.gamma[b] + rep.gamma[b] * rep.gamma[a];
        rel = std::max(rel, (ac - (a == b ? 2.0 : 0.0) * id).norm());
      }
    }
    out.checks.push_back(at_most(tag + "anticommutation", rel, 1e-12));
    out.checks.push_back(at_most(tag + "hermitian generators", herm, 1e-12));
    out.checks.push_back(at_most(tag + "grading anticommutes", grading, 1e-12));
    out.checks.push_back(at_most(tag + "grading squares to one", (rep.epsilon * rep.epsilon - id).norm(), 1e-12));
    out.checks.push_back(
        at_most(tag + "volume phase modulus", std::abs(std::abs(clifford::volume_phase(rep)) - 1.0), 1e-12));

    double dict = 0.0;
    std::mt19937_64 rng(7);
    std::normal_distribution<double> nd;
    std::map<clifford::MultiIndex, cd> coeffs;
    for (const auto& idx : clifford::all_multi_indices(n)) coeffs[idx] = cd(nd(rng), nd(rng));
    const auto back = clifford::endomorphism_coefficients(rep, clifford::form_endomorphism(rep, coeffs));
    for (const auto& [idx, c] : coeffs) dict = std::max(dict, std::abs(back.at(idx) - c));
    out.checks.push_back(at_most(tag + "form dictionary round trip", dict, 1e-12));

    const int D = rep.twisted_dim();
    const Matrix Id = Matrix::Identity(D, D);
    double inv = 0.0, proj = 0.0, odd = 0.0, hat = 0.0;
    for (double ang : {0.0, 0.4, 1.9, M_PI, 5.0}) {
      const auto b = clifford::boundary_involution(rep, ang);
      inv = std::max(inv, (b.T * b.T - Id).norm());
      proj = std::max({proj, (b.pi_plus * b.pi_plus - b.pi_plus).norm(), (b.pi_plus * b.pi_minus).norm(),
                       (b.pi_plus - b.pi_plus.adjoint()).norm()});
      odd = std::max(odd, (b.T * b.gamma_n + b.gamma_n * b.T).norm());
      for (std::size_t a = 0; a < b.gamma_t.size(); ++a)
        hat = std::max(hat, (b.gamma_t_hat[a] * b.gamma_t[a] + b.gamma_t[a] * b.gamma_t_hat[a]).norm());
      const auto P = clifford::chirality_projectors(rep, ang);
      proj = std::max({proj, (P.plus * P.plus - P.plus).norm(), (P.plus + P.minus - id).norm()});
      char label[64];
      std::snprintf(label, sizeof label, "rank of pi_plus at angle %.2f", ang);
      out.checks.push_back(within(tag + label,
                                  static_cast<double>(b.plus_basis.cols()), D / 2.0, D / 2.0));
    }
    out.checks.push_back(at_most(tag + "involution squares to one", inv, 1e-12));
    out.checks.push_back(at_most(tag + "projector identities", proj, 1e-12));
    out.checks.push_back(at_most(tag + "normal Clifford action is odd", odd, 1e-12));
    out.checks.push_back(at_most(tag + "background action anticommutes", hat, 1e-12));
  }
  return out;
}

SuiteResult identities_suite(std::uint64_t seed) {
  SuiteResult out;
  out.suite = "identities";
  const auto f = dirac::fiber_action(clifford::build_clifford_rep(2), dirac::Path::Twisted);
  const RandomField a(f.dim, seed), b(f.dim, seed + 1000);
  const geometry::General2D spec = bumped_metric(0.3);
  std::vector<double> green, lich;
  for (int nr : {12, 24, 48}) {
    const auto d = geometry::build_domain(spec, {nr, 2 * nr});
    const Vec pa = a.sample(d), pb = b.sample(d);
    green.push_back(dirac::green_residual(d, f, pa, pb));
    lich.push_back(dirac::lichnerowicz_residual(d, f, pa));
  }
  for (std::size_t i = 0; i + 1 < green.size(); ++i) {
    const std::string lv = " (nr " + std::to_string(12 << i) + " -> " + std::to_string(24 << i) + ")";
    out.checks.push_back(within("green decay factor" + lv, green[i] / green[i + 1], 1.5, 3.0));
    out.checks.push_back(within("lichnerowicz decay factor" + lv, lich[i] / lich[i + 1], 1.5, 3.0));
  }
  out.checks.push_back(at_most("green residual at nr 48", green.back(), 1e-2));
  out.checks.push_back(at_most("lichnerowicz residual at nr 48", lich.back(), 1e-1));
  return out;
}

SuiteResult kernel_suite(std::uint64_t seed) {
  SuiteResult out;
  out.suite = "kernel";
  bvp::SolverOptions opts;
  opts.seed = seed;
  const auto f = dirac::fiber_action(clifford::build_clifford_rep(2), dirac::Path::Twisted);

  {
    const auto d = geometry::build_domain(geometry::FlatDisk{1.0}, {32, 64});
    const bvp::System sys(d, f, dirac::BoundaryCondition::Kind::PiPlus);
    const auto ker = bvp::kernel_basis(sys, opts);
    out.checks.push_back(within("flat disk kernel dimension", ker.dim, 1, 1));
    if (ker.dim >= 1) {
      const Matrix& eps = f.rep.epsilon;
      const Vec vol = dirac::constant_field(d.grid.nodes(), Eigen::Map<const Vec>(eps.data(), eps.size()));
      const Vec& eta = ker.basis[0];
      const double cosine = std::abs(dirac::l2_inner(d, f, eta, vol)) /
                            std::sqrt(dirac::l2_inner(d, f, eta, eta).real() * dirac::l2_inner(d, f, vol, vol).real());
      out.checks.push_back(at_least("flat disk kernel cosine with the volume element", cosine, 0.99));
    }

    // two seeds: particular solutions differ by an element of the kernel span
    bvp::SolverOptions other = opts;
    other.seed = seed + 1;
    const auto ker2 = bvp::kernel_basis(sys, other);
    Vec one(4);
    one << 1.0, 0.0, 0.0, 1.0;
    auto particular = [&](const bvp::KernelInfo& k) {
      const auto data = bvp::project_boundary_data(d, f, bvp::unit_data(d, f, {"outer"}, one), k);
      return bvp::solve_bvp(sys, data, k, opts).psi;
    };
    if (ker.dim == ker2.dim) {
      Vec diff = particular(ker) - particular(ker2);
      for (const Vec& eta : ker.basis) diff -= dirac::l2_inner(d, f, eta, diff) * eta;
      out.checks.push_back(at_most("seed change moves the solution only within the kernel",
                                   std::sqrt(dirac::l2_inner(d, f, diff, diff).real()), 1e-8));
    } else {
      out.checks.push_back(at_most("kernel dimension independent of the seed", 1.0, 0.0));
    }
  }
  {
    geometry::ConformalFlat annulus;
    annulus.topology = geometry::Topology::Annulus;
    annulus.r_in = 0.5;
    annulus.phi.f = geometry::ScalarFunction::PolyR2{{0.0}};
    const auto d = geometry::build_domain(annulus, {24, 48});
    const bvp::System sys(d, f, dirac::BoundaryCondition::Kind::PiPlus);
    out.checks.push_back(within("flat annulus kernel dimension", bvp::kernel_basis(sys, opts).dim, 2, 2));
  }
  {
    const auto d = geometry::build_domain(conformal(phi_coeffs(0.5, 0.0, 0.0)), {24, 48});
    const bvp::System sys(d, f, dirac::BoundaryCondition::Kind::PiPlus);
    const auto ker = bvp::kernel_basis(sys, opts);
    out.checks.push_back(within("conformal disk kernel dimension", ker.dim, 1, 1));
    out.checks.push_back(at_least("conformal disk kernel gap ratio", ker.gap_ratio, opts.kernel_gap));
  }
  return out;
}

std::vector<geometry::ConformalFlat> positive_curvature_specs(std::uint64_t seed, int count) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u0(0.0, 1.0), u(-1.0, 1.0);
  std::vector<geometry::ConformalFlat> out;
  while (static_cast<int>(out.size()) < count) {
    const auto c = phi_coeffs(u0(rng), u(rng), u(rng));
    if (superharmonic(c)) out.push_back(conformal(c));
  }
  return out;
}

SuiteResult positivity_suite(std::uint64_t seed, int count, geometry::Resolution res) {
  SuiteResult out;
  out.suite = "positivity";
  const auto specs = positive_curvature_specs(seed, count);
  double min_energy = INFINITY, min_bulk = INFINITY, min_R = INFINITY;
  for (const auto& s : specs) {
    const auto d = geometry::build_domain(s, res);
    for (double R : geometry::scalar_curvature(d)) min_R = std::min(min_R, R);
    const auto rep = bvp::quasilocal_energy(s, {}, res);
    if (rep.neg_inf) {
      min_energy = -INFINITY;
      continue;
    }
    min_energy = std::min(min_energy, rep.energy);
    min_bulk = std::min(min_bulk, rep.method_values.at("bulk"));
  }
  out.checks.push_back(at_least("scalar curvature at the nodes", min_R, 0.0));
  out.checks.push_back(at_least("smallest reported energy", min_energy, -1e-4));
  out.checks.push_back(at_least("smallest bulk-formula energy", min_bulk, 0.0));
  out.notes.push_back(std::to_string(specs.size()) + " specs at (" + std::to_string(res.nr) + "," +
                      std::to_string(res.nt) + ")");
  return out;
}

SuiteResult agreement_suite(geometry::Resolution coarse, int levels) {
  SuiteResult out;
  out.suite = "agreement";
  const std::vector<std::pair<std::string, geometry::MetricSpec>> specs{
      {"flat disk", geometry::FlatDisk{1.0}}, {"conformal disk", conformal(phi_coeffs(0.5, 0.0, 0.0))}};
  for (const auto& [label, spec] : specs) {
    std::vector<double> spread;
    double E = 0.0, tol = 0.0;
    for (int l = 0; l < levels; ++l) {
      const geometry::Resolution res{coarse.nr << l, coarse.nt << l};
      const auto rep = bvp::quasilocal_energy(spec, {}, res);
      const auto& v = rep.method_values;
      double worst = 0.0;
      for (const auto& [k, delta] : rep.cross_check_deltas) worst = std::max(worst, delta);
      spread.push_back(worst);
      E = v.at("bulk");
      tol = 0.05 * std::abs(E) + 1e-4;
    }
    out.checks.push_back(at_most(label + ": pairwise method spread at the finest level", spread.back(), tol));
    // the decay rate is only meaningful above roundoff
    if (spread.size() >= 2 && spread[spread.size() - 2] > 1e-10) {
      const double order = std::log2(spread[spread.size() - 2] / spread.back());
      out.checks.push_back(at_least(label + ": observed order of the method spread", order, 0.8));
    }
  }
  return out;
}

ConvergenceResult run_convergence(const config::RunConfig& cfg, int levels) {
  if (levels < 2 || levels > 6) throw ValidationError("levels must be between 2 and 6");
  const auto d = geometry::build_domain(cfg.spec, {8, 16});
  if (!cfg.C.empty() && cfg.C.size() != d.boundary.size())
    throw ValidationError("no closed-form oracle for a proper boundary subset");
  ConvergenceResult out;
  closed_form::ClosedFormResult cf;
  if (const auto* s = std::get_if<geometry::FlatDisk>(&cfg.spec)) {
    geometry::ConformalFlat c;
    c.r_out = s->radius;
    c.phi.f = geometry::ScalarFunction::PolyR2{{0.0}};
    cf = closed_form::conformal_energy(c);
  } else if (const auto* s = std::get_if<geometry::ConformalFlat>(&cfg.spec)) {
    cf = closed_form::conformal_energy(*s);
  } else if (const auto* s = std::get_if<geometry::RotSym>(&cfg.spec)) {
    cf = closed_form::rotsym_energy(*s);
  } else {
    throw ValidationError("no closed-form oracle for a general metric");
  }
  if (cf.neg_inf) throw ValidationError("the closed-form oracle is unbounded below; errors are undefined");
  out.oracle = cf.energy;
  out.oracle_formula = closed_form::formula_name(cf.formula);

  const bvp::Method method = cfg.methods.front() == bvp::Method::ClosedForm ? bvp::Method::Bulk : cfg.methods.front();
  bvp::SolverOptions opts;
  opts.seed = cfg.seed;
  for (int l = 0; l < levels; ++l) {
    ConvergenceRow row;
    row.resolution = {cfg.resolution.nr << l, cfg.resolution.nt << l};
    const auto rep = bvp::quasilocal_energy(cfg.spec, cfg.C, row.resolution, cfg.path, method, opts);
    row.energy = rep.neg_inf ? -INFINITY : rep.energy;
    row.error = std::abs(row.energy - out.oracle);
    row.runtime_seconds = rep.runtime_seconds;
    if (!out.rows.empty()) row.order = std::log2(out.rows.back().error / row.error);
    out.rows.push_back(row);
  }
  return out;
}

config::json to_json(const SuiteResult& r) {
  config::json j;
  j["suite"] = r.suite;
  j["seed"] = r.seed;
  j["passed"] = r.passed();
  j["checks"] = config::json::array();
  for (const auto& c : r.checks) {
    config::json cj{{"name", c.name}, {"value", c.value}, {"passed", c.passed}, {"margin", c.margin()}};
    if (std::isfinite(c.lo)) cj["min"] = c.lo;
    if (std::isfinite(c.hi)) cj["max"] = c.hi;
    j["checks"].push_back(cj);
  }
  j["notes"] = r.notes;
  return j;
}

config::json to_json(const ConvergenceResult& r, const config::RunConfig& cfg) {
  config::json j;
  j["oracle"] = r.oracle;
  j["oracle_formula"] = r.oracle_formula;
  j["levels"] = config::json::array();
  for (const auto& row : r.rows) {
    config::json rj{{"resolution", {{"nr", row.resolution.nr}, {"nt", row.resolution.nt}}},
                    {"error", row.error},
                    {"runtime_seconds", row.runtime_seconds}};
    if (std::isfinite(row.energy))
      rj["energy"] = row.energy;
    else
      rj["energy"] = "NEG_INF";
    // null when either error is zero to roundoff
    if (&row != &r.rows.front()) rj["observed_order"] = row.order;
    j["levels"].push_back(rj);
  }
  j["config_echo"] = cfg.echo;
  return j;
}

}  // namespace qle::verify
