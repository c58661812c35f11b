// SPDX-License-Identifier: Apache-2.0

#include "config.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace qle::config {

namespace {

// Field path of the value being parsed, for error locations.
struct Cursor {
  const std::string* text;
  std::vector<std::string> path;
};

std::pair<int, int> line_col(const std::string& text, std::size_t pos) {
  int line = 1, col = 1;
  for (std::size_t i = 0; i < pos && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

std::string line_text(const std::string& text, int line) {
  std::istringstream in(text);
  std::string s;
  for (int i = 0; i < line && std::getline(in, s); ++i) {
  }
  return s;
}

[[noreturn]] void fail(const Cursor& cur, const std::string& msg) {
  // position of the innermost key along the path, searched in order
  std::size_t pos = 0;
  bool found = false;
  for (const auto& key : cur.path) {
    const std::size_t p = cur.text->find("\"" + key + "\"", pos);
    if (p == std::string::npos) break;
    pos = p;
    found = true;
  }
  std::string where;
  for (const auto& k : cur.path) where += "/" + k;
  if (where.empty()) where = "/";
  const auto [line, col] = found ? line_col(*cur.text, pos) : std::pair{1, 1};
  throw ConfigError(where + ": " + msg, line, col, line_text(*cur.text, line));
}

struct Scope {
  Cursor& cur;
  Scope(Cursor& c, const std::string& key) : cur(c) { cur.path.push_back(key); }
  ~Scope() { cur.path.pop_back(); }
};

const json& require(Cursor& cur, const json& obj, const std::string& key) {
  if (!obj.is_object()) fail(cur, "expected an object");
  const auto it = obj.find(key);
  if (it == obj.end()) fail(cur, "missing field '" + key + "'");
  return *it;
}

double number(Cursor& cur, const json& j) {
  if (!j.is_number()) fail(cur, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) fail(cur, "value is not finite");
  return v;
}

int integer(Cursor& cur, const json& j) {
  if (!j.is_number_integer()) fail(cur, "expected an integer");
  return j.get<int>();
}

std::string string(Cursor& cur, const json& j) {
  if (!j.is_string()) fail(cur, "expected a string");
  return j.get<std::string>();
}

std::vector<double> numbers(Cursor& cur, const json& j) {
  if (!j.is_array() || j.empty()) fail(cur, "expected a nonempty array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    Scope s(cur, std::to_string(i));
    out.push_back(number(cur, j[i]));
  }
  return out;
}

double number_or(Cursor& cur, const json& obj, const std::string& key, double fallback) {
  if (!obj.contains(key)) return fallback;
  Scope s(cur, key);
  return number(cur, obj.at(key));
}

geometry::RadialFunction sampled(Cursor& cur, const json& j) {
  double r0, dr;
  std::vector<double> values;
  {
    Scope s(cur, "r0");
    r0 = number(cur, require(cur, j, "r0"));
  }
  {
    Scope s(cur, "dr");
    dr = number(cur, require(cur, j, "dr"));
  }
  {
    Scope s(cur, "values");
    values = numbers(cur, require(cur, j, "values"));
  }
  try {
    return geometry::RadialFunction::uniform(r0, dr, std::move(values));
  } catch (const std::exception& e) {
    fail(cur, e.what());
  }
}

geometry::Poly2 poly2(Cursor& cur, const json& j) {
  if (j.is_number()) return geometry::Poly2::constant(number(cur, j));
  if (!j.is_array()) fail(cur, "expected a number or an array of [c, px, py] terms");
  geometry::Poly2 p;
  for (std::size_t i = 0; i < j.size(); ++i) {
    Scope s(cur, std::to_string(i));
    const json& t = j[i];
    if (!t.is_array() || t.size() != 3) fail(cur, "expected [c, px, py]");
    const int px = integer(cur, t[1]), py = integer(cur, t[2]);
    if (px < 0 || py < 0) fail(cur, "exponents must be nonnegative");
    p.terms.push_back({number(cur, t[0]), px, py});
  }
  return p;
}

geometry::ScalarFunction scalar(Cursor& cur, const json& j) {
  geometry::ScalarFunction f;
  std::string kind;
  {
    Scope s(cur, "kind");
    kind = string(cur, require(cur, j, "kind"));
  }
  if (kind == "poly_r2") {
    Scope s(cur, "coeffs");
    f.f = geometry::ScalarFunction::PolyR2{numbers(cur, require(cur, j, "coeffs"))};
  } else if (kind == "poly2") {
    Scope s(cur, "terms");
    f.f = poly2(cur, require(cur, j, "terms"));
  } else if (kind == "sampled") {
    f.f = sampled(cur, j);
  } else {
    Scope s(cur, "kind");
    fail(cur, "unknown function kind '" + kind + "' (poly_r2, poly2, sampled)");
  }
  return f;
}

geometry::Profile profile(Cursor& cur, const json& j) {
  geometry::Profile p;
  std::string kind;
  {
    Scope s(cur, "kind");
    kind = string(cur, require(cur, j, "kind"));
  }
  if (kind == "linear") {
    p.kind = geometry::Profile::Kind::Linear;
  } else if (kind == "sin") {
    p.kind = geometry::Profile::Kind::Sin;
  } else if (kind == "sinh") {
    p.kind = geometry::Profile::Kind::Sinh;
  } else if (kind == "sampled") {
    p.kind = geometry::Profile::Kind::Sampled;
    p.samples = std::make_shared<const geometry::RadialFunction>(sampled(cur, j));
    return p;
  } else {
    Scope s(cur, "kind");
    fail(cur, "unknown profile kind '" + kind + "' (linear, sin, sinh, sampled)");
  }
  p.a = number_or(cur, j, "a", 1.0);
  return p;
}

geometry::Topology topology(Cursor& cur, const json& j) {
  if (!j.contains("topology")) return geometry::Topology::Disk;
  Scope s(cur, "topology");
  const std::string t = string(cur, j.at("topology"));
  if (t == "disk") return geometry::Topology::Disk;
  if (t == "annulus") return geometry::Topology::Annulus;
  fail(cur, "unknown topology '" + t + "' (disk, annulus)");
}

geometry::MetricSpec spec_at(Cursor& cur, const json& j) {
  if (!j.is_object()) fail(cur, "expected an object");
  std::string type;
  {
    Scope s(cur, "type");
    type = string(cur, require(cur, j, "type"));
  }
  geometry::MetricSpec spec;
  if (type == "flat_disk") {
    spec = geometry::FlatDisk{number_or(cur, j, "radius", 1.0)};
  } else if (type == "conformal_flat") {
    geometry::ConformalFlat c;
    c.topology = topology(cur, j);
    c.r_in = number_or(cur, j, "r_in", 0.0);
    c.r_out = number_or(cur, j, "r_out", 1.0);
    Scope s(cur, "phi");
    c.phi = scalar(cur, require(cur, j, "phi"));
    spec = c;
  } else if (type == "rotsym") {
    geometry::RotSym r;
    {
      Scope s(cur, "n");
      r.n = j.contains("n") ? integer(cur, j.at("n")) : 2;
    }
    r.rho_max = number_or(cur, j, "rho_max", 1.0);
    Scope s(cur, "profile");
    r.s = profile(cur, require(cur, j, "profile"));
    spec = r;
  } else if (type == "general2d") {
    geometry::General2D g;
    g.topology = topology(cur, j);
    g.r_in = number_or(cur, j, "r_in", 0.0);
    g.r_out = number_or(cur, j, "r_out", 1.0);
    auto component = [&](const char* key, geometry::Poly2& target) {
      Scope s(cur, key);
      target = poly2(cur, require(cur, j, key));
    };
    component("g11", g.g11);
    component("g12", g.g12);
    component("g22", g.g22);
    spec = g;
  } else {
    Scope s(cur, "type");
    fail(cur, "unknown spec type '" + type + "' (flat_disk, conformal_flat, rotsym, general2d)");
  }
  try {
    geometry::validate_spec(spec);
  } catch (const ValidationError& e) {
    fail(cur, e.what());
  }
  return spec;
}

}  // namespace

ConfigError::ConfigError(const std::string& msg, int line, int column, std::string context)
    : ValidationError("line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + msg),
      line_(line),
      column_(column),
      context_(std::move(context)) {}

geometry::MetricSpec parse_spec(const json& j) {
  const std::string text = j.dump();
  Cursor cur{&text, {}};
  return spec_at(cur, j);
}

RunConfig parse_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    const auto [line, col] = line_col(text, e.byte == 0 ? 0 : e.byte - 1);
    std::string msg = e.what();
    // drop the library's "[json.exception.parse_error.101] parse error at line 1, column 2: " prefix
    const std::size_t p = msg.rfind(": ");
    if (p != std::string::npos) msg = msg.substr(p + 2);
    throw ConfigError("syntax error: " + msg, line, col, line_text(text, line));
  }
  Cursor cur{&text, {}};
  if (!j.is_object()) fail(cur, "configuration must be a JSON object");
  static const std::vector<std::string> known{"spec", "C", "resolution", "path", "methods", "output", "seed"};
  for (auto it = j.begin(); it != j.end(); ++it)
    if (std::find(known.begin(), known.end(), it.key()) == known.end()) {
      Scope s(cur, it.key());
      fail(cur, "unknown field");
    }

  RunConfig cfg;
  {
    Scope s(cur, "spec");
    cfg.spec = spec_at(cur, require(cur, j, "spec"));
  }
  if (j.contains("C")) {
    Scope s(cur, "C");
    const json& c = j.at("C");
    if (c.is_string()) {
      if (c.get<std::string>() != "all") cfg.C.push_back(c.get<std::string>());
    } else if (c.is_array() && !c.empty()) {
      for (std::size_t i = 0; i < c.size(); ++i) {
        Scope si(cur, std::to_string(i));
        cfg.C.push_back(string(cur, c[i]));
      }
    } else {
      fail(cur, "expected \"all\", a component name or a nonempty array of names");
    }
  }
  if (j.contains("resolution")) {
    Scope s(cur, "resolution");
    const json& r = j.at("resolution");
    {
      Scope sn(cur, "nr");
      cfg.resolution.nr = integer(cur, require(cur, r, "nr"));
    }
    {
      Scope sn(cur, "nt");
      cfg.resolution.nt = integer(cur, require(cur, r, "nt"));
    }
    if (cfg.resolution.nr < 8 || cfg.resolution.nt < 16 || cfg.resolution.nt % 2 != 0)
      fail(cur, "resolution requires nr >= 8 and an even nt >= 16");
    if (cfg.resolution.nr > 512 || cfg.resolution.nt > 1024) fail(cur, "resolution exceeds nr <= 512, nt <= 1024");
  }
  if (j.contains("path")) {
    Scope s(cur, "path");
    try {
      cfg.path = bvp::parse_path(string(cur, j.at("path")));
    } catch (const ValidationError& e) {
      fail(cur, e.what());
    }
  }
  if (j.contains("methods")) {
    Scope s(cur, "methods");
    const json& m = j.at("methods");
    if (!m.is_array() || m.empty()) fail(cur, "expected a nonempty array of method names");
    cfg.methods.clear();
    for (std::size_t i = 0; i < m.size(); ++i) {
      Scope si(cur, std::to_string(i));
      try {
        cfg.methods.push_back(bvp::parse_method(string(cur, m[i])));
      } catch (const ValidationError& e) {
        fail(cur, e.what());
      }
    }
  }
  if (j.contains("output")) {
    Scope s(cur, "output");
    cfg.output = string(cur, j.at("output"));
  }
  if (j.contains("seed")) {
    Scope s(cur, "seed");
    if (!j.at("seed").is_number_unsigned()) fail(cur, "expected a nonnegative integer");
    cfg.seed = j.at("seed").get<std::uint64_t>();
  }

  // selector names must exist; a coarse domain is enough to list them
  if (!cfg.C.empty()) {
    Scope s(cur, "C");
    const auto d = geometry::build_domain(cfg.spec, {8, 16});
    for (const auto& name : cfg.C) {
      try {
        d.component(name);
      } catch (const ValidationError& e) {
        fail(cur, e.what());
      }
    }
  }

  cfg.echo = j;
  cfg.echo["C"] = cfg.C.empty() ? json("all") : json(cfg.C);
  cfg.echo["resolution"] = {{"nr", cfg.resolution.nr}, {"nt", cfg.resolution.nt}};
  cfg.echo["path"] = bvp::path_name(cfg.path);
  cfg.echo["methods"] = json::array();
  for (auto m : cfg.methods) cfg.echo["methods"].push_back(bvp::method_name(m));
  cfg.echo["seed"] = cfg.seed;
  return cfg;
}

json report_json(const bvp::EnergyReport& r, const RunConfig& cfg) {
  json out;
  if (r.neg_inf)
    out["energy"] = "NEG_INF";
  else
    out["energy"] = r.energy;
  out["neg_inf"] = r.neg_inf;
  out["flagged"] = r.flagged;
  out["method"] = bvp::method_name(r.method);
  out["path_used"] = bvp::path_name(r.path_used);
  out["method_values"] = json::object();
  for (const auto& [k, v] : r.method_values) out["method_values"][k] = v;
  out["cross_check_deltas"] = json::object();
  for (const auto& [k, v] : r.cross_check_deltas) out["cross_check_deltas"][k] = v;
  if (!r.spinor_values.empty()) {
    out["spinor_values"] = json::object();
    for (const auto& [k, v] : r.spinor_values) out["spinor_values"][k] = v;
  }
  out["kernel_dim"] = r.kernel.dim;
  out["singular_values"] = r.kernel.singular_values;
  out["kernel_threshold"] = r.kernel.threshold;
  out["kernel_gap_ratio"] = r.kernel.gap_ratio;
  out["kernel_ambiguous"] = r.kernel.ambiguous;
  out["data_modified"] = r.data_modified;
  out["brown_york"] = r.brown_york;
  if (r.closed_form) {
    const auto& c = *r.closed_form;
    json cf;
    if (c.neg_inf)
      cf["energy"] = "NEG_INF";
    else
      cf["energy"] = c.energy;
    cf["neg_inf"] = c.neg_inf;
    cf["formula"] = closed_form::formula_name(c.formula);
    cf["quadrature_error"] = c.quadrature_error;
    if (c.formula != closed_form::Formula::RotSym) {
      cf["boundary_form"] = c.boundary_form;
      cf["interior_form"] = c.interior_form;
      cf["min_normal_derivative"] = c.min_normal_derivative;
    }
    out["closed_form"] = cf;
  }
  out["residuals"] = json::object();
  for (const auto& [k, v] : r.residuals) out["residuals"][k] = v;
  out["resolution"] = {{"nr", r.resolution.nr}, {"nt", r.resolution.nt}};
  out["runtime_seconds"] = r.runtime_seconds;
  out["notes"] = r.notes;
  out["config_echo"] = cfg.echo;
  return out;
}

json error_json(const std::exception& e) {
  json err;
  err["message"] = e.what();
  if (const auto* c = dynamic_cast<const ConfigError*>(&e)) {
    err["kind"] = "validation";
    err["line"] = c->line();
    err["column"] = c->column();
    err["context"] = c->context();
  } else if (const auto* s = dynamic_cast<const SolverError*>(&e)) {
    err["kind"] = "solver";
    err["residuals"] = {{"dirac", s->dirac_residual()}, {"boundary", s->boundary_residual()}};
  } else if (dynamic_cast<const ValidationError*>(&e)) {
    err["kind"] = "validation";
  } else if (dynamic_cast<const UnsupportedError*>(&e)) {
    err["kind"] = "unsupported";
  } else {
    err["kind"] = "internal";
  }
  return json{{"error", err}};
}

namespace {

void write(std::string& out, const json& j, int indent, int level) {
  const std::string pad = indent > 0 ? std::string(static_cast<std::size_t>(indent * (level + 1)), ' ') : "";
  const std::string close = indent > 0 ? std::string(static_cast<std::size_t>(indent * level), ' ') : "";
  const char* nl = indent > 0 ? "\n" : "";
  switch (j.type()) {
    case json::value_t::object: {
      if (j.empty()) {
        out += "{}";
        return;
      }
      out += "{";
      out += nl;
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) {
          out += ",";
          out += nl;
        }
        first = false;
        out += pad + json(it.key()).dump() + (indent > 0 ? ": " : ":");
        write(out, it.value(), indent, level + 1);
      }
      out += nl + close + "}";
      return;
    }
    case json::value_t::array: {
      if (j.empty()) {
        out += "[]";
        return;
      }
      out += "[";
      out += nl;
      for (std::size_t i = 0; i < j.size(); ++i) {
        if (i > 0) {
          out += ",";
          out += nl;
        }
        out += pad;
        write(out, j[i], indent, level + 1);
      }
      out += nl + close + "]";
      return;
    }
    case json::value_t::number_float: {
      const double v = j.get<double>();
      if (!std::isfinite(v)) {
        out += "null";
        return;
      }
      char buf[40];
      std::snprintf(buf, sizeof buf, "%.17g", v);
      out += buf;
      // keep a float recognizable as one
      if (std::string(buf).find_first_of(".eEn") == std::string::npos) out += ".0";
      return;
    }
    default:
      out += j.dump();
  }
}

}  // namespace

std::string dump(const json& j, int indent) {
  std::string out;
  write(out, j, indent, 0);
  return out;
}

}  // namespace qle::config
