// SPDX-License-Identifier: Apache-2.0

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "qle/qle.h"

namespace {

int exit_code(qle_status s) {
  switch (s) {
    case QLE_OK: return 0;
    case QLE_ERR_VALIDATION:
    case QLE_ERR_UNSUPPORTED:
    case QLE_ERR_ARGUMENT: return 2;
    case QLE_ERR_SOLVER: return 3;
    case QLE_ERR_VERIFY_FAILED: return 4;
    default: return 1;
  }
}

bool read_file(const std::string& path, std::string& text) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return false;
  std::ostringstream ss;
  ss << in.rdbuf();
  text = ss.str();
  return true;
}

bool write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text << '\n';
  return static_cast<bool>(out);
}

// Releases the result and returns the process exit code.
int finish(qle_status s, qle_result* r, const std::string& out_path) {
  const std::string doc = r ? qle_result_json(r) : "";
  if (!out_path.empty() && !doc.empty()) {
    if (!write_file(out_path, doc)) {
      std::cerr << "error: cannot write " << out_path << "\n";
      qle_result_free(r);
      return 1;
    }
  } else if (!doc.empty()) {
    std::cout << doc << "\n";
  }
  if (s != QLE_OK) std::cerr << "error: " << qle_last_error() << "\n";
  qle_result_free(r);
  return exit_code(s);
}

void print_suite(const std::string& doc) {
  const auto j = nlohmann::json::parse(doc, nullptr, false);
  if (j.is_discarded() || !j.contains("checks")) return;
  for (const auto& c : j["checks"]) {
    std::fprintf(stderr, "%s  %-60s %.6g\n", c["passed"].get<bool>() ? "ok  " : "FAIL",
                 c["name"].get<std::string>().c_str(), c["value"].is_number() ? c["value"].get<double>() : NAN);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Quasilocal energy of compact Riemannian surfaces"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(qle_version()));

  std::string config_path, out_path, suite;
  std::uint64_t seed = 1;
  int levels = 3;

  auto* compute = app.add_subcommand("compute", "Compute the energy for a configuration");
  compute->add_option("--config", config_path, "Configuration JSON file")->required();
  compute->add_option("--out", out_path, "Report file (defaults to the configuration's output field, else stdout)");

  auto* verify = app.add_subcommand("verify", "Run a property suite");
  verify->add_option("--suite", suite, "Suite name")
      ->required()
      ->check(CLI::IsMember({"clifford", "identities", "kernel", "positivity", "agreement"}));
  verify->add_option("--seed", seed, "Random seed");
  verify->add_option("--out", out_path, "Summary file (defaults to stdout)");

  auto* convergence = app.add_subcommand("convergence", "Refinement study against the closed form");
  convergence->add_option("--config", config_path, "Configuration JSON file")->required();
  convergence->add_option("--levels", levels, "Number of grid levels")->check(CLI::Range(2, 6));
  convergence->add_option("--out", out_path, "Table file (defaults to stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  qle_result* r = nullptr;
  if (verify->parsed()) {
    const qle_status s = qle_verify(suite.c_str(), seed, &r);
    if (r) print_suite(qle_result_json(r));
    return finish(s, r, out_path);
  }

  std::string text;
  if (!read_file(config_path, text)) {
    std::cerr << "error: cannot read " << config_path << "\n";
    return 2;
  }
  if (compute->parsed()) {
    const qle_status s = qle_compute(text.c_str(), &r);
    if (out_path.empty() && r) out_path = qle_result_output_path(r);
    return finish(s, r, out_path);
  }
  const qle_status s = qle_convergence(text.c_str(), levels, &r);
  return finish(s, r, out_path);
}
