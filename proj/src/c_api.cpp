// SPDX-License-Identifier: Apache-2.0

#include "qle/qle.h"

#include <cmath>
#include <string>

#include "config.hpp"
#include "verify.hpp"

struct qle_result {
  std::string json;
  std::string output;
  double energy = NAN;
  int kernel_dim = -1;
};

namespace {

thread_local std::string last_error;

qle_status status_of(const std::exception& e) {
  if (dynamic_cast<const qle::ValidationError*>(&e)) return QLE_ERR_VALIDATION;
  if (dynamic_cast<const qle::SolverError*>(&e)) return QLE_ERR_SOLVER;
  if (dynamic_cast<const qle::UnsupportedError*>(&e)) return QLE_ERR_UNSUPPORTED;
  return QLE_ERR_INTERNAL;
}

// Runs body, mapping exceptions to a status and an error document in *out.
template <class F>
qle_status guarded(qle_result** out, F&& body) {
  if (!out) {
    last_error = "null output pointer";
    return QLE_ERR_ARGUMENT;
  }
  *out = nullptr;
  last_error.clear();
  try {
    auto* r = new qle_result;
    try {
      const qle_status s = body(*r);
      *out = r;
      return s;
    } catch (const std::exception& e) {
      last_error = e.what();
      r->json = qle::config::dump(qle::config::error_json(e));
      *out = r;
      return status_of(e);
    }
  } catch (const std::exception& e) {
    last_error = e.what();
    return QLE_ERR_INTERNAL;
  }
}

}  // namespace

extern "C" {

const char* qle_version(void) { return "1.0.0"; }

const char* qle_last_error(void) { return last_error.c_str(); }

qle_status qle_compute(const char* config_json, qle_result** out) {
  if (!config_json) {
    last_error = "null configuration";
    return QLE_ERR_ARGUMENT;
  }
  return guarded(out, [&](qle_result& r) {
    const auto cfg = qle::config::parse_config(config_json);
    r.output = cfg.output;
    qle::bvp::SolverOptions opts;
    opts.seed = cfg.seed;
    const auto rep =
        qle::bvp::quasilocal_energy(cfg.spec, cfg.C, cfg.resolution, cfg.path, cfg.methods.front(), opts);
    r.energy = rep.neg_inf ? -INFINITY : rep.energy;
    r.kernel_dim = rep.kernel.dim;
    r.json = qle::config::dump(qle::config::report_json(rep, cfg));
    return QLE_OK;
  });
}

qle_status qle_verify(const char* suite, uint64_t seed, qle_result** out) {
  if (!suite) {
    last_error = "null suite name";
    return QLE_ERR_ARGUMENT;
  }
  return guarded(out, [&](qle_result& r) {
    const auto res = qle::verify::run_suite(suite, seed);
    r.json = qle::config::dump(qle::verify::to_json(res));
    if (res.passed()) return QLE_OK;
    last_error = "suite " + res.suite + " failed";
    return QLE_ERR_VERIFY_FAILED;
  });
}

qle_status qle_convergence(const char* config_json, int levels, qle_result** out) {
  if (!config_json) {
    last_error = "null configuration";
    return QLE_ERR_ARGUMENT;
  }
  return guarded(out, [&](qle_result& r) {
    const auto cfg = qle::config::parse_config(config_json);
    r.output = cfg.output;
    const auto res = qle::verify::run_convergence(cfg, levels);
    if (!res.rows.empty()) r.energy = res.rows.back().energy;
    r.json = qle::config::dump(qle::verify::to_json(res, cfg));
    return QLE_OK;
  });
}

const char* qle_result_json(const qle_result* r) { return r ? r->json.c_str() : ""; }

double qle_result_energy(const qle_result* r) { return r ? r->energy : NAN; }

int qle_result_kernel_dim(const qle_result* r) { return r ? r->kernel_dim : -1; }

const char* qle_result_output_path(const qle_result* r) { return r ? r->output.c_str() : ""; }

void qle_result_free(qle_result* r) { delete r; }

}  // extern "C"
