// SPDX-License-Identifier: Apache-2.0
//
// Exercises the shared library through its C header only.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <string>

#include <json.hpp>

#include "qle/qle.h"

using nlohmann::json;

namespace {

const char* kFlat = R"({"spec": {"type": "flat_disk"}, "resolution": {"nr": 16, "nt": 32}})";

json without_runtime(json j) {
  j.erase("runtime_seconds");
  return j;
}

}  // namespace

TEST_CASE("version string") { CHECK(std::string(qle_version()).size() > 0); }

TEST_CASE("compute on the flat disk") {
  qle_result* r = nullptr;
  REQUIRE(qle_compute(kFlat, &r) == QLE_OK);
  REQUIRE(r != nullptr);
  CHECK(std::abs(qle_result_energy(r)) <= 5e-3);
  CHECK(qle_result_kernel_dim(r) == 1);
  CHECK(std::string(qle_result_output_path(r)).empty());
  const json j = json::parse(qle_result_json(r));
  CHECK(j["kernel_dim"] == 1);
  CHECK(j["config_echo"]["resolution"]["nr"] == 16);
  qle_result_free(r);
}

TEST_CASE("reports are identical across reruns apart from the timing") {
  qle_result *a = nullptr, *b = nullptr;
  REQUIRE(qle_compute(kFlat, &a) == QLE_OK);
  REQUIRE(qle_compute(kFlat, &b) == QLE_OK);
  const json ja = json::parse(qle_result_json(a)), jb = json::parse(qle_result_json(b));
  CHECK(without_runtime(ja).dump() == without_runtime(jb).dump());

  // the echoed configuration reproduces the report
  qle_result* c = nullptr;
  REQUIRE(qle_compute(ja["config_echo"].dump().c_str(), &c) == QLE_OK);
  CHECK(without_runtime(json::parse(qle_result_json(c))).dump() == without_runtime(ja).dump());
  qle_result_free(a);
  qle_result_free(b);
  qle_result_free(c);
}

TEST_CASE("unbounded energy") {
  qle_result* r = nullptr;
  REQUIRE(qle_compute(R"({"spec": {"type": "conformal_flat", "phi": {"kind": "poly_r2", "coeffs": [-0.5, 0.5]}},
                          "resolution": {"nr": 16, "nt": 32}})",
                      &r) == QLE_OK);
  CHECK(std::isinf(qle_result_energy(r)));
  CHECK(qle_result_energy(r) < 0);
  CHECK(json::parse(qle_result_json(r))["energy"] == "NEG_INF");
  qle_result_free(r);
}

TEST_CASE("validation failures still produce an error document") {
  qle_result* r = nullptr;
  CHECK(qle_compute("{\"spec\": {\"type\": \"torus\"}}", &r) == QLE_ERR_VALIDATION);
  REQUIRE(r != nullptr);
  const json j = json::parse(qle_result_json(r));
  CHECK(j["error"]["kind"] == "validation");
  CHECK(j["error"]["line"] == 1);
  CHECK(std::string(qle_last_error()).find("torus") != std::string::npos);
  qle_result_free(r);

  CHECK(qle_compute("{", &r) == QLE_ERR_VALIDATION);
  qle_result_free(r);
}

TEST_CASE("unsupported requests") {
  qle_result* r = nullptr;
  CHECK(qle_compute(R"({"spec": {"type": "general2d", "g11": 1, "g12": 0, "g22": 1},
                        "resolution": {"nr": 16, "nt": 32}, "methods": ["closed_form"]})",
                    &r) == QLE_ERR_UNSUPPORTED);
  CHECK(json::parse(qle_result_json(r))["error"]["kind"] == "unsupported");
  qle_result_free(r);
}

TEST_CASE("argument checks") {
  qle_result* r = nullptr;
  CHECK(qle_compute(nullptr, &r) == QLE_ERR_ARGUMENT);
  CHECK(qle_compute(kFlat, nullptr) == QLE_ERR_ARGUMENT);
  CHECK(qle_verify(nullptr, 1, &r) == QLE_ERR_ARGUMENT);
  CHECK(qle_result_json(nullptr) == std::string());
  CHECK(std::isnan(qle_result_energy(nullptr)));
  CHECK(qle_result_kernel_dim(nullptr) == -1);
  qle_result_free(nullptr);
}

TEST_CASE("verify and convergence") {
  qle_result* r = nullptr;
  REQUIRE(qle_verify("clifford", 1, &r) == QLE_OK);
  CHECK(json::parse(qle_result_json(r))["passed"] == true);
  qle_result_free(r);

  CHECK(qle_verify("nope", 1, &r) == QLE_ERR_VALIDATION);
  qle_result_free(r);

  REQUIRE(qle_convergence(R"({"spec": {"type": "flat_disk"}, "resolution": {"nr": 12, "nt": 24}})", 2, &r) ==
          QLE_OK);
  const json j = json::parse(qle_result_json(r));
  CHECK(j["levels"].size() == 2);
  CHECK(j["levels"][1].contains("observed_order"));
  qle_result_free(r);

  CHECK(qle_convergence(R"({"spec": {"type": "general2d", "g11": 1, "g12": 0, "g22": 1}})", 2, &r) ==
        QLE_ERR_VALIDATION);
  qle_result_free(r);
}
