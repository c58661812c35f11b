// SPDX-License-Identifier: Apache-2.0
//
// JSON run configuration and report serialization.

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "bvp.hpp"
#include "errors.hpp"
#include "geometry.hpp"

namespace qle::config {

using nlohmann::json;

/// Validation error located in the configuration text.
class ConfigError : public ValidationError {
 public:
  ConfigError(const std::string& msg, int line, int column, std::string context);
  int line() const { return line_; }
  int column() const { return column_; }
  const std::string& context() const { return context_; }

 private:
  int line_, column_;
  std::string context_;
};

struct RunConfig {
  geometry::MetricSpec spec;
  std::vector<std::string> C;  // empty selects every boundary component
  geometry::Resolution resolution{64, 128};
  bvp::PathChoice path = bvp::PathChoice::Auto;
  std::vector<bvp::Method> methods{bvp::Method::Bulk};
  std::string output;
  std::uint64_t seed = 1;
  json echo;  // normalized configuration, re-parseable
};

/// Throws ConfigError with line context on syntax errors and invalid fields.
RunConfig parse_config(const std::string& text);

geometry::MetricSpec parse_spec(const json& j);

json report_json(const bvp::EnergyReport& report, const RunConfig& cfg);
json error_json(const std::exception& e);

/// Serializes with every floating-point value printed to 17 significant digits.
std::string dump(const json& j, int indent = 2);

}  // namespace qle::config
