#pragma once

#include <optional>
#include <string>
#include <vector>

#include "cartan/catalog.hpp"
#include "cartan/cone.hpp"
#include "cartan/serialize.hpp"

namespace cartan {

/// A validated run configuration. See docs/config.md for the schema.
struct RunConfig {
  nlohmann::json manifold;  // catalog name or descriptor
  CatalogEntry entry;       // traits used by `verify <config>`
  Vec base;
  Protocol protocol;
  bool seed_given = false;
  Tolerances tol;
  std::string output;
  ConeOptions cone;
  std::optional<Vec> p_star;
  nlohmann::json develop;
  std::optional<LoopSpec> evidence_loop;
  int k_max = 5;
  std::vector<std::string> checks;
};

/// Throws ConfigInvalid on any schema violation.
RunConfig parse_config(const nlohmann::json& j);
RunConfig load_config(const std::string& path);
nlohmann::json load_json_file(const std::string& path);

/// Final validation after command-line overrides: base inside the chart and a
/// seed whenever the protocol draws random polygons.
void finalize_config(RunConfig& cfg, const MetricChart& chart);

/// The curve named by the "develop" block of a config.
Curve develop_curve_of(const RunConfig& cfg, const MetricChart& chart);

LoopSpec loop_from_json(const nlohmann::json& j, const Vec& base);

enum class CheckStatus { Pass, Fail, Skip };
std::string_view to_string(CheckStatus s);

struct CheckInfo {
  std::string name;
  std::string statement;
};

/// Verification checks in report order.
const std::vector<CheckInfo>& suite_checks();

struct CheckResult {
  std::string name;
  std::string statement;
  CheckStatus status = CheckStatus::Skip;
  Json residuals = Json::object();
  std::string detail;
};

struct SuiteOptions {
  std::vector<CatalogEntry> entries;
  Protocol protocol;
  Tolerances tol;
  std::vector<std::string> only;  // empty: every check
  double rolling_step = 1e-4;
  int k_max = 5;
  int bundle_trials = 100;
};

struct SuiteReport {
  std::vector<CheckResult> checks;
  int passed = 0;
  int failed = 0;
  int skipped = 0;
  bool ok() const { return failed == 0; }
};

SuiteReport run_suite(const SuiteOptions& options);
Json to_json(const SuiteReport& report, const SuiteOptions& options);

}  // namespace cartan
