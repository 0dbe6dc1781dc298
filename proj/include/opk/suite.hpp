#pragma once

#include <string>
#include <vector>

#include "opk/io.hpp"

namespace opk {

struct SuiteConfig {
  std::string suite;
  Caps caps{3, 6, 0};
  FieldSpec field = FieldSpec::rationals();
  /// Operad expressions or .json paths; sequences for the coend suite. Empty selects the suite default.
  std::vector<std::string> operads;
  /// "free:d", "trivial:d", an algebra expression or a .json path.
  std::vector<std::string> algebras;
  /// "self" or "trivmod".
  std::vector<std::string> modules;
  std::string report_path;
  int jobs = 1;
  /// Treat every certification refusal as a failure (exit 3).
  bool demand_pass = false;
  std::string cache_dir;
};

const std::vector<std::string>& suite_names();
/// Throws ConfigError.
void validate_config(const SuiteConfig& config);

enum class Outcome { pass, mismatch, not_certified, error };
std::string to_string(Outcome o);

struct CheckResult {
  std::string name;
  Outcome expected = Outcome::pass;
  Outcome outcome = Outcome::error;
  Json dims = Json::object();
  std::string detail;
  double wall_ms = 0;
  bool ok() const { return outcome == expected; }
};

struct SuiteResult {
  std::vector<CheckResult> checks;
  /// 0 all as expected, 1 mismatch, 2 configuration error, 3 refusal where a pass was demanded.
  int exit_code = 0;
  double wall_ms = 0;
};

/// Runs every check of the suite over the configured inventory; writes the
/// report when report_path is set. Configuration problems throw.
SuiteResult run_suite(const SuiteConfig& config);

/// Report with schema_version, config, per-check verdicts, dims and wall-times.
Json suite_report(const SuiteConfig& config, const SuiteResult& result);

}  // namespace opk
