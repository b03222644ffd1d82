#pragma once

// Batch front end shared by the command-line tool and its tests: run
// configurations, command dispatch, and deterministic reports.

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "finsler/classify.hpp"
#include "finsler/metric.hpp"
#include "finsler/sampling.hpp"

namespace finsler::cli {

inline constexpr const char* kToolName = "finslerctl";
inline constexpr const char* kToolVersion = "1.0.0";

enum class Command { eval, classify, verify, projective };
const char* command_name(Command c);
bool parse_command(const std::string& s, Command& out);

/// Process exit statuses.
enum ExitCode : int {
  kExitOk = 0,
  kExitCheckFailed = 2,
  kExitConfig = 3,
  kExitDomain = 4,
};

using Json = nlohmann::ordered_json;

struct RunConfig {
  Command command = Command::verify;
  MetricSpec metric;
  SamplerConfig sampler;
  std::vector<SamplePoint> explicit_points;  // when given, replaces sampling
  std::optional<JetConfig> jet;               // F^2 orders
  Tolerances tolerances;
  std::vector<std::string> checks;  // resolved, never empty after parsing
  std::vector<std::string> tensors;  // eval only
  std::optional<nlohmann::json> factor;  // projective only
  std::string output_path;
  std::string format = "json";
  bool deep = false;
  bool timing = false;  // wall times make the report non-reproducible
};

/// Command-line values that override the configuration document.
struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<int> points;
  std::vector<std::string> checks;
  std::vector<std::string> tolerances;  // NAME=VALUE
  std::optional<std::string> output;
  bool deep = false;
  bool timing = false;
};

/// Parses and validates a configuration document, applies overrides and
/// defaults. Throws ConfigError on anything unknown or malformed.
RunConfig parse_run_config(Command command, const nlohmann::json& doc, const Overrides& ov = {});

/// The fully resolved configuration as it is echoed into reports.
Json echo_config(const RunConfig& cfg);

/// Names accepted by `checks` for the given command.
std::vector<std::string> known_checks(Command command, const MetricSpec& metric, bool deep);

struct CommandResult {
  Json report;
  int exit_code = kExitOk;
};

CommandResult run_command(const RunConfig& cfg);

/// Jet-order requirements and coefficient counts, without running anything.
Json budget_report(const RunConfig& cfg);

/// Serialized report text (two-space indent, trailing newline).
std::string serialize(const Json& report);

/// Reads the file, runs the command and writes the report. Returns the exit
/// status; diagnostics go to `err`.
int main_entry(Command command, const std::string& config_path, const Overrides& ov, bool budget,
               std::ostream& out, std::ostream& err);

}  // namespace finsler::cli
