#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "randsee/experiment.hpp"

namespace randsee::cli {

/// Exit codes: 0 success, 1 usage error, 2 runtime failure.
enum ExitCode { kOk = 0, kUsageError = 1, kRuntimeError = 2 };

struct CliConfig {
  std::string command;     // study | solve | validate-noise | list-problems
  std::string config_path; // optional flat key = value file
  std::string out_path = "randsee_study.csv";
  StudyConfig study;
};

/// Apply one key/value pair (config-file key or long flag name without
/// dashes) onto a StudyConfig. Throws std::invalid_argument naming the key.
void apply_key(StudyConfig& config, const std::string& key,
               const std::string& value);

/// Parse flat "key = value" text, '#' comments and blank lines allowed.
void apply_config_text(StudyConfig& config, const std::string& text);
void apply_config_file(StudyConfig& config, const std::string& path);

/// Merge order: defaults <- file <- RANDSEE_SEED <- flags. Throws
/// std::invalid_argument on unknown keys, malformed values or invariant
/// violations, each naming the offending key.
CliConfig parse_config(const std::vector<std::string>& args);

/// Write the results and per-sample CSVs next to out_path and print the
/// fixed-width summary table with the per-method order footer.
void emit_report(const ConvergenceReport& report, const std::string& out_path,
                 std::ostream& console);

std::string samples_path_for(const std::string& out_path);

/// Full command dispatch; returns the process exit code.
int run_cli(const std::vector<std::string>& args, std::ostream& console,
            std::ostream& errors);

}  // namespace randsee::cli
