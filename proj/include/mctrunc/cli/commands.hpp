#pragma once

#include <iosfwd>
#include <string>

#include <json.hpp>

#include "mctrunc/cli/config.hpp"

namespace mctrunc::cli {

struct CommandOptions {
  int threads = 1;
  bool json = false;  // verify: print the JSON report instead of the summary
};

/// Full pipeline: returns the report document (BoundReports, certificate hash,
/// approximation). Throws the library error types.
nlohmann::json run_report(const Config& config, const CommandOptions& options = {});

/// Drift verification and K construction only.
nlohmann::json verify_report(const Config& config);

/// One CSV row per (A level, method, reward); throws NumericalFailure when a
/// bound column increases along the schedule.
std::string sweep_csv(const Config& config, const CommandOptions& options = {});

/// Output directory: the environment override if set, otherwise output.dir.
std::string output_dir(const Config& config);

/// Subcommand drivers: load the config, run, write outputs, map errors to exit
/// codes (1 config, 2 assumption, 3 numerical). Nothing is written on failure.
int run_command(const std::string& config_path, const CommandOptions& options, std::ostream& out, std::ostream& err);
int verify_command(const std::string& config_path, const CommandOptions& options, std::ostream& out,
                   std::ostream& err);
int sweep_command(const std::string& config_path, const CommandOptions& options, std::ostream& out,
                  std::ostream& err);

}  // namespace mctrunc::cli
