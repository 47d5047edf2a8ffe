#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "mctrunc/cli/commands.hpp"
#include "mctrunc/version.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Truncation approximations and certified bounds for stationary distributions"};
  app.set_version_flag("--version", mctrunc::kVersion);
  app.require_subcommand(1);

  mctrunc::cli::CommandOptions options;
  app.add_option("--threads", options.threads, "Worker threads for building G")->check(CLI::PositiveNumber);

  std::string config;
  auto* run = app.add_subcommand("run", "Compute the approximation and bounds, write the report JSON");
  run->add_option("config", config, "Config file")->required();
  auto* verify = app.add_subcommand("verify", "Verify the drift certificate and print K");
  verify->add_option("config", config, "Config file")->required();
  verify->add_flag("--json", options.json, "Print the full JSON report");
  auto* sweep = app.add_subcommand("sweep", "Run the truncation schedule and write the CSV table");
  sweep->add_option("config", config, "Config file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  if (*run) return mctrunc::cli::run_command(config, options, std::cout, std::cerr);
  if (*verify) return mctrunc::cli::verify_command(config, options, std::cout, std::cerr);
  return mctrunc::cli::sweep_command(config, options, std::cout, std::cerr);
}
