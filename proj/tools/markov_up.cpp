#include "commands.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <string>

int main(int argc, char** argv) {
  using namespace markov_up::cli;

  CLI::App app{"Simulation and moment-bound verification for Markov-up processes"};
  app.require_subcommand(1);

  CommandOptions opts;
  std::string report_path;
  std::uint64_t seed = 0;

  auto add_config = [&](CLI::App* sub) {
    sub->add_option("config", opts.config_path, "experiment configuration file")->required();
    sub->add_option("--output-dir", opts.output_dir, "override output_dir from the config");
  };
  auto add_run_flags = [&](CLI::App* sub) {
    sub->add_option("--seed", seed, "override the config seed");
    sub->add_option("--threads", opts.threads, "worker threads (results do not depend on it)")
        ->check(CLI::PositiveNumber);
  };

  auto* certify = app.add_subcommand("certify", "print the assumption certificate");
  add_config(certify);
  auto* bounds = app.add_subcommand("bounds", "print certified bound constants");
  add_config(bounds);
  auto* simulate = app.add_subcommand("simulate", "simulate paths and write paths.csv");
  add_config(simulate);
  add_run_flags(simulate);
  auto* verify = app.add_subcommand("verify", "full pipeline: certify, bounds, simulate, verify");
  add_config(verify);
  add_run_flags(verify);
  verify->add_flag("--wall-time", opts.wall_time, "record wall-clock seconds in report.json");
  auto* report = app.add_subcommand("report", "summarize an existing report.json");
  report->add_option("report", report_path, "path to report.json")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  for (auto* sub : {simulate, verify}) {
    if (sub->parsed() && sub->count("--seed") > 0) opts.seed = seed;
  }

  if (certify->parsed()) return certify_command(opts, std::cout, std::cerr);
  if (bounds->parsed()) return bounds_command(opts, std::cout, std::cerr);
  if (simulate->parsed()) return simulate_command(opts, std::cout, std::cerr);
  if (verify->parsed()) return verify_command(opts, std::cout, std::cerr);
  return report_command(report_path, std::cout, std::cerr);
}
