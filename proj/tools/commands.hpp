#pragma once

#include "markov_up/markov_up.hpp"

#include <json.hpp>

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

namespace markov_up::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitVerdictFailure = 2;

struct CommandOptions {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> output_dir;
  unsigned threads = std::max(1U, std::thread::hardware_concurrency());
  bool wall_time = false;
};

namespace detail {

inline ExperimentConfig resolve_config(const CommandOptions& opts) {
  ExperimentConfig cfg = load_config(opts.config_path);
  if (opts.seed) cfg.seed = *opts.seed;
  if (opts.output_dir) cfg.output_dir = *opts.output_dir;
  return cfg;
}

inline std::filesystem::path prepare_output_dir(const ExperimentConfig& cfg) {
  const std::filesystem::path dir(cfg.output_dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::invalid_parameter, "cannot write " + path.string());
  return out;
}

template <class Body>
int guarded(std::ostream& err, Body&& body) {
  try {
    return body();
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }
}

inline void print_warnings(const std::vector<std::string>& warnings, std::ostream& err) {
  for (const auto& w : warnings) err << "warning: " << w << '\n';
}

}  // namespace detail

inline int certify_command(const CommandOptions& opts, std::ostream& out, std::ostream& err) {
  return detail::guarded(err, [&] {
    const ExperimentConfig cfg = detail::resolve_config(opts);
    const unsigned m_max = *std::max_element(cfg.m_list.begin(), cfg.m_list.end());
    out << to_json(certify(cfg.model, m_max, cfg.a2_tolerance, cfg.epsilon)).dump(2) << '\n';
    return kExitOk;
  });
}

inline int bounds_command(const CommandOptions& opts, std::ostream& out, std::ostream& err) {
  return detail::guarded(err, [&] {
    const ExperimentConfig cfg = detail::resolve_config(opts);
    Json sets = Json::array();
    for (const unsigned m : cfg.m_list) sets.push_back(to_json(compute_bound_set(cfg.model, m, cfg.epsilon), cfg.x_grid));
    out << sets.dump(2) << '\n';
    return kExitOk;
  });
}

/// Simulation only: writes paths.csv (and trajectories.csv when
/// dump_trajectories > 0) and prints the tau-moment estimates.
inline int simulate_command(const CommandOptions& opts, std::ostream& out, std::ostream& err) {
  return detail::guarded(err, [&] {
    const ExperimentConfig cfg = detail::resolve_config(opts);
    detail::print_warnings(run_warnings(cfg, nullptr), err);
    const BenchmarkKernel kernel = build_benchmark(cfg.model);
    const BatchOptions batch_options{cfg.n_traj, cfg.seed, cfg.max_steps, opts.threads, cfg.dump_trajectories};

    std::vector<SimulationBatch> batches;
    Json estimates = Json::array();
    for (const State x0 : cfg.x_grid) {
      batches.push_back(simulate_batch(kernel, x0, batch_options));
      for (const auto& e : tau_moments(batches.back(), cfg.m_list)) estimates.push_back(to_json(e));
    }
    std::vector<const SimulationBatch*> views;
    for (const auto& b : batches) views.push_back(&b);

    const auto dir = detail::prepare_output_dir(cfg);
    auto paths = detail::open_output(dir / "paths.csv");
    write_paths_csv(paths, views);
    if (cfg.dump_trajectories > 0) {
      auto traj = detail::open_output(dir / "trajectories.csv");
      write_trajectories_csv(traj, views);
    }
    out << estimates.dump(2) << '\n';
    return kExitOk;
  });
}

/// certify -> bounds -> simulate -> verify. Writes report.json, paths.csv and
/// verdicts.csv; exit 0 iff every verdict passes, 2 otherwise.
inline int verify_command(const CommandOptions& opts, std::ostream& out, std::ostream& err) {
  return detail::guarded(err, [&] {
    const ExperimentConfig cfg = detail::resolve_config(opts);
    const auto started = std::chrono::steady_clock::now();
    const BenchmarkKernel kernel = build_benchmark(cfg.model);
    const VerificationResult result = verify(kernel, cfg.model, cfg.verify_options(opts.threads));
    const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - started;

    std::optional<double> wall;
    if (opts.wall_time) wall = elapsed.count();
    const Json report = build_report(cfg, result, wall);

    std::vector<const SimulationBatch*> views;
    for (const auto& g : result.grid) views.push_back(&g.batch);
    const auto dir = detail::prepare_output_dir(cfg);
    {
      auto f = detail::open_output(dir / "report.json");
      f << report.dump(2) << '\n';
    }
    {
      auto f = detail::open_output(dir / "paths.csv");
      write_paths_csv(f, views);
    }
    {
      auto f = detail::open_output(dir / "verdicts.csv");
      write_verdicts_csv(f, result.verdicts);
    }
    if (cfg.dump_trajectories > 0) {
      auto f = detail::open_output(dir / "trajectories.csv");
      write_trajectories_csv(f, views);
    }

    detail::print_warnings(report["warnings"].get<std::vector<std::string>>(), err);
    const auto& summary = report["summary"];
    out << "verdicts: " << summary["passed"] << " pass, " << summary["failed"] << " fail, " << summary["withheld"]
        << " withheld; report written to " << (dir / "report.json").string() << '\n';
    return result.all_pass() ? kExitOk : kExitVerdictFailure;
  });
}

/// Prints a verdict table from an existing report.json.
inline int report_command(const std::string& report_path, std::ostream& out, std::ostream& err) {
  return detail::guarded(err, [&] {
    std::ifstream in(report_path);
    if (!in) throw Error(ErrorCode::invalid_parameter, "cannot read report " + report_path);
    const Json report = Json::parse(in);
    out << std::left << std::setw(14) << "check" << std::setw(8) << "x0" << std::setw(4) << "m" << std::setw(16)
        << "mean" << std::setw(16) << "bound" << std::setw(16) << "slack" << "status\n";
    for (const auto& v : report.at("verdicts")) {
      out << std::left << std::setw(14) << v.at("check").get<std::string>() << std::setw(8) << v.at("x0").get<State>()
          << std::setw(4) << v.at("m").get<unsigned>() << std::setw(16)
          << v.at("estimate").at("mean").get<double>() << std::setw(16) << v.at("bound").get<double>()
          << std::setw(16) << v.at("slack").get<double>() << v.at("status").get<std::string>() << '\n';
    }
    for (const auto& w : report.at("warnings")) out << "warning: " << w.get<std::string>() << '\n';
    return report.at("summary").at("all_pass").get<bool>() ? kExitOk : kExitVerdictFailure;
  });
}

}  // namespace markov_up::cli
