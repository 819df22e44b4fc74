#pragma once

#include "markov_up/bounds.hpp"
#include "markov_up/certificate.hpp"
#include "markov_up/config.hpp"
#include "markov_up/error.hpp"
#include "markov_up/monte_carlo.hpp"
#include "markov_up/path_analysis.hpp"

#include <json.hpp>

#include <cstdio>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

namespace markov_up {

using Json = nlohmann::ordered_json;

inline Json to_json(const SeriesValue& v) {
  return Json{{"value", v.value}, {"truncation_K", v.truncation_K}, {"tail_bound", v.tail_bound}};
}

inline Json to_json(const BoundSet& b, const std::vector<State>& x_grid) {
  Json theorem = Json::array();
  for (const State x : x_grid) {
    const TheoremBound t = theorem_bound(b.m, x, b);
    theorem.push_back({{"x", x},
                       {"C1", t.C1},
                       {"C2", t.C2},
                       {"final_display", t.final_display},
                       {"proof_assembly", t.proof_assembly},
                       {"bound", t.value}});
  }
  return Json{{"m", b.m},
              {"q", b.q},
              {"q_bar", to_json(b.q_bar)},
              {"rise_series", to_json(b.rise_series)},
              {"fall_series", to_json(b.fall_series)},
              {"jump_moment", to_json(b.jump_moment)},
              {"overshoot_proof_assembled", to_json(b.overshoot.proof_assembled)},
              {"overshoot_statement_literal", to_json(b.overshoot.statement_literal)},
              {"overshoot_certified", to_json(b.overshoot.certified())},
              {"attempt_series", to_json(b.attempt_series)},
              {"theorem", theorem}};
}

inline Json to_json(const AssumptionCertificate& c) {
  Json entries = Json::object();
  for (const auto& e : c.entries) {
    Json j{{"status", std::string(to_string(e.status))}, {"required_for_theorem", e.required_for_theorem}};
    if (e.tolerance) j["tolerance"] = *e.tolerance;
    if (e.witness) j["witness"] = *e.witness;
    j["note"] = e.note;
    entries[e.id] = std::move(j);
  }
  Json moments = Json::array();
  for (std::size_t k = 0; k < c.jump_moments.size(); ++k) {
    moments.push_back({{"m", k + 1}, {"value", c.jump_moments[k].value}, {"tail_bound", c.jump_moments[k].tail_bound}});
  }
  return Json{{"assumptions", entries},
              {"theorem_assumptions_hold", c.theorem_assumptions_hold()},
              {"q", c.q},
              {"q_bar", to_json(c.q_bar)},
              {"kappa_bar", c.kappa_bar},
              {"jump_moments", moments},
              {"rho_lower_bound", c.rho_lower_bound ? Json(*c.rho_lower_bound) : Json(nullptr)}};
}

inline Json to_json(const MomentEstimate& e) {
  Json j{{"quantity", std::string(to_string(e.quantity))}, {"m", e.m}, {"x0", e.x0}};
  if (e.segment_index) j["segment_index"] = *e.segment_index;
  j["n_samples"] = e.n_samples;
  j["mean"] = e.mean;
  j["variance"] = e.variance;
  j["std_error"] = e.std_error;
  j["ci99_upper"] = e.ci99_upper;
  j["capped_paths"] = e.capped_paths;
  if (!e.has_samples()) j["flag"] = "no-samples";
  return j;
}

inline Json to_json(const VerificationVerdict& v) {
  return Json{{"check", v.check},
              {"x0", v.estimate.x0},
              {"m", v.estimate.m},
              {"estimate", to_json(v.estimate)},
              {"bound", v.bound},
              {"criterion", std::string(to_string(v.criterion))},
              {"slack", v.slack},
              {"pass", v.pass},
              {"status", std::string(to_string(v.status))},
              {"note", v.note}};
}

inline Json config_echo(const ExperimentConfig& cfg) {
  return Json{{"a", cfg.model.kappa.a},
              {"r", cfg.model.kappa.r},
              {"s", cfg.model.s},
              {"floor_N", cfg.model.floor_N},
              {"x_grid", cfg.x_grid},
              {"m_list", cfg.m_list},
              {"n_traj", cfg.n_traj},
              {"seed", cfg.seed},
              {"max_steps", cfg.max_steps},
              {"epsilon", cfg.epsilon},
              {"attempt_tail_max", cfg.attempt_tail_max},
              {"a2_tolerance", cfg.a2_tolerance},
              {"dump_trajectories", cfg.dump_trajectories},
              {"output_dir", cfg.output_dir}};
}

inline std::vector<std::string> run_warnings(const ExperimentConfig& cfg, const VerificationResult* result) {
  std::vector<std::string> warnings;
  if (cfg.n_traj < kLowSampleThreshold) {
    warnings.push_back("low-sample warning: n_traj = " + std::to_string(cfg.n_traj) + " is below " +
                       std::to_string(kLowSampleThreshold));
  }
  if (result != nullptr) {
    for (const auto& g : result->grid) {
      if (g.batch.capped_paths > 0) {
        warnings.push_back("capped paths: " + std::to_string(g.batch.capped_paths) + " of " +
                           std::to_string(g.batch.paths.size()) + " from x0 = " + std::to_string(g.x0) +
                           " hit max_steps; bound verdicts withheld");
      }
    }
  }
  return warnings;
}

/// The full run report. Top-level keys are always the same: config,
/// certificate, bound_sets, estimates, verdicts, timing, warnings, summary.
/// Nothing in it depends on the worker count; wall-clock time is included
/// only when asked for.
inline Json build_report(const ExperimentConfig& cfg, const VerificationResult& result,
                         std::optional<double> wall_seconds = std::nullopt) {
  Json bound_sets = Json::array();
  for (const auto& b : result.bound_sets) bound_sets.push_back(to_json(b, cfg.x_grid));

  Json estimates = Json::array();
  for (const auto& g : result.grid) {
    Json point{{"x0", g.x0}, {"paths", g.batch.paths.size()}, {"capped_paths", g.batch.capped_paths}};
    Json tau = Json::array();
    for (const auto& e : g.tau) tau.push_back(to_json(e));
    Json segments = Json::array();
    for (const auto& s : g.segments) {
      auto list = [](const std::vector<MomentEstimate>& v) {
        Json a = Json::array();
        for (const auto& e : v) a.push_back(to_json(e));
        return a;
      };
      segments.push_back({{"m", s.rise_length.m},
                          {"rise_length", to_json(s.rise_length)},
                          {"fall_length", to_json(s.fall_length)},
                          {"overshoot", to_json(s.overshoot)},
                          {"by_index",
                           {{"rise_length", list(s.rise_length_by_index)},
                            {"fall_length", list(s.fall_length_by_index)},
                            {"overshoot", list(s.overshoot_by_index)}}}});
    }
    Json survival = Json::array();
    for (const auto& e : g.survival) survival.push_back(to_json(e));
    point["tau"] = tau;
    point["segments"] = segments;
    point["attempt_survival"] = survival;
    estimates.push_back(std::move(point));
  }

  Json verdicts = Json::array();
  std::size_t passed = 0, failed = 0, withheld = 0;
  for (const auto& v : result.verdicts) {
    verdicts.push_back(to_json(v));
    passed += v.status == VerdictStatus::pass;
    failed += v.status == VerdictStatus::fail;
    withheld += v.status == VerdictStatus::withheld;
  }

  std::uint64_t paths = 0;
  for (const auto& g : result.grid) paths += g.batch.paths.size();
  Json timing{{"paths_simulated", paths}, {"total_steps", result.total_steps()}};
  if (wall_seconds) timing["wall_seconds"] = *wall_seconds;

  return Json{{"config", config_echo(cfg)},
              {"certificate", to_json(result.certificate)},
              {"bound_sets", bound_sets},
              {"estimates", estimates},
              {"verdicts", verdicts},
              {"timing", timing},
              {"warnings", run_warnings(cfg, &result)},
              {"summary",
               {{"all_pass", result.all_pass()}, {"passed", passed}, {"failed", failed}, {"withheld", withheld}}}};
}

namespace detail {

inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace detail

/// path_id is "<x0>:<index>" so ids stay unique across the start-state grid.
inline std::string path_id(State x0, std::uint64_t index) {
  return std::to_string(x0) + ":" + std::to_string(index);
}

inline void write_paths_csv(std::ostream& out, const std::vector<const SimulationBatch*>& batches) {
  out << "path_id,tau,attempts,max_state,capped\n";
  for (const SimulationBatch* b : batches) {
    for (const PathSummary& p : b->paths) {
      out << path_id(b->x0, p.path_id) << ',' << (p.tau ? std::to_string(*p.tau) : std::string()) << ','
          << p.attempts << ',' << p.max_state << ',' << (p.capped() ? 1 : 0) << '\n';
    }
  }
}

inline void write_verdicts_csv(std::ostream& out, const std::vector<VerificationVerdict>& verdicts) {
  out << "check,x0,m,n_samples,mean,std_error,ci99_upper,bound,criterion,slack,status,note\n";
  for (const auto& v : verdicts) {
    const auto& e = v.estimate;
    out << v.check << ',' << e.x0 << ',' << e.m << ',' << e.n_samples << ',' << detail::format_double(e.mean) << ','
        << detail::format_double(e.std_error) << ',' << detail::format_double(e.ci99_upper) << ','
        << detail::format_double(v.bound) << ',' << to_string(v.criterion) << ','
        << detail::format_double(v.slack) << ',' << to_string(v.status) << ',' << v.note << '\n';
  }
}

/// Long format: one row per (path, time).
inline void write_trajectories_csv(std::ostream& out, const std::vector<const SimulationBatch*>& batches) {
  out << "path_id,t,state\n";
  for (const SimulationBatch* b : batches) {
    for (std::size_t i = 0; i < b->kept_trajectories.size(); ++i) {
      const auto& states = b->kept_trajectories[i].states;
      for (std::size_t t = 0; t < states.size(); ++t) {
        out << path_id(b->x0, i) << ',' << t << ',' << states[t] << '\n';
      }
    }
  }
}

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

}  // namespace detail

struct DumpedPath {
  std::string path_id;
  std::vector<State> states;
};

inline std::vector<DumpedPath> read_trajectories_csv(std::istream& in) {
  std::vector<DumpedPath> paths;
  std::string line;
  if (!std::getline(in, line) || line != "path_id,t,state") {
    throw Error(ErrorCode::invalid_parameter, "trajectory CSV must start with 'path_id,t,state'");
  }
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = detail::split_csv_line(line);
    if (f.size() != 3) throw Error(ErrorCode::invalid_parameter, "bad trajectory row: " + line);
    if (paths.empty() || paths.back().path_id != f[0]) paths.push_back(DumpedPath{f[0], {}});
    if (std::stoull(f[1]) != paths.back().states.size()) {
      throw Error(ErrorCode::invalid_parameter, "trajectory rows out of order at " + line);
    }
    paths.back().states.push_back(std::stoull(f[2]));
  }
  return paths;
}

struct PathRow {
  std::string path_id;
  std::optional<std::uint64_t> tau;
  std::uint64_t attempts = 0;
  State max_state = 0;
  bool capped = false;
};

inline std::vector<PathRow> read_paths_csv(std::istream& in) {
  std::vector<PathRow> rows;
  std::string line;
  if (!std::getline(in, line) || line != "path_id,tau,attempts,max_state,capped") {
    throw Error(ErrorCode::invalid_parameter, "paths CSV must start with 'path_id,tau,attempts,max_state,capped'");
  }
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = detail::split_csv_line(line);
    if (f.size() != 5) throw Error(ErrorCode::invalid_parameter, "bad paths row: " + line);
    PathRow row;
    row.path_id = f[0];
    if (!f[1].empty()) row.tau = std::stoull(f[1]);
    row.attempts = std::stoull(f[2]);
    row.max_state = std::stoull(f[3]);
    row.capped = f[4] == "1";
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace markov_up
