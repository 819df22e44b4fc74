#pragma once

#include "markov_up/bounds.hpp"
#include "markov_up/error.hpp"
#include "markov_up/model.hpp"
#include "markov_up/monte_carlo.hpp"

#include <charconv>
#include <cstdint>
#include <fstream>
#include <istream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

namespace markov_up {

/// Experiment configuration. The file format is one `key = value` per line,
/// `#` starts a comment, and list values are comma separated:
///
///   a = 0.5
///   x_grid = 6, 10, 20
///
/// Keys left out keep the defaults below.
struct ExperimentConfig {
  BenchmarkModelSpec model;
  std::vector<State> x_grid{6, 10, 20};
  std::vector<unsigned> m_list{1, 2, 3};
  std::size_t n_traj = 100'000;
  std::uint64_t seed = 20240601;
  std::size_t max_steps = kDefaultMaxSteps;
  double epsilon = kDefaultEpsilon;
  unsigned attempt_tail_max = 5;
  double a2_tolerance = 1e-6;
  std::size_t dump_trajectories = 0;
  std::string output_dir = "out";

  VerifyOptions verify_options(unsigned threads) const {
    VerifyOptions o;
    o.x_grid = x_grid;
    o.m_list = m_list;
    o.n_traj = n_traj;
    o.seed = seed;
    o.max_steps = max_steps;
    o.threads = threads;
    o.epsilon = epsilon;
    o.attempt_tail_max = attempt_tail_max;
    o.a2_tolerance = a2_tolerance;
    o.keep_trajectories = dump_trajectories;
    return o;
  }
};

inline constexpr unsigned kMaxMomentOrder = 12;

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

class ConfigReader {
 public:
  explicit ConfigReader(std::string source) : source_(std::move(source)) {}

  [[noreturn]] void fail(std::size_t line, const std::string& message) const {
    throw Error(ErrorCode::invalid_parameter, source_ + ":" + std::to_string(line) + ": " + message);
  }

  template <class T>
  T parse_number(std::size_t line, std::string_view key, std::string_view text) const {
    T value{};
    const auto* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, value);
    if (ec != std::errc{} || ptr != end) {
      fail(line, "field '" + std::string(key) + "' expects a number, got '" + std::string(text) + "'");
    }
    return value;
  }

  template <class T>
  std::vector<T> parse_list(std::size_t line, std::string_view key, std::string_view text) const {
    std::vector<T> values;
    std::size_t pos = 0;
    while (pos <= text.size()) {
      const auto comma = text.find(',', pos);
      const auto item = trim(text.substr(pos, comma == std::string_view::npos ? std::string_view::npos : comma - pos));
      if (item.empty()) fail(line, "field '" + std::string(key) + "' has an empty list entry");
      values.push_back(parse_number<T>(line, key, item));
      if (comma == std::string_view::npos) break;
      pos = comma + 1;
    }
    return values;
  }

 private:
  std::string source_;
};

}  // namespace detail

/// Parses and validates a configuration. Every error message carries
/// `source:line:` and the name of the offending field.
inline ExperimentConfig parse_config(std::istream& in, const std::string& source = "<config>") {
  const detail::ConfigReader reader(source);
  ExperimentConfig cfg;
  std::map<std::string, std::size_t> seen;

  std::string raw;
  for (std::size_t line = 1; std::getline(in, raw); ++line) {
    std::string_view text = raw;
    if (const auto hash = text.find('#'); hash != std::string_view::npos) text = text.substr(0, hash);
    text = detail::trim(text);
    if (text.empty()) continue;
    const auto eq = text.find('=');
    if (eq == std::string_view::npos) reader.fail(line, "expected 'key = value'");
    const std::string key(detail::trim(text.substr(0, eq)));
    const std::string_view value = detail::trim(text.substr(eq + 1));
    if (key.empty()) reader.fail(line, "missing key before '='");
    if (value.empty()) reader.fail(line, "field '" + key + "' has no value");
    if (!seen.emplace(key, line).second) {
      reader.fail(line, "field '" + key + "' repeats line " + std::to_string(seen[key]));
    }

    auto unit = [&](double v) {
      if (!in_open_unit_interval(v)) {
        reader.fail(line, "field '" + key + "' must lie in (0, 1), got " + std::string(value));
      }
      return v;
    };
    auto positive = [&](auto v) {
      if (!(v > 0)) reader.fail(line, "field '" + key + "' must be positive, got " + std::string(value));
      return v;
    };

    if (key == "a") {
      cfg.model.kappa.a = unit(reader.parse_number<double>(line, key, value));
    } else if (key == "r") {
      cfg.model.kappa.r = unit(reader.parse_number<double>(line, key, value));
    } else if (key == "s") {
      cfg.model.s = unit(reader.parse_number<double>(line, key, value));
    } else if (key == "floor_N") {
      cfg.model.floor_N = reader.parse_number<State>(line, key, value);
    } else if (key == "x_grid") {
      cfg.x_grid = reader.parse_list<State>(line, key, value);
    } else if (key == "m_list") {
      cfg.m_list = reader.parse_list<unsigned>(line, key, value);
      for (const unsigned m : cfg.m_list) {
        if (m == 0 || m > kMaxMomentOrder) {
          reader.fail(line, "field 'm_list' entries must lie in [1, " + std::to_string(kMaxMomentOrder) + "]");
        }
      }
    } else if (key == "n_traj") {
      cfg.n_traj = positive(reader.parse_number<std::size_t>(line, key, value));
    } else if (key == "seed") {
      cfg.seed = reader.parse_number<std::uint64_t>(line, key, value);
    } else if (key == "max_steps") {
      cfg.max_steps = positive(reader.parse_number<std::size_t>(line, key, value));
    } else if (key == "epsilon") {
      cfg.epsilon = positive(reader.parse_number<double>(line, key, value));
    } else if (key == "attempt_tail_max") {
      cfg.attempt_tail_max = positive(reader.parse_number<unsigned>(line, key, value));
    } else if (key == "a2_tolerance") {
      cfg.a2_tolerance = positive(reader.parse_number<double>(line, key, value));
    } else if (key == "dump_trajectories") {
      cfg.dump_trajectories = reader.parse_number<std::size_t>(line, key, value);
    } else if (key == "output_dir") {
      cfg.output_dir = std::string(value);
    } else {
      reader.fail(line, "unknown field '" + key + "'");
    }
  }
  return cfg;
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::invalid_parameter, "cannot read config file " + path);
  return parse_config(in, path);
}

inline ExperimentConfig parse_config_text(const std::string& text, const std::string& source = "<config>") {
  std::istringstream in(text);
  return parse_config(in, source);
}

}  // namespace markov_up
