#pragma once

#include "markov_up/error.hpp"
#include "markov_up/random.hpp"

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace markov_up {

using State = std::uint64_t;
using Time = std::uint64_t;

/// The strictly decreasing suffix X[zeta_n..n] of a trajectory. This is the
/// whole memory a transition kernel may look at: a rise (or a flat step)
/// collapses it to the current state, a strict fall extends it.
class FallWindow {
 public:
  explicit FallWindow(State x0) : values_{x0} {}

  FallWindow(Time start_time, std::vector<State> values)
      : start_time_(start_time), values_(std::move(values)) {
    if (values_.empty()) {
      throw Error(ErrorCode::invalid_parameter, "fall window must hold at least one state");
    }
    for (std::size_t k = 1; k < values_.size(); ++k) {
      if (values_[k] >= values_[k - 1]) {
        throw Error(ErrorCode::invalid_parameter, "fall window values must be strictly decreasing");
      }
    }
  }

  Time start_time() const noexcept { return start_time_; }
  Time time() const noexcept { return start_time_ + values_.size() - 1; }
  std::span<const State> values() const noexcept { return values_; }
  State current() const noexcept { return values_.back(); }

  /// Number of consecutive strict down-steps that led to the current state.
  std::size_t fall_length() const noexcept { return values_.size() - 1; }

  /// In-place form of window_update for the next time index.
  void advance(State x_next) {
    if (x_next < values_.back()) {
      values_.push_back(x_next);
    } else {
      start_time_ = time() + 1;
      values_.assign(1, x_next);
    }
  }

  bool operator==(const FallWindow&) const = default;

 private:
  Time start_time_ = 0;
  std::vector<State> values_;
};

inline FallWindow window_update(FallWindow window, State x_next, Time n_next) {
  if (n_next != window.time() + 1) {
    throw Error(ErrorCode::invalid_parameter,
                "window_update expects time " + std::to_string(window.time() + 1) + ", got " +
                    std::to_string(n_next));
  }
  window.advance(x_next);
  return window;
}

struct Atom {
  State state = 0;
  double prob = 0.0;

  bool operator==(const Atom&) const = default;
};

/// Geometric run of atoms P(first_state + j) = first_prob * ratio^j, j >= 0.
struct GeometricTail {
  State first_state = 0;
  double first_prob = 0.0;
  double ratio = 0.0;

  double mass() const noexcept { return first_prob / (1.0 - ratio); }

  bool operator==(const GeometricTail&) const = default;
};

/// Next-state law: finitely many explicit atoms in increasing state order,
/// optionally followed by a geometric tail above the last atom.
struct StepDistribution {
  static constexpr double kSumTolerance = 1e-12;

  std::vector<Atom> atoms;
  std::optional<GeometricTail> tail;

  double total_mass() const noexcept {
    double total = 0.0;
    for (const Atom& a : atoms) total += a.prob;
    if (tail) total += tail->mass();
    return total;
  }

  double probability(State x) const noexcept {
    for (const Atom& a : atoms) {
      if (a.state == x) return a.prob;
    }
    if (tail && x >= tail->first_state) {
      return tail->first_prob * std::pow(tail->ratio, static_cast<double>(x - tail->first_state));
    }
    return 0.0;
  }

  void validate() const {
    for (std::size_t k = 0; k < atoms.size(); ++k) {
      const double p = atoms[k].prob;
      if (!(p >= 0.0 && p <= 1.0)) {
        throw Error(ErrorCode::distribution_invalid, "atom probability outside [0, 1]");
      }
      if (k > 0 && atoms[k].state <= atoms[k - 1].state) {
        throw Error(ErrorCode::distribution_invalid, "atoms must be in strictly increasing state order");
      }
    }
    if (tail) {
      if (!(tail->ratio >= 0.0 && tail->ratio < 1.0) || !(tail->first_prob >= 0.0)) {
        throw Error(ErrorCode::distribution_invalid, "geometric tail parameters out of range");
      }
      if (!atoms.empty() && tail->first_state <= atoms.back().state) {
        throw Error(ErrorCode::distribution_invalid, "geometric tail must start above the last atom");
      }
    }
    const double total = total_mass();
    if (!(std::abs(total - 1.0) <= kSumTolerance)) {
      throw Error(ErrorCode::distribution_invalid,
                  "probabilities sum to " + std::to_string(total) + ", not 1");
    }
  }

  /// Inverse CDF: the smallest state whose cumulative probability exceeds u.
  /// Deterministic in u; assumes validate() passed.
  State quantile(double u) const noexcept {
    double cumulative = 0.0;
    const Atom* last_positive = nullptr;
    for (const Atom& a : atoms) {
      if (a.prob > 0.0) last_positive = &a;
      cumulative += a.prob;
      if (u < cumulative) return a.state;
    }
    if (tail && tail->first_prob > 0.0) {
      State x = tail->first_state;
      double term = tail->first_prob;
      // Terminates once the term underflows; covers u within rounding of 1.
      while (u >= cumulative + term && term > 0.0) {
        cumulative += term;
        term *= tail->ratio;
        ++x;
      }
      return x;
    }
    return last_positive != nullptr ? last_positive->state : 0;
  }

  bool operator==(const StepDistribution&) const = default;
};

/// A transition kernel sees only the fall window, never the full history.
template <class K>
concept TransitionKernel = requires(const K& kernel, const FallWindow& window) {
  { kernel.next(window) } -> std::convertible_to<StepDistribution>;
  { kernel.floor_level() } -> std::convertible_to<State>;
};

template <class S>
concept UniformSource = requires(S& source) {
  { source.next_uniform() } -> std::convertible_to<double>;
};

inline State sample_from(const StepDistribution& dist, double draw) {
  dist.validate();
  return dist.quantile(draw);
}

template <TransitionKernel Kernel, UniformSource Source>
State sample_step(const Kernel& kernel, const FallWindow& window, Source& draws) {
  return sample_from(kernel.next(window), draws.next_uniform());
}

enum class StopReason { hit_floor, step_cap };

constexpr std::string_view to_string(StopReason reason) noexcept {
  return reason == StopReason::hit_floor ? "hit_floor" : "step_cap";
}

struct Trajectory {
  State x0 = 0;
  std::vector<State> states;
  State floor_N = 0;
  StopReason stop_reason = StopReason::step_cap;
  std::optional<std::size_t> tau;
};

inline constexpr std::size_t kDefaultMaxSteps = 1'000'000;

/// Runs the chain from x0 until it first enters [0, N] or max_steps
/// transitions have been made.
template <TransitionKernel Kernel, UniformSource Source>
Trajectory simulate_path(const Kernel& kernel, State x0, std::size_t max_steps, Source& stream) {
  if (max_steps == 0) {
    throw Error(ErrorCode::invalid_parameter, "max_steps must be positive");
  }
  Trajectory traj;
  traj.x0 = x0;
  traj.floor_N = kernel.floor_level();
  traj.states.push_back(x0);

  FallWindow window(x0);
  for (std::size_t step = 0;; ++step) {
    if (window.current() <= traj.floor_N) {
      traj.stop_reason = StopReason::hit_floor;
      traj.tau = step;
      return traj;
    }
    if (step == max_steps) {
      traj.stop_reason = StopReason::step_cap;
      return traj;
    }
    const State next = sample_step(kernel, window, stream);
    window.advance(next);
    traj.states.push_back(next);
  }
}

}  // namespace markov_up
