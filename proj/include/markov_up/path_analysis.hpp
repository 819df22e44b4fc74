#pragma once

#include "markov_up/error.hpp"
#include "markov_up/process.hpp"

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace markov_up {

namespace detail {

inline void check_index(std::span<const State> states, std::size_t n) {
  if (n >= states.size()) {
    throw Error(ErrorCode::index_out_of_range,
                "index " + std::to_string(n) + " outside path of length " + std::to_string(states.size()));
  }
}

// Last index of the run starting at n whose steps satisfy `in_run`, or
// nullopt when the path ends before a step leaves the run.
template <class StepPredicate>
std::optional<std::size_t> run_end(std::span<const State> states, std::size_t n, StepPredicate in_run) {
  std::size_t k = n;
  while (k + 1 < states.size() && in_run(states[k], states[k + 1])) ++k;
  if (k + 1 == states.size()) return std::nullopt;
  return k;
}

inline bool rising(State from, State to) noexcept { return to >= from; }
inline bool falling(State from, State to) noexcept { return to < from; }

}  // namespace detail

/// Start of the strict fall ending at n; n itself if the last step was not a fall.
inline std::size_t zeta_at(std::span<const State> states, std::size_t n) {
  detail::check_index(states, n);
  std::size_t k = n;
  while (k > 0 && states[k] < states[k - 1]) --k;
  return k;
}

/// End of the non-decreasing run starting at n.
inline std::size_t xi_at(std::span<const State> states, std::size_t n) {
  detail::check_index(states, n);
  const auto end = detail::run_end(states, n, detail::rising);
  if (!end) {
    throw Error(ErrorCode::unterminated_run, "path ends while still rising from index " + std::to_string(n));
  }
  return *end;
}

/// End of the strict fall starting at n.
inline std::size_t chi_at(std::span<const State> states, std::size_t n) {
  detail::check_index(states, n);
  const auto end = detail::run_end(states, n, detail::falling);
  if (!end) {
    throw Error(ErrorCode::unterminated_run, "path ends while still falling from index " + std::to_string(n));
  }
  return *end;
}

inline std::optional<std::size_t> tau_of(std::span<const State> states, State floor_N) noexcept {
  for (std::size_t t = 0; t < states.size(); ++t) {
    if (states[t] <= floor_N) return t;
  }
  return std::nullopt;
}

enum class StartCase {
  falling,  // first step is a strict fall: t0 = T0 = 0
  rising,   // first step is non-decreasing: T0 = 0, t0 = xi_0
};

/// Attempt j falls over [begin, end] = [t_{j-1}, T_j].
struct Attempt {
  std::size_t index = 0;
  std::size_t begin = 0;
  std::size_t end = 0;
  bool success = false;

  std::size_t length() const noexcept { return end - begin; }
};

/// Rise j covers [begin, end] = [T_j, t_j]; only nonempty rises are listed.
struct Rise {
  std::size_t index = 0;
  std::size_t begin = 0;
  std::size_t end = 0;

  std::size_t length() const noexcept { return end - begin; }
};

/// Alternating fall/rise structure of a floor-hitting path:
///   T_0 = 0, t_0 (= 0 or xi_0), T_1 = chi(t_0), t_1 = xi(T_1), ...
/// The last attempt is the only successful one and ends at tau.
struct AttemptDecomposition {
  StartCase start_case = StartCase::falling;
  std::vector<std::size_t> fall_ends;  // T_0, T_1, ..., T_i
  std::vector<std::size_t> rise_ends;  // t_0, t_1, ..., t_{i-1}
  std::vector<Attempt> attempts;
  std::vector<Rise> rises;
  std::size_t successful_attempt = 0;
  std::size_t tau = 0;
};

/// Decomposes states[0..tau] into fall attempts and rises. The fall that
/// reaches the floor is cut at tau.
inline AttemptDecomposition decompose_attempts(std::span<const State> states, State floor_N) {
  const auto tau = tau_of(states, floor_N);
  if (!tau) throw Error(ErrorCode::not_hit, "path never enters the floor set");

  AttemptDecomposition d;
  d.tau = *tau;
  d.fall_ends.push_back(0);
  if (d.tau == 0) {
    d.rise_ends.push_back(0);
    d.attempts.push_back(Attempt{1, 0, 0, true});
    d.successful_attempt = 1;
    return d;
  }

  const auto prefix = states.first(d.tau + 1);
  // Every rise before tau is followed by a fall, so xi never runs off the prefix.
  d.start_case = prefix[1] < prefix[0] ? StartCase::falling : StartCase::rising;
  std::size_t t = d.start_case == StartCase::falling ? 0 : xi_at(prefix, 0);
  d.rise_ends.push_back(t);
  if (t > 0) d.rises.push_back(Rise{0, 0, t});

  for (std::size_t j = 1;; ++j) {
    const std::size_t fall_end = detail::run_end(prefix, t, detail::falling).value_or(d.tau);
    const bool success = fall_end == d.tau;
    d.fall_ends.push_back(fall_end);
    d.attempts.push_back(Attempt{j, t, fall_end, success});
    if (success) {
      d.successful_attempt = j;
      return d;
    }
    t = xi_at(prefix, fall_end);
    d.rise_ends.push_back(t);
    d.rises.push_back(Rise{j, fall_end, t});
  }
}

inline AttemptDecomposition decompose_attempts(const Trajectory& traj) {
  if (traj.stop_reason != StopReason::hit_floor || !traj.tau) {
    throw Error(ErrorCode::not_hit, "trajectory stopped at the step cap before reaching the floor");
  }
  return decompose_attempts(traj.states, traj.floor_N);
}

}  // namespace markov_up
