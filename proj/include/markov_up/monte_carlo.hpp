#pragma once

#include "markov_up/bounds.hpp"
#include "markov_up/certificate.hpp"
#include "markov_up/error.hpp"
#include "markov_up/model.hpp"
#include "markov_up/path_analysis.hpp"
#include "markov_up/process.hpp"
#include "markov_up/random.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

namespace markov_up {

/// Two-sided 99% normal quantile; also used as the one-sided rejection
/// threshold, which makes each one-sided test a 0.5% test.
inline constexpr double kZ99 = 2.576;
inline constexpr std::size_t kLowSampleThreshold = 100;

/// Welford streaming mean and variance.
class RunningStats {
 public:
  void add(double x) noexcept {
    ++n_;
    const double delta = x - mean_;
    mean_ += delta / static_cast<double>(n_);
    m2_ += delta * (x - mean_);
  }

  std::uint64_t count() const noexcept { return n_; }
  double mean() const noexcept { return mean_; }
  double variance() const noexcept { return n_ < 2 ? 0.0 : m2_ / static_cast<double>(n_ - 1); }
  double std_error() const noexcept { return n_ < 2 ? 0.0 : std::sqrt(variance() / static_cast<double>(n_)); }

 private:
  std::uint64_t n_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
};

enum class Quantity { tau_m, rise_length_m, fall_length_m, overshoot_m, attempt_survival };

constexpr std::string_view to_string(Quantity q) noexcept {
  switch (q) {
    case Quantity::tau_m: return "tau_m";
    case Quantity::rise_length_m: return "rise_length_m";
    case Quantity::fall_length_m: return "fall_length_m";
    case Quantity::overshoot_m: return "overshoot_m";
    case Quantity::attempt_survival: return "attempt_survival";
  }
  return "unknown";
}

/// For attempt_survival, m is the attempt count i and the mean is the
/// frequency of paths with at least i attempts.
struct MomentEstimate {
  Quantity quantity = Quantity::tau_m;
  unsigned m = 1;
  State x0 = 0;
  std::optional<std::uint32_t> segment_index;  // set for per-index breakdowns
  std::uint64_t n_samples = 0;
  double mean = 0.0;
  double variance = 0.0;
  double std_error = 0.0;
  double ci99_upper = 0.0;
  std::uint64_t capped_paths = 0;

  bool has_samples() const noexcept { return n_samples >= 2; }
  double ci99_lower() const noexcept { return mean - kZ99 * std_error; }
};

inline MomentEstimate make_estimate(Quantity quantity, unsigned m, State x0, const RunningStats& stats,
                                    std::uint64_t capped) {
  MomentEstimate e;
  e.quantity = quantity;
  e.m = m;
  e.x0 = x0;
  e.n_samples = stats.count();
  e.mean = stats.mean();
  e.variance = stats.variance();
  e.std_error = stats.std_error();
  e.ci99_upper = e.mean + kZ99 * e.std_error;
  e.capped_paths = capped;
  return e;
}

struct PathSummary {
  std::uint64_t path_id = 0;
  std::optional<std::uint64_t> tau;
  std::uint64_t attempts = 0;
  State max_state = 0;
  std::uint64_t steps = 0;

  bool capped() const noexcept { return !tau.has_value(); }
};

/// Rise [T_j, t_j] of one path: its length and its height gain.
struct RiseRecord {
  std::uint64_t path_id = 0;
  std::uint32_t index = 0;
  std::uint64_t length = 0;
  std::uint64_t overshoot = 0;
};

/// Fall of one attempt, successful or not.
struct FallRecord {
  std::uint64_t path_id = 0;
  std::uint32_t index = 0;
  std::uint64_t length = 0;
  bool success = false;
};

/// Everything the estimators need from n_traj simulated paths, stored in
/// path-index order.
struct SimulationBatch {
  State x0 = 0;
  State floor_N = 0;
  std::vector<PathSummary> paths;
  std::vector<RiseRecord> rises;
  std::vector<FallRecord> falls;
  std::vector<Trajectory> kept_trajectories;
  std::uint64_t total_steps = 0;
  std::uint64_t capped_paths = 0;
};

struct BatchOptions {
  std::size_t n_traj = 1000;
  std::uint64_t seed = 1;
  std::size_t max_steps = kDefaultMaxSteps;
  unsigned threads = 1;
  std::size_t keep_trajectories = 0;  // first paths whose full states are retained
};

/// Key of the substream family used for start state x0.
constexpr std::uint64_t batch_key(std::uint64_t seed, State x0) noexcept {
  return mix64(seed ^ mix64(x0 + CounterStream::kGamma));
}

namespace detail {

inline constexpr std::size_t kChunkPaths = 256;

inline void summarize_path(const Trajectory& traj, std::uint64_t path_id, SimulationBatch& out) {
  PathSummary summary;
  summary.path_id = path_id;
  summary.steps = traj.states.size() - 1;
  summary.max_state = *std::max_element(traj.states.begin(), traj.states.end());
  if (traj.stop_reason == StopReason::hit_floor) {
    summary.tau = *traj.tau;
    const AttemptDecomposition d = decompose_attempts(traj);
    summary.attempts = d.attempts.size();
    for (const Rise& r : d.rises) {
      out.rises.push_back(RiseRecord{path_id, static_cast<std::uint32_t>(r.index), r.length(),
                                     traj.states[r.end] - traj.states[r.begin]});
    }
    if (*traj.tau > 0) {
      for (const Attempt& a : d.attempts) {
        out.falls.push_back(FallRecord{path_id, static_cast<std::uint32_t>(a.index), a.length(), a.success});
      }
    }
  } else {
    ++out.capped_paths;
  }
  out.total_steps += summary.steps;
  out.paths.push_back(summary);
}

template <class T>
void append(std::vector<T>& into, std::vector<T>& from) {
  into.insert(into.end(), std::make_move_iterator(from.begin()), std::make_move_iterator(from.end()));
}

}  // namespace detail

/// Simulates n_traj paths from x0. Path i always uses the substream
/// (batch_key(seed, x0), i), and chunks are merged in index order, so the
/// result is identical for every thread count.
template <TransitionKernel Kernel>
SimulationBatch simulate_batch(const Kernel& kernel, State x0, const BatchOptions& options) {
  if (options.n_traj == 0) throw Error(ErrorCode::invalid_parameter, "n_traj must be positive");
  if (options.max_steps == 0) throw Error(ErrorCode::invalid_parameter, "max_steps must be positive");

  const std::uint64_t key = batch_key(options.seed, x0);
  const std::size_t n_chunks = (options.n_traj + detail::kChunkPaths - 1) / detail::kChunkPaths;
  std::vector<SimulationBatch> chunks(n_chunks);
  std::vector<std::exception_ptr> errors(n_chunks);
  std::atomic<std::size_t> next_chunk{0};

  auto work = [&] {
    for (std::size_t c = next_chunk.fetch_add(1); c < n_chunks; c = next_chunk.fetch_add(1)) {
      try {
        const std::size_t begin = c * detail::kChunkPaths;
        const std::size_t end = std::min(options.n_traj, begin + detail::kChunkPaths);
        SimulationBatch& local = chunks[c];
        local.paths.reserve(end - begin);
        for (std::size_t i = begin; i < end; ++i) {
          CounterStream stream = CounterStream::for_path(key, i);
          Trajectory traj = simulate_path(kernel, x0, options.max_steps, stream);
          detail::summarize_path(traj, i, local);
          if (i < options.keep_trajectories) local.kept_trajectories.push_back(std::move(traj));
        }
      } catch (...) {
        errors[c] = std::current_exception();
      }
    }
  };

  const unsigned workers = std::max(1U, std::min<unsigned>(options.threads, static_cast<unsigned>(n_chunks)));
  if (workers == 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  SimulationBatch batch;
  batch.x0 = x0;
  batch.floor_N = kernel.floor_level();
  batch.paths.reserve(options.n_traj);
  for (SimulationBatch& chunk : chunks) {
    detail::append(batch.paths, chunk.paths);
    detail::append(batch.rises, chunk.rises);
    detail::append(batch.falls, chunk.falls);
    detail::append(batch.kept_trajectories, chunk.kept_trajectories);
    batch.total_steps += chunk.total_steps;
    batch.capped_paths += chunk.capped_paths;
  }
  return batch;
}

/// Moments of tau over the paths that reached the floor. Capped paths are
/// excluded and counted.
inline std::vector<MomentEstimate> tau_moments(const SimulationBatch& batch, std::span<const unsigned> m_list) {
  std::vector<MomentEstimate> out;
  for (const unsigned m : m_list) {
    RunningStats stats;
    for (const PathSummary& p : batch.paths) {
      if (p.tau) stats.add(ipow(static_cast<double>(*p.tau), m));
    }
    out.push_back(make_estimate(Quantity::tau_m, m, batch.x0, stats, batch.capped_paths));
  }
  return out;
}

struct SegmentEstimates {
  MomentEstimate rise_length;
  MomentEstimate fall_length;  // length^m * 1(fall ends before tau), over every attempt
  MomentEstimate overshoot;
  std::vector<MomentEstimate> rise_length_by_index;
  std::vector<MomentEstimate> fall_length_by_index;
  std::vector<MomentEstimate> overshoot_by_index;
};

/// Pools every rise and every attempt's fall of the batch. A fall that
/// reaches the floor contributes 0 to the fall-length moment. The per-index
/// breakdowns cover segment indices 0..index_breakdown-1.
inline SegmentEstimates segment_moments(const SimulationBatch& batch, unsigned m, std::size_t index_breakdown = 5) {
  RunningStats rise, fall, overshoot;
  std::vector<RunningStats> rise_by(index_breakdown), fall_by(index_breakdown), overshoot_by(index_breakdown);
  for (const RiseRecord& r : batch.rises) {
    const double len = ipow(static_cast<double>(r.length), m);
    const double gain = ipow(static_cast<double>(r.overshoot), m);
    rise.add(len);
    overshoot.add(gain);
    if (r.index < index_breakdown) {
      rise_by[r.index].add(len);
      overshoot_by[r.index].add(gain);
    }
  }
  for (const FallRecord& f : batch.falls) {
    const double len = f.success ? 0.0 : ipow(static_cast<double>(f.length), m);
    fall.add(len);
    if (f.index < index_breakdown) fall_by[f.index].add(len);
  }

  const auto cap = batch.capped_paths;
  SegmentEstimates out;
  out.rise_length = make_estimate(Quantity::rise_length_m, m, batch.x0, rise, cap);
  out.fall_length = make_estimate(Quantity::fall_length_m, m, batch.x0, fall, cap);
  out.overshoot = make_estimate(Quantity::overshoot_m, m, batch.x0, overshoot, cap);
  for (std::size_t j = 0; j < index_breakdown; ++j) {
    const auto idx = static_cast<std::uint32_t>(j);
    out.rise_length_by_index.push_back(make_estimate(Quantity::rise_length_m, m, batch.x0, rise_by[j], cap));
    out.rise_length_by_index.back().segment_index = idx;
    out.fall_length_by_index.push_back(make_estimate(Quantity::fall_length_m, m, batch.x0, fall_by[j], cap));
    out.fall_length_by_index.back().segment_index = idx;
    out.overshoot_by_index.push_back(make_estimate(Quantity::overshoot_m, m, batch.x0, overshoot_by[j], cap));
    out.overshoot_by_index.back().segment_index = idx;
  }
  return out;
}

/// Frequency of paths needing at least i attempts, i = 1..max_attempts.
inline std::vector<MomentEstimate> attempt_survival(const SimulationBatch& batch, unsigned max_attempts) {
  std::vector<MomentEstimate> out;
  for (unsigned i = 1; i <= max_attempts; ++i) {
    RunningStats stats;
    for (const PathSummary& p : batch.paths) {
      if (p.tau) stats.add(p.attempts >= i ? 1.0 : 0.0);
    }
    out.push_back(make_estimate(Quantity::attempt_survival, i, batch.x0, stats, batch.capped_paths));
  }
  return out;
}

namespace detail {

inline void require_some_hit(const SimulationBatch& batch) {
  if (batch.capped_paths == batch.paths.size()) {
    throw Error(ErrorCode::all_capped, "every path reached the step cap");
  }
}

}  // namespace detail

template <TransitionKernel Kernel>
std::vector<MomentEstimate> estimate_tau_moments(const Kernel& kernel, State x0, std::span<const unsigned> m_list,
                                                 const BatchOptions& options) {
  const SimulationBatch batch = simulate_batch(kernel, x0, options);
  detail::require_some_hit(batch);
  return tau_moments(batch, m_list);
}

template <TransitionKernel Kernel>
SegmentEstimates estimate_segment_moments(const Kernel& kernel, State x0, unsigned m, const BatchOptions& options) {
  const SimulationBatch batch = simulate_batch(kernel, x0, options);
  detail::require_some_hit(batch);
  return segment_moments(batch, m);
}

enum class Criterion {
  ci_upper_below_bound,  // mean + z se <= bound: the bound is demonstrated
  not_rejected,          // mean - z se <= bound: "E <= bound" survives a one-sided test
};

constexpr std::string_view to_string(Criterion c) noexcept {
  return c == Criterion::ci_upper_below_bound ? "ci_upper_below_bound" : "not_rejected";
}

enum class VerdictStatus { pass, fail, withheld };

constexpr std::string_view to_string(VerdictStatus s) noexcept {
  switch (s) {
    case VerdictStatus::pass: return "pass";
    case VerdictStatus::fail: return "fail";
    case VerdictStatus::withheld: return "withheld";
  }
  return "unknown";
}

struct VerificationVerdict {
  std::string check;  // theorem, rise_length, fall_length, overshoot, attempt_tail
  MomentEstimate estimate;
  double bound = 0.0;
  Criterion criterion = Criterion::ci_upper_below_bound;
  double slack = 0.0;  // bound minus the tested statistic
  bool pass = false;
  VerdictStatus status = VerdictStatus::withheld;
  std::string note;
};

inline VerificationVerdict judge(std::string check, const MomentEstimate& estimate, double bound,
                                 Criterion criterion) {
  VerificationVerdict v;
  v.check = std::move(check);
  v.estimate = estimate;
  v.bound = bound;
  v.criterion = criterion;
  const double statistic =
      criterion == Criterion::ci_upper_below_bound ? estimate.ci99_upper : estimate.ci99_lower();
  v.slack = bound - statistic;
  if (estimate.capped_paths > 0) {
    v.note = "capped-paths";
  } else if (!estimate.has_samples()) {
    v.note = "no-samples";
  } else {
    v.pass = v.slack >= 0.0;
    v.status = v.pass ? VerdictStatus::pass : VerdictStatus::fail;
  }
  return v;
}

struct VerifyOptions {
  std::vector<State> x_grid{6, 10, 20};
  std::vector<unsigned> m_list{1, 2, 3};
  std::size_t n_traj = 100'000;
  std::uint64_t seed = 1;
  std::size_t max_steps = kDefaultMaxSteps;
  unsigned threads = 1;
  double epsilon = kDefaultEpsilon;
  unsigned attempt_tail_max = 5;
  double a2_tolerance = 1e-6;
  std::size_t keep_trajectories = 0;
};

struct GridPointResult {
  State x0 = 0;
  SimulationBatch batch;
  std::vector<MomentEstimate> tau;          // one per m
  std::vector<SegmentEstimates> segments;   // one per m
  std::vector<MomentEstimate> survival;     // i = 1..attempt_tail_max
};

struct VerificationResult {
  AssumptionCertificate certificate;
  std::vector<BoundSet> bound_sets;  // one per m
  std::vector<GridPointResult> grid;
  std::vector<VerificationVerdict> verdicts;

  /// No failed verdict and none withheld because of capping.
  bool all_pass() const noexcept {
    return std::none_of(verdicts.begin(), verdicts.end(), [](const auto& v) {
      return v.status == VerdictStatus::fail || (v.status == VerdictStatus::withheld && v.note == "capped-paths");
    });
  }

  std::uint64_t total_steps() const noexcept {
    std::uint64_t total = 0;
    for (const auto& g : grid) total += g.batch.total_steps;
    return total;
  }
};

/// Simulates each start state once and checks the tau-moment bound (bound
/// demonstrated at 99%), the three segment bounds and the attempt tail
/// P(at least i attempts) <= q_bar^(i-1) (each a one-sided test at 99%).
template <TransitionKernel Kernel>
VerificationResult verify(const Kernel& kernel, const BenchmarkModelSpec& spec, const VerifyOptions& options) {
  if (options.m_list.empty() || options.x_grid.empty()) {
    throw Error(ErrorCode::invalid_parameter, "x_grid and m_list must be non-empty");
  }
  VerificationResult result;
  const unsigned m_max = *std::max_element(options.m_list.begin(), options.m_list.end());
  result.certificate = certify(spec, m_max, options.a2_tolerance, options.epsilon);
  if (!result.certificate.theorem_assumptions_hold()) {
    throw Error(ErrorCode::assumptions_fail, "A1 and A3-A5 must hold before verification");
  }
  for (const unsigned m : options.m_list) result.bound_sets.push_back(compute_bound_set(spec, m, options.epsilon));

  const BatchOptions batch_options{options.n_traj, options.seed, options.max_steps, options.threads,
                                   options.keep_trajectories};
  const double qb = result.certificate.q_bar.upper();

  for (const State x0 : options.x_grid) {
    GridPointResult g;
    g.x0 = x0;
    g.batch = simulate_batch(kernel, x0, batch_options);
    g.tau = tau_moments(g.batch, options.m_list);
    for (std::size_t k = 0; k < options.m_list.size(); ++k) {
      const BoundSet& b = result.bound_sets[k];
      g.segments.push_back(segment_moments(g.batch, b.m));
      result.verdicts.push_back(
          judge("theorem", g.tau[k], theorem_bound(b.m, x0, b).value, Criterion::ci_upper_below_bound));
      const SegmentEstimates& seg = g.segments.back();
      result.verdicts.push_back(judge("rise_length", seg.rise_length, b.rise_series.upper(), Criterion::not_rejected));
      result.verdicts.push_back(judge("fall_length", seg.fall_length, b.fall_series.upper(), Criterion::not_rejected));
      result.verdicts.push_back(
          judge("overshoot", seg.overshoot, b.overshoot.certified().upper(), Criterion::not_rejected));
    }
    g.survival = attempt_survival(g.batch, options.attempt_tail_max);
    for (const MomentEstimate& e : g.survival) {
      result.verdicts.push_back(judge("attempt_tail", e, ipow(qb, e.m - 1), Criterion::not_rejected));
    }
    result.grid.push_back(std::move(g));
  }
  return result;
}

}  // namespace markov_up
