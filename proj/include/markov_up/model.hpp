#pragma once

#include "markov_up/error.hpp"
#include "markov_up/process.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace markov_up {

/// base^exponent by repeated squaring; plain IEEE multiplies, so the result
/// does not depend on the platform's pow().
constexpr double ipow(double base, std::uint64_t exponent) noexcept {
  double result = 1.0;
  while (exponent != 0) {
    if (exponent & 1U) result *= base;
    base *= base;
    exponent >>= 1U;
  }
  return result;
}

inline bool in_open_unit_interval(double v) noexcept { return v > 0.0 && v < 1.0; }

/// Continuation probabilities kappa_i = 1 - a * r^i of the geometric-gap
/// family. Strictly increasing to 1, and sum(1 - kappa_i) = a / (1 - r).
struct KappaSpec {
  enum class Form { geometric_gap };

  Form form = Form::geometric_gap;
  double a = 0.5;
  double r = 0.5;

  void validate() const {
    if (!in_open_unit_interval(a)) {
      throw Error(ErrorCode::invalid_parameter, "kappa parameter a must lie in (0, 1), got " + std::to_string(a));
    }
    if (!in_open_unit_interval(r)) {
      throw Error(ErrorCode::invalid_parameter, "kappa parameter r must lie in (0, 1), got " + std::to_string(r));
    }
  }

  /// 1 - kappa_i.
  double gap(std::uint64_t i) const noexcept { return a * ipow(r, i); }
};

inline double kappa_at(const KappaSpec& spec, std::uint64_t i) noexcept { return 1.0 - spec.gap(i); }

struct BenchmarkModelSpec {
  KappaSpec kappa;
  double s = 0.5;  // up-jump law P(j) = s (1 - s)^j, j >= 0
  State floor_N = 5;

  void validate() const {
    kappa.validate();
    if (!in_open_unit_interval(s)) {
      throw Error(ErrorCode::invalid_parameter, "up-jump parameter s must lie in (0, 1), got " + std::to_string(s));
    }
  }
};

/// Falls by one with probability kappa_l after l consecutive falls, otherwise
/// jumps up by a geometric amount (possibly zero). State 0 always takes the
/// up branch.
class BenchmarkKernel {
 public:
  explicit BenchmarkKernel(const BenchmarkModelSpec& spec) : spec_(spec) {
    spec_.validate();
    // kappa becomes exactly 1.0 in double precision after finitely many terms.
    for (std::uint64_t i = 0;; ++i) {
      const double k = kappa_at(spec_.kappa, i);
      kappa_table_.push_back(k);
      if (k == 1.0) break;
    }
  }

  const BenchmarkModelSpec& spec() const noexcept { return spec_; }
  State floor_level() const noexcept { return spec_.floor_N; }

  double kappa(std::size_t fall_length) const noexcept {
    return fall_length < kappa_table_.size() ? kappa_table_[fall_length] : 1.0;
  }

  StepDistribution next(const FallWindow& window) const {
    const State x = window.current();
    const double s = spec_.s;
    StepDistribution dist;
    if (x == 0) {
      dist.tail = GeometricTail{0, s, 1.0 - s};
      return dist;
    }
    const double k = kappa(window.fall_length());
    dist.atoms.push_back(Atom{x - 1, k});
    dist.tail = GeometricTail{x, (1.0 - k) * s, 1.0 - s};
    return dist;
  }

 private:
  BenchmarkModelSpec spec_;
  std::vector<double> kappa_table_;
};

inline BenchmarkKernel build_benchmark(const BenchmarkModelSpec& spec) { return BenchmarkKernel(spec); }

/// kappa == 1: every step above 0 is a fall by one, so tau == x0 - N.
class DeterministicFallKernel {
 public:
  explicit DeterministicFallKernel(State floor_N) : floor_N_(floor_N) {}

  State floor_level() const noexcept { return floor_N_; }

  StepDistribution next(const FallWindow& window) const {
    const State x = window.current();
    StepDistribution dist;
    dist.atoms.push_back(Atom{x == 0 ? 0 : x - 1, 1.0});
    return dist;
  }

 private:
  State floor_N_;
};

static_assert(TransitionKernel<BenchmarkKernel>);
static_assert(TransitionKernel<DeterministicFallKernel>);

}  // namespace markov_up
