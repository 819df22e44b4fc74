#pragma once

#include "markov_up/error.hpp"
#include "markov_up/model.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>

namespace markov_up {

inline constexpr double kDefaultEpsilon = 1e-10;

/// Partial sum plus a proven bound on the discarded tail: the exact series
/// lies in [value, value + tail_bound] up to floating-point rounding of the
/// partial sum itself.
struct SeriesValue {
  double value = 0.0;
  std::uint64_t truncation_K = 0;
  double tail_bound = 0.0;

  double upper() const noexcept { return value + tail_bound; }

  SeriesValue scaled(double factor) const noexcept {
    return SeriesValue{value * factor, truncation_K, tail_bound * factor};
  }
};

namespace detail {

// Neumaier-compensated accumulator in extended precision.
class CompensatedSum {
 public:
  void add(long double term) noexcept {
    const long double t = sum_ + term;
    if (std::fabs(sum_) >= std::fabs(term)) {
      compensation_ += (sum_ - t) + term;
    } else {
      compensation_ += (term - t) + sum_;
    }
    sum_ = t;
  }
  long double value() const noexcept { return sum_ + compensation_; }

 private:
  long double sum_ = 0.0L;
  long double compensation_ = 0.0L;
};

inline void check_epsilon(double eps) {
  if (!(eps > 0.0) || !std::isfinite(eps)) {
    throw Error(ErrorCode::invalid_parameter, "series tolerance must be positive, got " + std::to_string(eps));
  }
}

}  // namespace detail

/// sum_{k>=1} k^m q^k. Stops at the first K where the ratio majorant
/// rho_K = q ((K+1)/K)^m is below one and the tail majorant
/// term_K rho_K / (1 - rho_K) is below eps both absolutely and relative to
/// the partial sum; term ratios only shrink past K, so the majorant holds.
inline SeriesValue power_series(unsigned m, double q, double eps = kDefaultEpsilon) {
  if (!in_open_unit_interval(q)) {
    throw Error(ErrorCode::invalid_q, "power series ratio must lie in (0, 1), got " + std::to_string(q));
  }
  detail::check_epsilon(eps);

  detail::CompensatedSum sum;
  long double q_power = 1.0L;
  for (std::uint64_t k = 1;; ++k) {
    q_power *= q;
    const long double k_pow = static_cast<long double>(ipow(static_cast<double>(k), m));
    const long double term = k_pow * q_power;
    sum.add(term);

    const long double growth = std::pow(static_cast<long double>(k + 1) / static_cast<long double>(k),
                                        static_cast<long double>(m));
    const long double rho = q * growth;
    if (rho < 1.0L) {
      const long double tail = term * rho / (1.0L - rho);
      if (tail < eps && tail < eps * sum.value()) {
        return SeriesValue{static_cast<double>(sum.value()), k, static_cast<double>(tail)};
      }
    }
  }
}

/// sum_{i>=1} i^m (1 - kappa_i) for the geometric-gap family.
inline SeriesValue lemma2_sum(unsigned m, const KappaSpec& kappa, double eps = kDefaultEpsilon) {
  kappa.validate();
  detail::check_epsilon(eps);
  return power_series(m, kappa.r, eps / kappa.a).scaled(kappa.a);
}

/// E G^m for G geometric on {0, 1, ...} with P(G = j) = s (1 - s)^j.
inline SeriesValue jump_moment(double s, unsigned m, double eps = kDefaultEpsilon) {
  if (!in_open_unit_interval(s)) {
    throw Error(ErrorCode::invalid_parameter, "up-jump parameter s must lie in (0, 1), got " + std::to_string(s));
  }
  if (m == 0) return SeriesValue{1.0, 0, 0.0};
  // The j = 0 term vanishes for m >= 1.
  return power_series(m, 1.0 - s, eps / s).scaled(s);
}

/// Overshoot bound for rises. The proof's assembled value
/// M_m * sum i^m q^(i-1) and the stated M_m * q * sum i^m q^i differ by index
/// bookkeeping; the larger is the one used downstream.
struct Lemma3Bound {
  SeriesValue proof_assembled;
  SeriesValue statement_literal;

  const SeriesValue& certified() const noexcept {
    return proof_assembled.upper() >= statement_literal.upper() ? proof_assembled : statement_literal;
  }
};

inline Lemma3Bound lemma3_bound(unsigned m, double q, double jump_moment_m, double eps = kDefaultEpsilon) {
  if (!in_open_unit_interval(q)) {
    throw Error(ErrorCode::invalid_q, "overshoot series ratio must lie in (0, 1), got " + std::to_string(q));
  }
  if (!(jump_moment_m >= 0.0) || !std::isfinite(jump_moment_m)) {
    throw Error(ErrorCode::invalid_parameter, "jump moment must be finite and non-negative");
  }
  detail::check_epsilon(eps);
  const SeriesValue base = power_series(m, q, eps * q / std::max(jump_moment_m, 1.0));
  return Lemma3Bound{base.scaled(jump_moment_m / q), base.scaled(jump_moment_m * q)};
}

/// q_bar = 1 - prod_{i>=0} kappa_i. With P_K the partial product, the
/// remaining log-factor obeys 0 <= -sum_{i>K} log kappa_i <= a r^(K+1) / ((1-r) kappa_K),
/// which brackets q_bar in [1 - P_K, 1 - P_K + P_K (1 - exp(-L))].
inline SeriesValue q_bar(const KappaSpec& kappa, double eps = kDefaultEpsilon) {
  kappa.validate();
  detail::check_epsilon(eps);
  long double product = 1.0L;
  for (std::uint64_t K = 0;; ++K) {
    const long double k_K = 1.0L - static_cast<long double>(kappa.a) * std::pow(static_cast<long double>(kappa.r), K);
    product *= k_K;
    const long double log_tail =
        static_cast<long double>(kappa.a) * std::pow(static_cast<long double>(kappa.r), K + 1) /
        ((1.0L - kappa.r) * k_K);
    const long double tail = product * -std::expm1(-log_tail);
    if (tail < eps) {
      return SeriesValue{static_cast<double>(1.0L - product), K, static_cast<double>(tail)};
    }
  }
}

/// Every constant the moment bound of order m needs, all as certified series.
struct BoundSet {
  unsigned m = 1;
  double q = 0.0;                // 1 - kappa_0
  SeriesValue q_bar;             // 1 - prod kappa_i
  SeriesValue rise_series;       // sum k^m q^k
  SeriesValue fall_series;       // sum i^m (1 - kappa_i)
  SeriesValue jump_moment;       // E (up-jump)^m
  Lemma3Bound overshoot;         // M_m-scaled overshoot series
  SeriesValue attempt_series;    // sum i^m q_bar^(i-1)
};

inline BoundSet compute_bound_set(const BenchmarkModelSpec& spec, unsigned m, double eps = kDefaultEpsilon) {
  spec.validate();
  if (m == 0) throw Error(ErrorCode::invalid_parameter, "moment order must be positive");
  BoundSet b;
  b.m = m;
  b.q = 1.0 - kappa_at(spec.kappa, 0);
  b.q_bar = q_bar(spec.kappa, eps);
  b.rise_series = power_series(m, b.q, eps);
  b.fall_series = lemma2_sum(m, spec.kappa, eps);
  b.jump_moment = jump_moment(spec.s, m, eps);
  b.overshoot = lemma3_bound(m, b.q, b.jump_moment.upper(), eps);
  // The attempt series grows with q_bar, so evaluating at the upper end is conservative.
  const double qb = b.q_bar.upper();
  b.attempt_series = power_series(m, qb, eps * qb).scaled(1.0 / qb);
  return b;
}

struct TheoremBound {
  double C1 = 0.0;
  double C2 = 0.0;
  double final_display = 0.0;   // C1 (C2 + x^m), C2 = (M2 + M3 + M4 q_bar) S
  double proof_assembly = 0.0;  // term-by-term sum of the proof's inequalities
  double value = 0.0;           // max of the two

  bool operator==(const TheoremBound&) const = default;
};

/// Bound on E_x tau^m. The proof's term-by-term sum
///   2^(m-1) sum_i [2^(m-1) i^m M2 qb^(i-1) + 2^(m-1) (i-1)^m M3 qb^(i-2)]
///   + 2^(2m-2) x^m + 2^(m-1) sum_i 2^(m-1) i^m M4 qb^(i-1)
/// collapses to 2^(2m-2) (x^m + (M2 + M3 + M4) S) because both index shifts
/// reproduce S = sum i^m qb^(i-1) (the i = 1 term of the M3 sum is zero).
inline TheoremBound theorem_bound(unsigned m, State x, const BoundSet& b) {
  if (m == 0) throw Error(ErrorCode::invalid_parameter, "moment order must be positive");
  const double S = b.attempt_series.upper();
  const double M2 = b.rise_series.upper();
  const double M3 = b.fall_series.upper();
  const double M4 = b.overshoot.certified().upper();
  const double qb = b.q_bar.upper();
  const double x_m = ipow(static_cast<double>(x), m);

  TheoremBound out;
  out.C1 = ipow(2.0, 2 * m - 2);
  out.C2 = (M2 + M3 + M4 * qb) * S;
  out.final_display = out.C1 * (out.C2 + x_m);
  out.proof_assembly = out.C1 * (x_m + (M2 + M3 + M4) * S);
  out.value = std::max(out.final_display, out.proof_assembly);
  return out;
}

}  // namespace markov_up
