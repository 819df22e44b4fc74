#include "markov_up/bounds.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <vector>

namespace markov_up {
namespace {

constexpr double kEps = 1e-10;

KappaSpec kappa(double a, double r) { return KappaSpec{KappaSpec::Form::geometric_gap, a, r}; }

// The brute-force sum to 10 K terms must fall inside the certified bracket.
// The slack covers rounding in the partial sums, not truncation.
void expect_bracket(const SeriesValue& v, long double brute) {
  const long double slack = 64 * std::numeric_limits<double>::epsilon() * std::fabs(brute);
  EXPECT_GE(brute + slack, static_cast<long double>(v.value));
  EXPECT_LE(brute - slack, static_cast<long double>(v.value) + v.tail_bound);
  EXPECT_LE(v.tail_bound, kEps);
}

TEST(PowerSeries, SecondOrderClosedForm) {
  // q (1 + q) / (1 - q)^3 at q = 1/2 is 0.75 / 0.125 = 6.
  const SeriesValue v = power_series(2, 0.5, kEps);
  EXPECT_NEAR(v.value, 6.0, kEps);
}

TEST(PowerSeries, LowOrders) {
  EXPECT_NEAR(power_series(1, 0.5, kEps).value, 2.0, kEps);
  EXPECT_NEAR(power_series(0, 0.5, kEps).value, 1.0, kEps);
}

TEST(PowerSeries, ClosedFormsOnGrid) {
  for (const double q : {0.1, 0.3, 0.5, 0.7, 0.9}) {
    const double c0 = q / (1 - q);
    const double c1 = q / ((1 - q) * (1 - q));
    const double c2 = q * (1 + q) / std::pow(1 - q, 3);
    EXPECT_NEAR(power_series(0, q, kEps).value / c0, 1.0, 1e-10) << q;
    EXPECT_NEAR(power_series(1, q, kEps).value / c1, 1.0, 1e-10) << q;
    EXPECT_NEAR(power_series(2, q, kEps).value / c2, 1.0, 1e-10) << q;
  }
}

TEST(PowerSeries, CertifiedBracketAgainstBruteForce) {
  for (const unsigned m : {0U, 1U, 3U, 6U}) {
    for (const double q : {0.05, 0.5, 0.71, 0.9}) {
      const SeriesValue v = power_series(m, q, kEps);
      expect_bracket(v, oracle::power_sum(m, q, 10 * v.truncation_K));
    }
  }
}

TEST(PowerSeries, RejectsRatioOutsideUnitInterval) {
  for (const double q : {0.0, 1.0, -0.2, 1.5}) {
    try {
      power_series(1, q);
      FAIL() << q;
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::invalid_q);
    }
  }
  EXPECT_THROW(power_series(1, 0.5, 0.0), Error);
}

TEST(FallSeries, Examples) {
  EXPECT_NEAR(lemma2_sum(1, kappa(0.5, 0.5), kEps).value, 1.0, kEps);
  EXPECT_NEAR(lemma2_sum(2, kappa(0.5, 0.5), kEps).value, 3.0, kEps);
  EXPECT_LT(lemma2_sum(1, kappa(1e-9, 0.5), kEps).value, 1e-8);
  const SeriesValue v = lemma2_sum(3, kappa(0.3, 0.8), kEps);
  expect_bracket(v, 0.3L * oracle::power_sum(3, 0.8L, 10 * v.truncation_K));
}

TEST(JumpMoment, GeometricMoments) {
  EXPECT_NEAR(jump_moment(0.5, 1, kEps).value, 1.0, kEps);
  EXPECT_NEAR(jump_moment(0.5, 2, kEps).value, 3.0, kEps);
  for (const double s : {0.1, 0.5, 0.9}) {
    EXPECT_DOUBLE_EQ(jump_moment(s, 0).value, 1.0);
    EXPECT_NEAR(jump_moment(s, 1, kEps).value, (1 - s) / s, 1e-9);
    EXPECT_NEAR(jump_moment(s, 2, kEps).value, (1 - s) * (2 - s) / (s * s), 1e-9);
  }
}

TEST(Lemma3Bound, BothReadings) {
  const Lemma3Bound b = lemma3_bound(1, 0.5, 1.0, kEps);
  EXPECT_NEAR(b.proof_assembled.value, 4.0, 1e-9);  // 1 / (1 - q)^2
  EXPECT_NEAR(b.statement_literal.value, 1.0, 1e-9);  // q^2 / (1 - q)^2
  EXPECT_NEAR(b.certified().value, 4.0, 1e-9);
  EXPECT_LE(b.proof_assembled.tail_bound, kEps);

  const Lemma3Bound zero = lemma3_bound(2, 0.5, 0.0, kEps);
  EXPECT_EQ(zero.certified().value, 0.0);
  EXPECT_EQ(zero.certified().tail_bound, 0.0);
}

TEST(QBar, BenchmarkValue) {
  const SeriesValue v = q_bar(kappa(0.5, 0.5), kEps);
  const long double brute = 1.0L - oracle::kappa_product(0.5L, 0.5L, 200);
  EXPECT_NEAR(v.value, static_cast<double>(brute), 1e-10);
  EXPECT_NEAR(v.value, 0.71121190491339758, 1e-10);
  EXPECT_LE(v.tail_bound, kEps);
  expect_bracket(v, brute);
}

TEST(QBar, Limits) {
  EXPECT_LT(q_bar(kappa(1e-9, 0.5), kEps).value, 1e-8);
  EXPECT_NEAR(q_bar(kappa(0.4, 1e-9), kEps).value, 0.4, 1e-8);
  const SeriesValue slow = q_bar(kappa(0.2, 0.99), kEps);
  expect_bracket(slow, 1.0L - oracle::kappa_product(0.2L, 0.99L, 10 * slow.truncation_K));
}

BoundSet half_bounds(unsigned m) {
  BenchmarkModelSpec spec;
  return compute_bound_set(spec, m, kEps);
}

TEST(TheoremBound, FirstMomentPlugIn) {
  const BoundSet b = half_bounds(1);
  EXPECT_NEAR(b.rise_series.value, 2.0, 1e-9);
  EXPECT_NEAR(b.fall_series.value, 1.0, 1e-9);
  EXPECT_NEAR(b.overshoot.certified().value, 4.0, 1e-9);
  for (const State x : {0U, 6U, 10U, 20U}) {
    const TheoremBound t = theorem_bound(1, x, b);
    // (2 + 1 + 4 q_bar) / (1 - q_bar)^2 recomputed with high-precision q_bar.
    EXPECT_NEAR(t.final_display, x + 70.083312576012043, 1e-7);
    EXPECT_NEAR(t.C1, 1.0, 0.0);
    EXPECT_NEAR(t.C2, 70.083312576012043, 1e-7);
    EXPECT_GE(t.value, t.final_display);
  }
}

// The proof's inequalities summed term by term, independently of the
// collapsed closed form used by theorem_bound.
double proof_assembly_by_terms(unsigned m, double x, double M2, double M3, double M4, double qb) {
  const double half = std::pow(2.0, m - 1.0);
  long double total = std::pow(2.0L, 2.0L * m - 2) * std::pow(static_cast<long double>(x), m);
  for (int i = 1; i < 4000; ++i) {
    const long double li = i;
    long double term = half * std::pow(li, m) * M2 * std::pow(static_cast<long double>(qb), i - 1);
    if (i >= 2) term += half * std::pow(li - 1, m) * M3 * std::pow(static_cast<long double>(qb), i - 2);
    term += half * std::pow(li, m) * M4 * std::pow(static_cast<long double>(qb), i - 1);
    total += half * term;
  }
  return static_cast<double>(total);
}

TEST(TheoremBound, ProofAssemblyMatchesTermByTermSum) {
  for (const unsigned m : {1U, 2U, 3U, 5U}) {
    const BoundSet b = half_bounds(m);
    for (const State x : {6U, 20U}) {
      const TheoremBound t = theorem_bound(m, x, b);
      const double oracle = proof_assembly_by_terms(m, x, b.rise_series.upper(), b.fall_series.upper(),
                                                    b.overshoot.certified().upper(), b.q_bar.upper());
      EXPECT_NEAR(t.proof_assembly / oracle, 1.0, 1e-9) << "m=" << m << " x=" << x;
      EXPECT_DOUBLE_EQ(t.value, std::max(t.proof_assembly, t.final_display));
    }
  }
}

TEST(TheoremBound, FrozenConstantsForBenchmark) {
  // C2 = (M2 + M3 + M4 q_bar) S with S = sum i^m q_bar^(i-1), from a 40-digit evaluation.
  const double expected_C2[] = {70.083312576012043, 2458.5982980361756, 325130.66666109120};
  const double expected_C1[] = {1.0, 4.0, 16.0};
  for (unsigned m = 1; m <= 3; ++m) {
    const TheoremBound t = theorem_bound(m, 10, half_bounds(m));
    EXPECT_NEAR(t.C2 / expected_C2[m - 1], 1.0, 1e-8) << m;
    EXPECT_DOUBLE_EQ(t.C1, expected_C1[m - 1]);
  }
}

TEST(TheoremBound, ZeroStartAndMonotoneInX) {
  for (unsigned m = 1; m <= 6; ++m) {
    const BoundSet b = half_bounds(m);
    const TheoremBound at_zero = theorem_bound(m, 0, b);
    EXPECT_DOUBLE_EQ(at_zero.final_display, at_zero.C1 * at_zero.C2);
    double prev = at_zero.value;
    for (State x = 1; x <= 50; ++x) {
      const double cur = theorem_bound(m, x, b).value;
      ASSERT_GT(cur, prev);
      prev = cur;
    }
  }
}

TEST(TheoremBound, FiniteAndDominatesComponents) {
  for (unsigned m = 1; m <= 6; ++m) {
    const BoundSet b = half_bounds(m);
    const double v = theorem_bound(m, 6, b).value;
    EXPECT_TRUE(std::isfinite(v));
    EXPECT_GE(v, b.rise_series.upper());
    EXPECT_GE(v, b.fall_series.upper());
    EXPECT_GE(v, b.overshoot.certified().upper());
    EXPECT_GE(v, std::pow(6.0, m));
  }
  EXPECT_THROW(theorem_bound(0, 6, half_bounds(1)), Error);
}

}  // namespace
}  // namespace markov_up
