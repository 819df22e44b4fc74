#pragma once

#include "markov_up/bounds.hpp"
#include "markov_up/error.hpp"
#include "markov_up/model.hpp"

#include <algorithm>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace markov_up {

enum class AssumptionStatus { holds_analytically, holds_numerically, fails, not_required };

constexpr std::string_view to_string(AssumptionStatus status) noexcept {
  switch (status) {
    case AssumptionStatus::holds_analytically: return "holds_analytically";
    case AssumptionStatus::holds_numerically: return "holds_numerically";
    case AssumptionStatus::fails: return "fails";
    case AssumptionStatus::not_required: return "not_required";
  }
  return "unknown";
}

struct AssumptionEntry {
  std::string id;
  AssumptionStatus status = AssumptionStatus::not_required;
  bool required_for_theorem = true;
  std::optional<double> tolerance;
  std::optional<std::uint64_t> witness;
  std::string note;

  bool holds() const noexcept {
    return status == AssumptionStatus::holds_analytically || status == AssumptionStatus::holds_numerically;
  }
};

struct AssumptionCertificate {
  std::vector<AssumptionEntry> entries;  // A1..A5 in order
  double q = 0.0;
  SeriesValue q_bar;
  double kappa_bar = 0.0;  // prod kappa_i, to within q_bar.tail_bound
  std::vector<SeriesValue> jump_moments;  // orders 1..m_max
  std::optional<double> rho_lower_bound;

  const AssumptionEntry& entry(std::string_view id) const {
    const auto it = std::find_if(entries.begin(), entries.end(), [&](const auto& e) { return e.id == id; });
    if (it == entries.end()) throw Error(ErrorCode::invalid_parameter, "no assumption " + std::string(id));
    return *it;
  }

  /// The moment bound needs A1 and A3-A5; A2 is reported but not required.
  bool theorem_assumptions_hold() const {
    return std::all_of(entries.begin(), entries.end(),
                       [](const auto& e) { return !e.required_for_theorem || e.holds(); });
  }
};

/// Assumption certificate for a benchmark model. Everything except A2 holds
/// by construction of the family; A2 is checked honestly and fails for N >= 1
/// because the probability of staying put, (1 - kappa_l) s, vanishes as the
/// fall length l grows.
inline AssumptionCertificate certify(const BenchmarkModelSpec& spec, unsigned m_max, double tol,
                                     double eps = kDefaultEpsilon) {
  spec.validate();
  if (m_max == 0) throw Error(ErrorCode::invalid_parameter, "m_max must be positive");
  if (!(tol > 0.0)) throw Error(ErrorCode::invalid_parameter, "A2 tolerance must be positive");

  AssumptionCertificate cert;
  cert.q = 1.0 - kappa_at(spec.kappa, 0);
  cert.q_bar = q_bar(spec.kappa, eps);
  cert.kappa_bar = 1.0 - cert.q_bar.value;
  for (unsigned m = 1; m <= m_max; ++m) cert.jump_moments.push_back(jump_moment(spec.s, m, eps));

  cert.entries.push_back({"A1", AssumptionStatus::holds_analytically, true, std::nullopt, std::nullopt,
                          "kernel reads only the fall window"});

  AssumptionEntry a2{"A2", AssumptionStatus::fails, false, tol, std::nullopt,
                     "not required by the moment bound"};
  if (spec.floor_N == 0) {
    // Only state 0 is in the floor set: stay with s, step to 1 with s (1 - s).
    a2.status = AssumptionStatus::holds_analytically;
    cert.rho_lower_bound = spec.s * (1.0 - spec.s);
  } else {
    std::uint64_t ell = 0;
    while (spec.kappa.gap(ell) * spec.s >= tol) ++ell;
    a2.witness = ell;
    a2.note = "P(stay) = (1 - kappa_l) s < tolerance at fall length l = witness; not required by the moment bound";
  }
  cert.entries.push_back(a2);

  cert.entries.push_back({"A3", AssumptionStatus::holds_analytically, true, std::nullopt, std::nullopt,
                          "kappa_i = 1 - a r^i is increasing; q = 1 - kappa_0 = a"});
  cert.entries.push_back({"A4", AssumptionStatus::holds_analytically, true, std::nullopt, std::nullopt,
                          "1 - kappa_i decays geometrically, so every polynomial series and the product converge"});
  cert.entries.push_back({"A5", AssumptionStatus::holds_analytically, true, std::nullopt, std::nullopt,
                          "geometric up-jumps have all moments"});
  return cert;
}

}  // namespace markov_up
