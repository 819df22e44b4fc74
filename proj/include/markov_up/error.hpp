#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace markov_up {

enum class ErrorCode {
  distribution_invalid,
  invalid_parameter,
  invalid_q,
  index_out_of_range,
  unterminated_run,
  not_hit,
  all_capped,
  assumptions_fail,
};

constexpr std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::distribution_invalid: return "distribution-invalid";
    case ErrorCode::invalid_parameter: return "invalid-parameter";
    case ErrorCode::invalid_q: return "invalid-q";
    case ErrorCode::index_out_of_range: return "index-out-of-range";
    case ErrorCode::unterminated_run: return "unterminated-run";
    case ErrorCode::not_hit: return "not-hit";
    case ErrorCode::all_capped: return "all-capped";
    case ErrorCode::assumptions_fail: return "assumptions-fail";
  }
  return "unknown";
}

// All library failures are reported through this one exception type; the
// code is stable and machine-checkable, the message is for humans.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace markov_up
