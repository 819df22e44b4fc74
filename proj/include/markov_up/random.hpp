#pragma once

#include <cstdint>

namespace markov_up {

// SplitMix64 output finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// Counter-based uniform stream. The k-th output is a pure function of
/// (key, k), so a path's draws never depend on how paths are scheduled.
/// Only integer arithmetic is involved, which keeps runs reproducible
/// across platforms and compilers.
class CounterStream {
 public:
  static constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ULL;

  constexpr explicit CounterStream(std::uint64_t key) noexcept : key_(key) {}

  /// Substream for one path of a seeded experiment.
  static constexpr CounterStream for_path(std::uint64_t seed, std::uint64_t path_index) noexcept {
    return CounterStream(mix64(mix64(seed) ^ mix64(path_index + kGamma)));
  }

  constexpr std::uint64_t next_u64() noexcept {
    ++counter_;
    return mix64(key_ + counter_ * kGamma);
  }

  /// Uniform on [0, 1) with 53 random bits.
  constexpr double next_uniform() noexcept {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  constexpr std::uint64_t draws() const noexcept { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace markov_up
