#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>

namespace dsgd {

/// 64-bit finalizer from SplitMix64.
std::uint64_t mix64(std::uint64_t x) noexcept;

/// Order-dependent combination of two 64-bit values.
std::uint64_t hash_combine(std::uint64_t a, std::uint64_t b) noexcept;

/// Counter-based random stream.
///
/// Output i of a stream is a pure function of (key, i), so a stream can be
/// split into child streams by tag without advancing the parent. Children
/// derived with different tags have unrelated keys; `id()` exposes the key so
/// callers can assert that two consumers draw from distinct streams.
///
/// Satisfies UniformRandomBitGenerator, so it plugs into <random>
/// distributions.
class RngStream {
 public:
  using result_type = std::uint64_t;

  explicit RngStream(std::uint64_t seed) noexcept;

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept {
    return std::numeric_limits<result_type>::max();
  }

  result_type operator()() noexcept;

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() noexcept;

  /// Uniform integer in [0, n). `n` must be positive.
  std::size_t uniform_index(std::size_t n) noexcept;

  /// Child stream for `tag`. Does not advance this stream.
  [[nodiscard]] RngStream split(std::uint64_t tag) const noexcept;
  [[nodiscard]] RngStream split(std::uint64_t a, std::uint64_t b) const noexcept {
    return split(a).split(b);
  }

  std::uint64_t id() const noexcept { return key_; }
  std::uint64_t position() const noexcept { return counter_; }

 private:
  RngStream(std::uint64_t key, bool) noexcept : key_(key) {}

  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace dsgd
