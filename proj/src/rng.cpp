#include "dsgd/rng.hpp"

namespace dsgd {

namespace {
constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;
constexpr std::uint64_t kSplitSalt = 0xD1B54A32D192ED03ULL;
}  // namespace

std::uint64_t mix64(std::uint64_t x) noexcept {
  x ^= x >> 30;
  x *= 0xBF58476D1CE4E5B9ULL;
  x ^= x >> 27;
  x *= 0x94D049BB133111EBULL;
  x ^= x >> 31;
  return x;
}

std::uint64_t hash_combine(std::uint64_t a, std::uint64_t b) noexcept {
  return mix64(mix64(a + kGolden) ^ (b * kSplitSalt + 0x632BE59BD9B4E019ULL));
}

RngStream::RngStream(std::uint64_t seed) noexcept : key_(mix64(seed ^ kSplitSalt)) {}

RngStream::result_type RngStream::operator()() noexcept {
  // Two rounds so that nearby (key, counter) pairs decorrelate.
  const std::uint64_t c = counter_++;
  return mix64(mix64(c * kGolden + key_) ^ key_);
}

double RngStream::uniform() noexcept {
  return static_cast<double>((*this)() >> 11) * 0x1.0p-53;
}

std::size_t RngStream::uniform_index(std::size_t n) noexcept {
  // Lemire's multiply-shift with rejection.
  const std::uint64_t range = n;
  std::uint64_t x = (*this)();
  __uint128_t m = static_cast<__uint128_t>(x) * range;
  auto low = static_cast<std::uint64_t>(m);
  if (low < range) {
    const std::uint64_t threshold = (0 - range) % range;
    while (low < threshold) {
      x = (*this)();
      m = static_cast<__uint128_t>(x) * range;
      low = static_cast<std::uint64_t>(m);
    }
  }
  return static_cast<std::size_t>(m >> 64);
}

RngStream RngStream::split(std::uint64_t tag) const noexcept {
  return RngStream(hash_combine(key_, tag), true);
}

}  // namespace dsgd
