#pragma once

// Counter-based random streams. Every draw is a pure function of
// (key, counter), so parallel generation never changes the output.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <string_view>

namespace dynlaw {

constexpr std::uint64_t splitmix64(std::uint64_t z) noexcept {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// FNV-1a, used to turn purpose names into substream tags.
constexpr std::uint64_t hash_tag(std::string_view s) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

/// Derives an independent key from a parent key and an integer label.
constexpr std::uint64_t derive_key(std::uint64_t parent, std::uint64_t label) noexcept {
  return splitmix64(parent ^ splitmix64(label + 0x632be59bd9b4e019ULL));
}

constexpr std::uint64_t derive_key(std::uint64_t parent, std::string_view purpose) noexcept {
  return derive_key(parent, hash_tag(purpose));
}

/// A stream of 64-bit values indexed by a counter.
class CounterRng {
public:
  using result_type = std::uint64_t;

  explicit constexpr CounterRng(std::uint64_t key, std::uint64_t counter = 0) noexcept
      : key_(key), counter_(counter) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return ~result_type{0}; }

  constexpr result_type operator()() noexcept {
    return splitmix64(key_ ^ splitmix64(counter_++));
  }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() noexcept { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  double uniform(double a, double b) noexcept { return a + (b - a) * uniform(); }

  /// Standard normal via Box-Muller; consumes two counters per call.
  double normal() noexcept {
    double u1 = uniform();
    const double u2 = uniform();
    if (u1 <= 0.0) u1 = 0x1.0p-53;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  std::uint64_t key() const noexcept { return key_; }
  std::uint64_t counter() const noexcept { return counter_; }

private:
  std::uint64_t key_;
  std::uint64_t counter_;
};

} // namespace dynlaw
