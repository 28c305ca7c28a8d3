#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <numbers>
#include <string_view>

namespace bbm::stats {

/// SplitMix64 finalizer. Bijective on 64-bit words.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x ^= x >> 30;
  x *= 0xbf58476d1ce4e5b9ULL;
  x ^= x >> 27;
  x *= 0x94d049bb133111ebULL;
  x ^= x >> 31;
  return x;
}

constexpr std::uint64_t hash_label(std::string_view label) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
  for (char c : label) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return mix64(h);
}

/// Derives a sub-seed from a parent seed and a sequence of integer labels.
/// Pure: the result depends only on the arguments, never on call order.
constexpr std::uint64_t derive_stream(std::uint64_t seed,
                                      std::initializer_list<std::uint64_t> labels) noexcept {
  std::uint64_t h = mix64(seed ^ 0x6a09e667f3bcc908ULL);
  for (std::uint64_t label : labels) {
    h = mix64(h ^ mix64(label + 0x9e3779b97f4a7c15ULL));
  }
  return h;
}

constexpr std::uint64_t derive_stream(std::uint64_t seed, std::string_view label) noexcept {
  return derive_stream(seed, {hash_label(label)});
}

constexpr std::uint64_t derive_stream(std::uint64_t seed, std::string_view label,
                                      std::uint64_t index) noexcept {
  return derive_stream(seed, {hash_label(label), index});
}

/// Bit pattern of a double, for use as a stream label.
constexpr std::uint64_t label_of(double x) noexcept { return std::bit_cast<std::uint64_t>(x); }

/// Counter-based generator: the i-th output is mix64(key + (i+1)*gamma).
/// Streams for different keys are obtained through derive_stream, so no
/// generator state is ever shared between particles, chunks or workers.
class CounterRng {
 public:
  using result_type = std::uint64_t;

  explicit CounterRng(std::uint64_t key) noexcept : state_(key) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return ~result_type{0}; }

  result_type operator()() noexcept {
    state_ += 0x9e3779b97f4a7c15ULL;
    return mix64(state_);
  }

  /// Uniform on [0, 1).
  double uniform() noexcept { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  /// Uniform on (0, 1].
  double uniform_pos() noexcept {
    return static_cast<double>(((*this)() >> 11) + 1) * 0x1.0p-53;
  }

  /// Standard normal by Box-Muller; the second variate of each pair is cached.
  double normal() noexcept {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double radius = std::sqrt(-2.0 * std::log(uniform_pos()));
    const double angle = 2.0 * std::numbers::pi * uniform();
    spare_ = radius * std::sin(angle);
    has_spare_ = true;
    return radius * std::cos(angle);
  }

  /// Exponential with the given rate, by inversion.
  double exponential(double rate) noexcept { return -std::log(uniform_pos()) / rate; }

 private:
  std::uint64_t state_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

/// Poisson variate by CDF inversion; large means are split into pieces.
std::uint64_t poisson(CounterRng& rng, double mean);

}  // namespace bbm::stats
