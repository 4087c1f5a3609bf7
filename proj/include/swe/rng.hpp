#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace swe::rng {

// SplitMix64 finalizer, used to whiten stream keys.
inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Independent stream key for a (seed, sample, mode) triple. Identical triples
// give identical streams in any threading mode.
inline std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t sample,
                                 std::uint64_t mode) {
  std::uint64_t s = mix64(seed);
  s = mix64(s ^ mix64(sample + 0x9e3779b97f4a7c15ULL));
  s = mix64(s ^ mix64(mode + 0x6a09e667f3bcc909ULL));
  return s;
}

// Standard-normal stream: Box-Muller over mt19937_64, so draws do not depend
// on the standard library's normal_distribution internals.
class NormalStream {
 public:
  NormalStream(std::uint64_t seed, std::uint64_t sample, std::uint64_t mode)
      : engine_(stream_seed(seed, sample, mode)) {}

  double operator()() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double u1 = ((engine_() >> 11) + 1) * 0x1.0p-53;  // (0,1]
    const double u2 = (engine_() >> 11) * 0x1.0p-53;        // [0,1)
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    spare_ = radius * std::sin(angle);
    have_spare_ = true;
    return radius * std::cos(angle);
  }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace swe::rng
