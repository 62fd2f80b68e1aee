#pragma once

#include <cmath>
#include <cstdint>

namespace mqrif {

// splitmix64 step; used both as a stream seeder and as a cheap mixer.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// xoshiro256** with explicitly coded output transforms.  All distribution
// draws below are written out by hand so that a (seed, draw sequence) pair
// produces the same bytes on any conforming compiler; the standard library
// distributions leave their algorithm implementation-defined, which would
// break replay tests across toolchains.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) {
    std::uint64_t sm = seed;
    for (auto& word : s_) word = splitmix64(sm);
  }

  // Derive the RNG for one replicate of a batch so that replicate i's draws
  // do not depend on how many draws replicate i-1 consumed.
  static Rng stream(std::uint64_t master_seed, std::uint64_t index) {
    std::uint64_t mix = master_seed;
    std::uint64_t a = splitmix64(mix);
    mix ^= 0x632be59bd9b4e019ULL + (index << 1);
    std::uint64_t b = splitmix64(mix);
    return Rng(a ^ (b * 0x2545f4914f6cdd1dULL) ^ index);
  }

  std::uint64_t next_u64() {
    const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  // Uniform on [0,1) with 53 random bits.
  double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform on (0,1]; safe as a log() argument.
  double uniform01_open() { return 1.0 - uniform01(); }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // Unbiased integer in [0, n) by rejection.
  std::uint64_t below(std::uint64_t n) {
    const std::uint64_t threshold = (0 - n) % n;
    for (;;) {
      const std::uint64_t r = next_u64();
      if (r >= threshold) return r % n;
    }
  }

  // Box-Muller pair, one value cached.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = uniform01_open();
    const double u2 = uniform01();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * pi_ * u2;
    spare_ = radius * std::sin(angle);
    has_spare_ = true;
    return radius * std::cos(angle);
  }

  double normal(double mean, double sd) { return mean + sd * normal(); }

  // Standard Cauchy by inverse CDF (equals a t distribution with 1 df).
  double cauchy() { return std::tan(pi_ * (uniform01() - 0.5)); }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }

  static constexpr double pi_ = 3.14159265358979323846;
  std::uint64_t s_[4];
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace mqrif
