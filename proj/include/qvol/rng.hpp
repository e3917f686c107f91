#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>

namespace qvol {

/// Splittable pseudo-random stream.
///
/// Streams are identified by a 64-bit key; `child(i)` derives an independent
/// stream from the parent's key and the index `i`, never from the parent's
/// current position.  Sampling the same key therefore yields the same values
/// no matter how work is sliced across threads or processes.
///
/// The generator is xoshiro256++ seeded through splitmix64.  Floating-point
/// helpers are implemented on top of the raw 64-bit output so that results
/// are identical across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t key) : key_(key) {
    std::uint64_t s = key;
    for (auto& w : state_) w = splitmix(s);
  }

  /// Derives the stream for sub-task `index`: mixing is one-way, so child
  /// streams are statistically independent of the parent and of each other.
  Rng child(std::uint64_t index) const {
    std::uint64_t s = key_ ^ 0x9e3779b97f4a7c15ull;
    std::uint64_t k = splitmix(s);
    s = k ^ (index + 0xbf58476d1ce4e5b9ull);
    return Rng(splitmix(s));
  }

  /// Derives a stream from a path of indices (e.g. {kind, run, sample}).
  Rng child_path(std::initializer_list<std::uint64_t> path) const {
    Rng r = *this;
    for (auto idx : path) r = r.child(idx);
    return r;
  }

  std::uint64_t key() const { return key_; }

  /// Raw 64 uniform bits.
  std::uint64_t bits() {
    const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(bits() >> 11) * 0x1.0p-53; }

  /// Uniform integer in [0, n).  Unbiased via rejection.
  std::uint64_t below(std::uint64_t n) {
    const std::uint64_t threshold = (0 - n) % n;
    for (;;) {
      std::uint64_t r = bits();
      if (r >= threshold) return r % n;
    }
  }

  /// Standard normal deviate (Box-Muller; pairs cached).
  double normal() {
    if (have_cached_) {
      have_cached_ = false;
      return cached_;
    }
    double u1, u2;
    do {
      u1 = uniform();
    } while (u1 <= 0.0);
    u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 6.283185307179586476925286766559 * u2;
    cached_ = r * std::sin(a);
    have_cached_ = true;
    return r * std::cos(a);
  }

 private:
  static std::uint64_t splitmix(std::uint64_t& s) {
    std::uint64_t z = (s += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  static std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }

  std::uint64_t key_;
  std::uint64_t state_[4];
  bool have_cached_ = false;
  double cached_ = 0.0;
};

}  // namespace qvol
