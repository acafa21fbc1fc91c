#pragma once

// Counter-based splittable random streams.
//
// Every consumer of randomness owns a stream keyed by (master seed, purpose
// tag, indices).  Streams are cheap to construct, independent of scheduling,
// and fully determine their output from the key, so results are bitwise
// reproducible no matter how work is distributed across threads.

#include <cmath>
#include <cstdint>
#include <string_view>

namespace rplq {

namespace detail {

// SplitMix64 finalizer: a strong 64-bit mixing function.
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// FNV-1a over the tag string so stream purposes occupy distinct key spaces.
inline std::uint64_t hash_tag(std::string_view tag) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : tag) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace detail

class RngStream {
 public:
  RngStream(std::uint64_t seed, std::string_view tag, std::uint64_t i0 = 0,
            std::uint64_t i1 = 0, std::uint64_t i2 = 0) {
    std::uint64_t k = detail::mix64(seed ^ detail::hash_tag(tag));
    k = detail::mix64(k ^ i0);
    k = detail::mix64(k ^ i1);
    k = detail::mix64(k ^ i2);
    state_ = k;
  }

  std::uint64_t next_u64() {
    state_ += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform in [0, 1) with 53 bits of precision.
  double uniform01() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) {
    return lo + (hi - lo) * uniform01();
  }

  // Standard normal via Box-Muller; the spare is cached so draws come in a
  // fixed order regardless of how callers interleave with uniforms.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = uniform01();
    double u2 = uniform01();
    // Guard against log(0).
    while (u1 <= 0.0) u1 = uniform01();
    double mag = std::sqrt(-2.0 * std::log(u1));
    double ang = 6.283185307179586476925286766559 * u2;
    spare_ = mag * std::sin(ang);
    has_spare_ = true;
    return mag * std::cos(ang);
  }

  // Derive a sub-seed for nested stream families (e.g. per-iteration seeds
  // that in turn key per-rollout streams).
  std::uint64_t derive() { return next_u64(); }

 private:
  std::uint64_t state_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace rplq
