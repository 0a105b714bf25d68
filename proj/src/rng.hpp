#pragma once

#include <cmath>
#include <cstdint>

namespace ps {

// splitmix64: used only to expand seeds into xoshiro state words.
inline uint64_t splitmix64(uint64_t& x) {
  uint64_t z = (x += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// xoshiro256++ with hand-rolled normal/poisson sampling so that sequences are
// identical across platforms and standard-library versions. Per-trajectory
// streams are derived from (master_seed, stream_index) only; see make_stream.
class rng {
 public:
  explicit rng(uint64_t seed) { reseed(seed); }

  void reseed(uint64_t seed) {
    uint64_t x = seed;
    for (auto& w : s_) w = splitmix64(x);
    have_spare_ = false;
  }

  uint64_t next_u64() {
    const uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
    const uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  // uniform on (0,1); never returns 0 so logs are safe.
  double uniform() {
    uint64_t u = next_u64() >> 11;
    return (static_cast<double>(u) + 0.5) * 0x1.0p-53;
  }

  // Box-Muller, consuming exactly two uniforms per pair of normals.
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    double u2 = uniform();
    double m = std::sqrt(-2.0 * std::log(u1));
    double a = 6.283185307179586476925286766559 * u2;
    spare_ = m * std::sin(a);
    have_spare_ = true;
    return m * std::cos(a);
  }

  // Poisson(mean) by inversion; intended for small means (step click counts).
  int poisson(double mean) {
    if (mean <= 0.0) return 0;
    double u = uniform();
    double pk = std::exp(-mean);
    double cdf = pk;
    int k = 0;
    while (u > cdf && k < 64) {
      ++k;
      pk *= mean / k;
      cdf += pk;
    }
    return k;
  }

 private:
  static uint64_t rotl(uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
  uint64_t s_[4];
  double spare_ = 0.0;
  bool have_spare_ = false;
};

// Documented stream derivation: stream i seeds xoshiro from
// splitmix64 expansion of master_seed XOR golden*(i+1). Streams are
// independent of scheduling and thread count by construction.
inline rng make_stream(uint64_t master_seed, uint64_t stream_index) {
  return rng(master_seed ^ (0x9E3779B97F4A7C15ULL * (stream_index + 1)));
}

}  // namespace ps
