#pragma once

#include <cstdint>
#include <cmath>

namespace ekhmc {

// splitmix64 finalizer; used both for seeding and for deriving substream keys.
inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Counter-based stream of random draws. A stream is identified by a 64-bit
/// key; substream(i) derives an independent stream, so callers can assign one
/// stream per (iteration, particle) and obtain results that do not depend on
/// evaluation order or thread count.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) { key_ = mix64(seed ^ 0x8badf00d5eedULL); }

  RngStream substream(std::uint64_t index) const {
    RngStream s(0);
    s.key_ = mix64(key_ ^ mix64(index + 0x51ed2701ULL));
    return s;
  }

  std::uint64_t key() const { return key_; }

 private:
  std::uint64_t key_;
};

/// xoshiro256++ generator with a polar-method normal sampler. Much faster
/// than std::mt19937_64 + std::normal_distribution and, unlike the standard
/// library distributions, bit-reproducible across platforms.
class NormalRng {
 public:
  explicit NormalRng(const RngStream& stream) {
    std::uint64_t k = stream.key();
    for (auto& si : s_) {
      k = mix64(k);
      si = k;
    }
    has_spare_ = false;
  }

  std::uint64_t next_u64() {
    const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  /// Uniform double in [0, 1).
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Uniform double in (-1, 1), never exactly 0.
  double uniform_sym() {
    const std::int64_t v = static_cast<std::int64_t>(next_u64() >> 10) - (1LL << 53);
    return (static_cast<double>(v) + 0.5) * 0x1.0p-53;
  }

  /// Standard normal draw (Marsaglia polar method, cached pair).
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u, v, r2;
    do {
      u = uniform_sym();
      v = uniform_sym();
      r2 = u * u + v * v;
    } while (r2 >= 1.0 || r2 == 0.0);
    const double f = std::sqrt(-2.0 * std::log(r2) / r2);
    spare_ = v * f;
    has_spare_ = true;
    return u * f;
  }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }

  std::uint64_t s_[4];
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace ekhmc
