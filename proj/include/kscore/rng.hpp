#pragma once

#include <cstdint>
#include <Eigen/Dense>

namespace kscore {

/// Counter-based 64-bit generator (SplitMix64, Steele/Lea/Flood 2014).
///
/// The i-th output is finalize(seed + i * 0x9E3779B97F4A7C15), so the whole
/// sequence is a pure function of the seed. Streams are split by hashing a
/// purpose tag together with the *construction* seed, never the current
/// position, so `rng.split(tag)` yields the same child stream no matter how
/// many draws preceded it. Every consumer in the library owns its own stream
/// (see `streams` below), which keeps experiments reproducible end to end.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : seed_(seed), state_(seed) {}

  std::uint64_t next_u64() {
    state_ += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  /// Uniform double in [0, 1), 53 random bits.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double a, double b) { return a + (b - a) * uniform(); }

  /// Unbiased integer in [0, n) by rejection.
  std::uint64_t uniform_below(std::uint64_t n) {
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x;
    do {
      x = next_u64();
    } while (x >= limit);
    return x % n;
  }

  /// Standard normal via Box-Muller; the spare of each pair is cached.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = 1.0 - uniform();  // (0, 1], keeps log finite
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * M_PI * u2;
    spare_ = r * std::sin(a);
    has_spare_ = true;
    return r * std::cos(a);
  }

  Eigen::VectorXd normal_vec(int d) {
    Eigen::VectorXd v(d);
    for (int i = 0; i < d; ++i) v[i] = normal();
    return v;
  }

  /// Independent child stream keyed by (construction seed, tag).
  Rng split(std::uint64_t tag) const {
    std::uint64_t z = seed_ ^ (0xA0761D6478BD642FULL + tag * 0xE7037ED1A0B428DBULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return Rng(z ^ (z >> 31));
  }

  std::uint64_t seed() const { return seed_; }

 private:
  std::uint64_t seed_;
  std::uint64_t state_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

/// Stream tags, one per purpose. All seeded code paths derive their stream as
/// Rng(seed).split(tag) so that e.g. changing the batch order can never
/// perturb dataset generation.
namespace streams {
constexpr std::uint64_t kData = 1;
constexpr std::uint64_t kCenters = 2;
constexpr std::uint64_t kInit = 3;
constexpr std::uint64_t kBatches = 4;
constexpr std::uint64_t kSampling = 5;
constexpr std::uint64_t kSplit = 6;
constexpr std::uint64_t kMetrics = 7;
}  // namespace streams

}  // namespace kscore
