#pragma once

// Reproducible random streams.
//
// Every stream is an std::mt19937_64 (output sequence fixed by the C++
// standard) seeded with a 64-bit key. Keys for sub-streams are derived from
// (seed, path...) by chaining SplitMix64, so e.g. each Monte Carlo block gets
// its own stream keyed by (seed, point index, block index).
//
// Uniform doubles take the top 53 bits of one engine output. Gaussians use
// the Marsaglia polar method, caching the second variate. Neither depends on
// the standard library's distribution implementations, so the sample
// sequence is identical on every platform.

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <random>

namespace ccn {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

inline std::uint64_t derive_key(std::uint64_t seed, std::initializer_list<std::uint64_t> path) {
  std::uint64_t key = splitmix64(seed);
  for (std::uint64_t p : path) key = splitmix64(key ^ splitmix64(p + 0x632BE59BD9B4E019ULL));
  return key;
}

// Stream tags, so that e.g. training noise and validation noise never share a key.
enum class StreamTag : std::uint64_t {
  kInit = 1,
  kTrainBatch = 2,
  kValidation = 3,
  kSweepBlock = 4,
  kSelfTest = 5,
};

class RandomStream {
 public:
  explicit RandomStream(std::uint64_t key) : engine_(key) {}

  RandomStream(std::uint64_t seed, std::initializer_list<std::uint64_t> path)
      : engine_(derive_key(seed, path)) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform on [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  // Uniform on [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer on [0, n), n > 0, rejection-sampled (no modulo bias).
  std::uint64_t below(std::uint64_t n) {
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x = 0;
    do {
      x = engine_();
    } while (x >= limit);
    return x % n;
  }

  bool bernoulli(double p) { return uniform() < p; }

  // Standard normal via the Marsaglia polar method.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u = 0.0, v = 0.0, s = 0.0;
    do {
      u = 2.0 * uniform() - 1.0;
      v = 2.0 * uniform() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double scale = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * scale;
    has_spare_ = true;
    return u * scale;
  }

  double normal(double mean, double stddev) { return mean + stddev * normal(); }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace ccn
