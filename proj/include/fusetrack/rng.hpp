#pragma once

#include <cstdint>
#include <random>

namespace fusetrack {

// Portable random source. The engine is std::mt19937_64, whose output
// sequence is fixed by the C++ standard. Distributions are implemented here
// rather than taken from <random> because the standard library's
// distributions are implementation-defined and would break cross-platform
// reproducibility of generated scenarios.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Independent stream for a (seed, tag) pair, mixed through splitmix64.
  static Rng stream(std::uint64_t seed, std::uint64_t tag);

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform in [0, 1) with 53 random bits.
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, n). n must be > 0.
  std::uint64_t below(std::uint64_t n);

  /// Standard normal via Box-Muller; the second variate is cached.
  double normal();
  double normal(double mean, double stddev) { return mean + stddev * normal(); }

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

std::uint64_t splitmix64(std::uint64_t x);

}  // namespace fusetrack
