#pragma once

#include <cstdint>
#include <random>

namespace metalens {

/// Seedable, splittable generator for the Monte Carlo engine.
///
/// Streams are std::mt19937_64 engines (output sequence fixed by the C++
/// standard) seeded with SplitMix64(seed, stream), so stream i of seed s is
/// the same on every platform and independent of how many threads ran the
/// other streams. Variates are produced here rather than by std::
/// distributions, whose algorithms are implementation-defined.
class Rng {
 public:
  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0);

  /// Independent generator for sub-stream `stream` of this generator's seed.
  Rng split(std::uint64_t stream) const;

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform();
  double uniform(double low, double high) { return low + (high - low) * uniform(); }

  /// Standard normal via Box-Muller; the second variate is cached.
  double normal();
  double normal(double mean, double sd) { return mean + sd * normal(); }

  bool bernoulli(double p) { return uniform() < p; }

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream() const { return stream_; }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

/// SplitMix64 finaliser applied to (seed, stream); exposed for tests.
std::uint64_t derive_stream_seed(std::uint64_t seed, std::uint64_t stream);

}  // namespace metalens
