#pragma once

#include <cstdint>
#include <random>
#include <span>

namespace crpmap {

/// Seedable random stream built on std::mt19937_64, whose output sequence is fixed
/// by the C++ standard. The variate transforms below are implemented here rather
/// than taken from <random> because the standard leaves the distribution
/// algorithms to each library; owning them keeps results identical across
/// toolchains for a given seed.
///
/// Independent streams for replicates, restarts or worker threads come from
/// `split(stream)`, which hashes (seed, stream) through SplitMix64.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : seed_(seed), engine_(seed) {}

  std::uint64_t seed() const { return seed_; }
  Rng split(std::uint64_t stream) const { return Rng(derive_seed(seed_, stream)); }
  static std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

  std::uint64_t next_u64() { return engine_(); }
  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  /// Uniform on (0, 1).
  double uniform_open() {
    double u;
    do {
      u = uniform();
    } while (u == 0.0);
    return u;
  }
  /// Uniform integer in [0, n), unbiased by rejection.
  std::uint64_t below(std::uint64_t n);

  double normal();
  double normal(double mean, double sd) { return mean + sd * normal(); }
  /// Gamma with the given shape and rate (mean shape / rate).
  double gamma(double shape, double rate);

  /// Index drawn with probability proportional to weights (non-negative, positive sum).
  std::size_t categorical(std::span<const double> weights);
  /// Index drawn with probability proportional to exp(log_weights), max-shifted.
  std::size_t categorical_log(std::span<const double> log_weights);

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace crpmap
