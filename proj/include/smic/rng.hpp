#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <stdexcept>

namespace smic {

/// Deterministic random stream.
///
/// All variate generation routes through next() and uniform() so that a
/// given seed reproduces the same sequence on every platform, independent
/// of standard-library distribution internals. Replicated computations
/// derive one stream per replicate index, which keeps results invariant
/// under the number of worker threads.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : gen_(seed) {}

  /// Independent stream for (master seed, stream index). Indices are mixed
  /// through a splitmix64 finalizer so that nearby indices do not yield
  /// correlated mt19937_64 seeds.
  static RngStream derive(std::uint64_t master, std::uint64_t stream) {
    return RngStream(mix(master ^ mix(stream + 0x9e3779b97f4a7c15ULL)));
  }

  std::uint64_t next() { return gen_(); }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  bool bernoulli(double p) { return uniform() < p; }

  /// Exponential variate by inversion; log1p keeps the tail exact for
  /// uniforms near zero.
  double exponential(double rate) {
    if (!(rate > 0)) throw std::domain_error("exponential: rate must be positive");
    return -std::log1p(-uniform()) / rate;
  }

  /// Uniform index in {0, ..., n-1}, unbiased by rejection.
  std::size_t index(std::size_t n) {
    if (n == 0) throw std::domain_error("index: n must be positive");
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max();
    const std::uint64_t bound = limit - limit % n;
    std::uint64_t v = next();
    while (v >= bound) v = next();
    return static_cast<std::size_t>(v % n);
  }

 private:
  static std::uint64_t mix(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  std::mt19937_64 gen_;
};

}  // namespace smic
