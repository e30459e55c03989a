#pragma once

#include <cstdint>
#include <random>

namespace histolim {

/// A reproducible substream: identical (seed, stream_id) pairs replay the
/// same draws, distinct stream ids give independent sequences.
class RandomStream {
 public:
  RandomStream(std::uint64_t seed, std::uint64_t stream_id);

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t stream_id() const noexcept { return stream_id_; }

  /// Uniform on the open interval (0, 1).
  double uniform();
  double normal();
  /// Gamma(shape, 1); shape 0 gives exactly 0.
  double gamma(double shape);
  /// log of a Gamma(shape, 1) draw, accurate for very small shapes;
  /// -infinity for shape 0.
  double log_gamma(double shape);
  /// Beta(a, b) with the extended conventions Beta(inf, b) = 1,
  /// Beta(a, inf) = 0, Beta(inf, inf) = 1/2.
  double beta(double a, double b);

  std::mt19937_64& engine() noexcept { return engine_; }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_id_;
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_;
};

}  // namespace histolim
