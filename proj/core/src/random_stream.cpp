#include "histolim/random_stream.hpp"

#include <cmath>
#include <limits>

#include "histolim/error.hpp"

namespace histolim {
namespace {

std::mt19937_64 seeded_engine(std::uint64_t seed, std::uint64_t stream_id) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream_id), static_cast<std::uint32_t>(stream_id >> 32),
                    0x68697374u};
  return std::mt19937_64(seq);
}

}  // namespace

RandomStream::RandomStream(std::uint64_t seed, std::uint64_t stream_id)
    : seed_(seed), stream_id_(stream_id), engine_(seeded_engine(seed, stream_id)) {}

double RandomStream::uniform() {
  // 53 random bits, shifted off zero.
  for (;;) {
    const double u = static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    if (u > 0.0) return u;
  }
}

double RandomStream::normal() { return normal_(engine_); }

// Marsaglia-Tsang for shape >= 1; smaller shapes use G(a) = G(a+1) U^(1/a),
// kept in log space so tiny shapes do not underflow to zero.
double RandomStream::log_gamma(double shape) {
  if (!(shape >= 0.0) || !std::isfinite(shape)) throw ValidationError("gamma shape must be finite and >= 0");
  if (shape == 0.0) return -std::numeric_limits<double>::infinity();
  double boost = 0.0;
  double a = shape;
  if (a < 1.0) {
    boost = std::log(uniform()) / a;
    a += 1.0;
  }
  const double d = a - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x = 0.0;
    double v = 0.0;
    do {
      x = normal();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = uniform();
    if (u < 1.0 - 0.0331 * x * x * x * x || std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) {
      return std::log(d * v) + boost;
    }
  }
}

double RandomStream::gamma(double shape) {
  if (shape == 0.0) return 0.0;
  return std::exp(log_gamma(shape));
}

double RandomStream::beta(double a, double b) {
  const bool a_inf = std::isinf(a);
  const bool b_inf = std::isinf(b);
  if (a_inf && b_inf) return 0.5;
  if (a_inf) return 1.0;
  if (b_inf) return 0.0;
  if (!(a > 0.0) || !(b > 0.0)) throw ValidationError("beta parameters must be positive");
  const double la = log_gamma(a);
  const double lb = log_gamma(b);
  // a-mass / (a-mass + b-mass) = 1 / (1 + exp(lb - la))
  return 1.0 / (1.0 + std::exp(lb - la));
}

}  // namespace histolim
