#include "wcprox/core.hpp"

#include <cmath>
#include <numbers>
#include <utility>

namespace wcprox {

void require_finite(const Vector& x, const char* what) {
  if (!x.allFinite()) {
    throw std::invalid_argument(std::string(what) + " has non-finite coordinates");
  }
}

FirstOrderOracle::FirstOrderOracle(Index dimension, OracleConstants constants, Function fn,
                                   std::string name)
    : dimension_(dimension), constants_(constants), fn_(std::move(fn)), name_(std::move(name)) {
  if (dimension_ < 1) throw std::invalid_argument("oracle dimension must be >= 1");
  if (!(constants_.weak_convexity >= 0.0) || !std::isfinite(constants_.weak_convexity)) {
    throw std::invalid_argument("weak convexity modulus must be finite and >= 0");
  }
  if (!fn_) throw std::invalid_argument("oracle function is empty");
}

Evaluation FirstOrderOracle::evaluate(const Vector& x) const {
  if (x.size() != dimension_) {
    throw std::invalid_argument("dimension mismatch: oracle " + name_ + " expects " +
                                std::to_string(dimension_) + ", got " +
                                std::to_string(x.size()));
  }
  require_finite(x, "query point");
  Evaluation e = fn_(x);
  if (e.subgradient.size() != dimension_) {
    throw std::runtime_error("oracle " + name_ + " returned a subgradient of wrong dimension");
  }
  if (!std::isfinite(e.value) || !e.subgradient.allFinite()) {
    throw std::runtime_error("oracle " + name_ + " returned a non-finite evaluation");
  }
  return e;
}

FirstOrderOracle convexify(const FirstOrderOracle& oracle, const Vector& center) {
  if (center.size() != oracle.dimension()) {
    throw std::invalid_argument("convexify: center dimension mismatch");
  }
  require_finite(center, "convexify center");
  const double m = oracle.weak_convexity();
  OracleConstants c = oracle.constants();
  c.weak_convexity = 0.0;
  c.lipschitz.reset();
  if (c.smoothness) c.smoothness = *c.smoothness + m;
  c.optimal_value.reset();
  return FirstOrderOracle(
      oracle.dimension(), c,
      [oracle, center, m](const Vector& y) {
        Evaluation e = oracle.evaluate(y);
        const Vector diff = y - center;
        e.value += 0.5 * m * diff.squaredNorm();
        e.subgradient += m * diff;
        return e;
      },
      oracle.name() + "+convexified");
}

RngStream::RngStream(std::uint64_t seed) : seed_(seed), engine_(seed) {}

double RngStream::uniform() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double RngStream::uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

double RngStream::standard_normal() {
  if (cached_normal_) {
    const double z = *cached_normal_;
    cached_normal_.reset();
    return z;
  }
  // 1 - u lies in (0, 1], so the log is finite.
  const double u1 = 1.0 - uniform();
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  cached_normal_ = r * std::sin(angle);
  return r * std::cos(angle);
}

RngStream RngStream::derive(std::uint64_t master_seed, std::uint64_t index) {
  // splitmix64 finalizer over (seed, index)
  std::uint64_t z = master_seed + 0x9E3779B97F4A7C15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return RngStream(z ^ (z >> 31));
}

Vector standard_normal_vector(RngStream& rng, Index n) {
  if (n < 1) throw std::invalid_argument("standard_normal_vector: n must be >= 1");
  Vector v(n);
  for (Index i = 0; i < n; ++i) v[i] = rng.standard_normal();
  return v;
}

Vector uniform_box_vector(RngStream& rng, Index n, double lo, double hi) {
  if (n < 1) throw std::invalid_argument("uniform_box_vector: n must be >= 1");
  Vector v(n);
  for (Index i = 0; i < n; ++i) v[i] = rng.uniform(lo, hi);
  return v;
}

}  // namespace wcprox
