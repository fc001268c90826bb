#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>

#include <Eigen/Core>

namespace wcprox {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;

/// f(x) together with one element of the (Frechet) subdifferential at x.
struct Evaluation {
  double value = 0.0;
  Vector subgradient;
};

/// Constants declared for a weakly convex function. Only `weak_convexity` is
/// used by the solvers; the rest feed bounds and diagnostics.
struct OracleConstants {
  double weak_convexity = 0.0;           // m: f + (m/2)||.||^2 is convex
  std::optional<double> lipschitz;       // L
  std::optional<double> smoothness;      // M
  std::optional<double> optimal_value;   // f*, test problems only
};

/// First-order access to an m-weakly convex function.
///
/// Every returned subgradient g at x must satisfy the concave quadratic
/// minorant f(y) >= f(x) + <g, y - x> - (m/2)||y - x||^2 for all y.
/// Evaluation is a pure function of x, so a single oracle may be shared
/// across threads.
class FirstOrderOracle {
 public:
  using Function = std::function<Evaluation(const Vector&)>;

  FirstOrderOracle(Index dimension, OracleConstants constants, Function fn,
                   std::string name = "oracle");

  /// Throws std::invalid_argument on a dimension mismatch or non-finite
  /// input, std::runtime_error if the wrapped function returns garbage.
  Evaluation evaluate(const Vector& x) const;

  Index dimension() const { return dimension_; }
  double weak_convexity() const { return constants_.weak_convexity; }
  const OracleConstants& constants() const { return constants_; }
  const std::string& name() const { return name_; }

 private:
  Index dimension_;
  OracleConstants constants_;
  Function fn_;
  std::string name_;
};

/// Wraps f into the convex function f(.) + (m/2)||. - center||^2.
/// The result declares weak_convexity = 0.
FirstOrderOracle convexify(const FirstOrderOracle& oracle, const Vector& center);

/// Throws std::invalid_argument unless every coordinate of x is finite.
void require_finite(const Vector& x, const char* what);

/// Seedable random stream with a platform-independent normal transform.
///
/// Uniforms take the top 53 bits of a mt19937_64 draw; normals use the
/// Box-Muller transform and cache the second variate. The sequence is a
/// function of the seed alone.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed);

  std::uint64_t seed() const { return seed_; }

  /// Uniform on [0, 1).
  double uniform();
  /// Uniform on [lo, hi).
  double uniform(double lo, double hi);
  double standard_normal();

  /// Independent stream for sub-task `index` (sweep cell, problem part).
  static RngStream derive(std::uint64_t master_seed, std::uint64_t index);

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
  std::optional<double> cached_normal_;
};

/// n independent standard normal draws.
Vector standard_normal_vector(RngStream& rng, Index n);

/// Uniform draw from the box [lo, hi]^n.
Vector uniform_box_vector(RngStream& rng, Index n, double lo, double hi);

}  // namespace wcprox
