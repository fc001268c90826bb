#pragma once
// Independent reference computations shared by the unit and acceptance tests.

#include <cmath>
#include <algorithm>
#include <functional>

#include "wcprox/bundle.hpp"
#include "wcprox/core.hpp"

namespace wcprox::testing {

// Maximizes a concave function on [lo, hi].
inline double golden_max(const std::function<double(double)>& F, double lo, double hi,
                         int iterations = 200) {
  const double r = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo, b = hi;
  double c = b - r * (b - a), d = a + r * (b - a);
  double fc = F(c), fd = F(d);
  for (int i = 0; i < iterations && b - a > 1e-15; ++i) {
    if (fc < fd) {
      a = c;
      c = d;
      fc = fd;
      d = a + r * (b - a);
      fd = F(d);
    } else {
      b = d;
      d = c;
      fd = fc;
      c = b - r * (b - a);
      fc = F(c);
    }
  }
  // endpoints matter when the maximizer is clamped
  double best = 0.5 * (a + b), fbest = F(best);
  for (double t : {lo, hi}) {
    const double ft = F(t);
    if (ft > fbest) {
      best = t;
      fbest = ft;
    }
  }
  return best;
}

struct DualSolution {
  double theta;
  Vector minimizer;
  double value;
};

// Two cuts anchored at a common z: the dual in the convex weight theta is
// F(theta) = a(theta) + <v(theta), center - z> - ||v(theta)||^2 / (2 rho).
inline DualSolution dual_by_search(const EssentialModel& model) {
  const Cut& c1 = model.aggregate_cut;
  const Cut& c2 = model.newest_cut;
  const Vector w = model.center - c1.anchor;
  auto v = [&](double t) -> Vector { return (1.0 - t) * c1.slope + t * c2.slope; };
  auto F = [&](double t) {
    const Vector vt = v(t);
    return (1.0 - t) * c1.anchor_value + t * c2.anchor_value + vt.dot(w) -
           vt.squaredNorm() / (2.0 * model.rho);
  };
  const double t = golden_max(F, 0.0, 1.0);
  return {t, model.center - v(t) / model.rho, F(t)};
}

// Largest violation of f(y) + (m/2)|y - x|^2 >= f(x) + <g, y - x> - eps over sampled pairs.
inline double sampled_minorant_gap(const FirstOrderOracle& f, const Vector& x, const Vector& g,
                                   double eps, RngStream& rng, int samples, double lo, double hi) {
  const double m = f.weak_convexity();
  const double fx = f.evaluate(x).value;
  double worst = -INFINITY;
  for (int i = 0; i < samples; ++i) {
    const Vector y = uniform_box_vector(rng, f.dimension(), lo, hi);
    const double lhs = f.evaluate(y).value + 0.5 * m * (y - x).squaredNorm();
    const double rhs = fx + g.dot(y - x) - eps;
    worst = std::max(worst, (rhs - lhs) / std::max(1.0, std::abs(lhs)));
  }
  return worst;
}

// Largest relative violation of f(y) + (m/2)|y - x|^2 >= f(x) + <g(x), y - x> over random pairs.
inline double sampled_pair_violation(const FirstOrderOracle& f, double m, RngStream& rng, int pairs,
                                     double lo, double hi) {
  double worst = -INFINITY;
  for (int i = 0; i < pairs; ++i) {
    const Vector x = uniform_box_vector(rng, f.dimension(), lo, hi);
    const Vector y = uniform_box_vector(rng, f.dimension(), lo, hi);
    const Evaluation ex = f.evaluate(x);
    const double lhs = f.evaluate(y).value + 0.5 * m * (y - x).squaredNorm();
    const double rhs = ex.value + ex.subgradient.dot(y - x);
    worst = std::max(worst, (rhs - lhs) / std::max({1.0, std::abs(lhs), std::abs(rhs)}));
  }
  return worst;
}

}  // namespace wcprox::testing
