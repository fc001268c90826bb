#pragma once

#include <algorithm>

#include "wcprox/core.hpp"

namespace wcprox {

/// Affine piece l(y) = anchor_value + <slope, y - anchor>.
struct Cut {
  Vector anchor;
  double anchor_value = 0.0;
  Vector slope;

  double value_at(const Vector& y) const { return anchor_value + slope.dot(y - anchor); }
};

/// Two-cut model max(aggregate, newest) of f(.) + (m/2)||. - center||^2,
/// regularized by (rho/2)||. - center||^2 in the proximal subproblem.
struct EssentialModel {
  Vector center;
  double rho = 1.0;
  double m = 0.0;
  Cut aggregate_cut;
  Cut newest_cut;

  double value_at(const Vector& y) const {
    return std::max(aggregate_cut.value_at(y), newest_cut.value_at(y));
  }
};

struct ProxStepOutcome {
  Vector minimizer;             // y*
  double theta = 0.0;           // weight on the newest cut, in [0, 1]
  double model_value_at_min = 0.0;  // model(y*) + (rho/2)||y* - center||^2
  Vector aggregate_slope;       // rho (center - y*)
};

/// f(center) + <g, . - center> with g from the oracle at the center.
Cut initial_cut(const FirstOrderOracle& oracle, const Vector& center);
/// Same, from an evaluation already taken at the center.
Cut initial_cut(const Evaluation& at_center, const Vector& center);

/// Linearization of the convexified function at z:
/// f(z) + (m/2)||z - center||^2 + <v + m(z - center), . - z>.
Cut subgradient_cut(const FirstOrderOracle& oracle, const Vector& z, const Vector& center);
Cut subgradient_cut(const Evaluation& at_z, double m, const Vector& z, const Vector& center);

/// Aggregation cut anchored at the previous prox minimizer z, slope rho(center - z).
Cut aggregate_cut_from_step(double model_value_at_z, const Vector& z, const Vector& center,
                            double rho);

/// Model whose two slots both hold `cut` (first step of an inner loop).
EssentialModel initial_model(const Vector& center, double rho, double m, const Cut& cut);

/// Exact minimizer of model(y) + (rho/2)||y - center||^2.
///
/// With both cuts anchored at the same point z the dual over the convex
/// weight theta is a concave quadratic; its clamped stationary point is
///   theta* = clamp((rho (a2 - a1) - <s, g - s>) / ||g - s||^2, 0, 1),
/// where a_i are the cut values at the center and s, g the two slopes. In
/// canonical form (s = rho(center - z)) this is min{1, rho gap / ||s - g||^2}.
/// Throws std::invalid_argument for rho <= 0 or cuts anchored apart.
ProxStepOutcome prox_step(const EssentialModel& model);

/// Replaces the aggregate cut by the aggregation of `model` at the step's
/// minimizer and the newest cut by `new_cut` (which must be anchored there).
EssentialModel model_update(const EssentialModel& model, const ProxStepOutcome& step,
                            const Cut& new_cut);

}  // namespace wcprox
