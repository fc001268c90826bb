#include "wcprox/bundle.hpp"

#include <algorithm>
#include <cmath>

namespace wcprox {

Cut initial_cut(const Evaluation& at_center, const Vector& center) {
  return Cut{center, at_center.value, at_center.subgradient};
}

Cut initial_cut(const FirstOrderOracle& oracle, const Vector& center) {
  return initial_cut(oracle.evaluate(center), center);
}

Cut subgradient_cut(const Evaluation& at_z, double m, const Vector& z, const Vector& center) {
  const Vector diff = z - center;
  return Cut{z, at_z.value + 0.5 * m * diff.squaredNorm(), at_z.subgradient + m * diff};
}

Cut subgradient_cut(const FirstOrderOracle& oracle, const Vector& z, const Vector& center) {
  if (z.size() != center.size()) throw std::invalid_argument("subgradient_cut: size mismatch");
  require_finite(center, "cut center");
  return subgradient_cut(oracle.evaluate(z), oracle.weak_convexity(), z, center);
}

Cut aggregate_cut_from_step(double model_value_at_z, const Vector& z, const Vector& center,
                            double rho) {
  return Cut{z, model_value_at_z, rho * (center - z)};
}

EssentialModel initial_model(const Vector& center, double rho, double m, const Cut& cut) {
  return EssentialModel{center, rho, m, cut, cut};
}

namespace {

bool same_anchor(const Vector& a, const Vector& b) {
  if (a.size() != b.size()) return false;
  const double scale = 1.0 + std::max(a.lpNorm<Eigen::Infinity>(), b.lpNorm<Eigen::Infinity>());
  return (a - b).lpNorm<Eigen::Infinity>() <= 1e-12 * scale;
}

}  // namespace

ProxStepOutcome prox_step(const EssentialModel& model) {
  if (!(model.rho > 0.0)) throw std::invalid_argument("prox_step: rho must be positive");
  const Cut& agg = model.aggregate_cut;
  const Cut& nw = model.newest_cut;
  if (!same_anchor(agg.anchor, nw.anchor)) {
    throw std::invalid_argument("prox_step: cuts are not anchored at the same point");
  }
  if (agg.slope.size() != model.center.size() || nw.slope.size() != model.center.size()) {
    throw std::invalid_argument("prox_step: slope dimension mismatch");
  }

  const double rho = model.rho;
  const Vector& s = agg.slope;
  const Vector& g = nw.slope;
  const Vector diff = g - s;
  const double denom = diff.squaredNorm();
  const double gap = nw.anchor_value - agg.anchor_value;

  double theta = 0.0;
  const double scale = std::max({1.0, s.squaredNorm(), g.squaredNorm()});
  if (denom <= 1e-14 * scale) {
    // parallel slopes: the max is one affine function, take the limit
    theta = gap > 0.0 ? 1.0 : 0.0;
  } else {
    const Vector canonical_defect = rho * (model.center - agg.anchor) - s;
    const double numer = rho * gap + diff.dot(canonical_defect);
    theta = std::clamp(numer / denom, 0.0, 1.0);
  }

  ProxStepOutcome out;
  const Vector v = s + theta * diff;
  out.minimizer = model.center - v / rho;
  out.theta = theta;
  out.model_value_at_min =
      model.value_at(out.minimizer) + 0.5 * rho * (out.minimizer - model.center).squaredNorm();
  out.aggregate_slope = rho * (model.center - out.minimizer);
  return out;
}

EssentialModel model_update(const EssentialModel& model, const ProxStepOutcome& step,
                            const Cut& new_cut) {
  if (!same_anchor(new_cut.anchor, step.minimizer)) {
    throw std::invalid_argument("model_update: new cut is not anchored at the step minimizer");
  }
  EssentialModel next = model;
  next.aggregate_cut = aggregate_cut_from_step(model.value_at(step.minimizer), step.minimizer,
                                               model.center, model.rho);
  next.aggregate_cut.anchor = new_cut.anchor;
  next.newest_cut = new_cut;
  return next;
}

}  // namespace wcprox
