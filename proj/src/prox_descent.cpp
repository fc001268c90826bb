#include "wcprox/prox_descent.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace wcprox {

void ProxDescentConfig::validate() const {
  if (!(beta > 0.0 && beta < 1.0)) throw std::invalid_argument("beta must lie in (0, 1)");
  if (!(rho > 0.0) || !std::isfinite(rho)) throw std::invalid_argument("rho must be positive");
  if (!(eta_target >= 0.0)) throw std::invalid_argument("eta_target must be >= 0");
  if (!(eps_target >= 0.0)) throw std::invalid_argument("eps_target must be >= 0");
  if (max_outer < 1) throw std::invalid_argument("max_outer must be >= 1");
  if (max_inner_per_step < 1) throw std::invalid_argument("max_inner_per_step must be >= 1");
  if (!(descent_test_slack >= 0.0)) throw std::invalid_argument("descent_test_slack must be >= 0");
  if (max_evaluations < 0) throw std::invalid_argument("max_evaluations must be >= 0");
  if (!(minorant_tolerance >= 0.0)) throw std::invalid_argument("minorant_tolerance must be >= 0");
}

bool descent_test(double f_center, double f_trial_convexified, double model_value_at_trial,
                  double beta, double slack) {
  const double actual = f_center - f_trial_convexified;
  const double predicted = f_center - model_value_at_trial;
  return actual >= beta * predicted - slack * std::max(1.0, std::abs(f_center));
}

DescentStepResult prox_descent_step(const FirstOrderOracle& oracle, const Vector& center,
                                    const ProxDescentConfig& config) {
  config.validate();
  const Evaluation at_center = oracle.evaluate(center);
  DescentStepResult r = prox_descent_step(oracle, center, at_center, config);
  r.evaluations += 1;
  return r;
}

DescentStepResult prox_descent_step(const FirstOrderOracle& oracle, const Vector& center,
                                    const Evaluation& at_center, const ProxDescentConfig& config,
                                    std::int64_t evaluation_allowance) {
  const double m = oracle.weak_convexity();
  const double rho = config.rho;
  const double alpha = m + rho;
  const double f_center = at_center.value;

  DescentStepResult r;
  r.f_center = f_center;
  r.max_cut_slope_norm = at_center.subgradient.norm();

  EssentialModel model = initial_model(center, rho, m, initial_cut(at_center, center));
  for (std::int64_t j = 1;; ++j) {
    if (j > config.max_inner_per_step) {
      throw InnerBudgetExhausted("inner loop exhausted " + std::to_string(config.max_inner_per_step) +
                                     " trials without passing the descent test",
                                 std::move(r), false);
    }
    if (evaluation_allowance > 0 && r.evaluations >= evaluation_allowance) {
      throw InnerBudgetExhausted("evaluation budget exhausted inside the inner loop", std::move(r),
                                 true);
    }
    const ProxStepOutcome step = prox_step(model);
    const Vector& z = step.minimizer;
    const double model_at_z = model.value_at(z);

    Evaluation at_z = oracle.evaluate(z);
    ++r.evaluations;
    const Cut cut = subgradient_cut(at_z, m, z, center);
    const double f_conv = cut.anchor_value;
    const double gap = f_conv - model_at_z;
    const double gap_tol = config.minorant_tolerance * std::max(1.0, std::abs(f_conv));
    if (gap < -gap_tol) {
      std::ostringstream msg;
      msg.precision(17);
      msg << "model exceeds f + (m/2)||. - x_k||^2 by " << -gap << " at trial point (center "
          << center.transpose() << ", trial " << z.transpose()
          << "); the declared weak convexity m = " << m << " is too small";
      throw WeakConvexityViolation(msg.str(), center, z, gap);
    }

    InnerRecord rec;
    rec.eta = step.model_value_at_min;
    rec.gap = gap;
    rec.aggregate_slope_norm = step.aggregate_slope.norm();
    rec.cut_slope_norm = cut.slope.norm();
    rec.theta = step.theta;
    rec.slope_difference_sq = (cut.slope - step.aggregate_slope).squaredNorm();
    r.inner_trace.push_back(rec);
    r.inner_iterations = j;

    if (descent_test(f_center, f_conv, model_at_z, config.beta, config.descent_test_slack)) {
      r.trial = z;
      r.gtilde = alpha * (center - z);
      r.raw_gap = gap;
      r.inexactness = std::max(gap, 0.0);
      r.f_trial = at_z.value;
      r.trial_evaluation = std::move(at_z);
      return r;
    }
    r.max_cut_slope_norm = std::max(r.max_cut_slope_norm, rec.cut_slope_norm);
    model = model_update(model, step, cut);
  }
}

std::string to_string(Termination t) {
  switch (t) {
    case Termination::certified:
      return "certified";
    case Termination::max_outer:
      return "max_outer";
    case Termination::inner_budget_exhausted:
      return "inner_budget_exhausted";
    case Termination::evaluation_budget:
      return "evaluation_budget";
  }
  return "unknown";
}

SolveReport run(const FirstOrderOracle& oracle, const Vector& x1, const ProxDescentConfig& config) {
  config.validate();
  if (x1.size() != oracle.dimension()) throw std::invalid_argument("run: x1 dimension mismatch");
  require_finite(x1, "x1");

  SolveReport report;
  report.initial_point = x1;
  report.m = oracle.weak_convexity();
  report.alpha = report.m + config.rho;
  report.config = config;
  report.best_gtilde_norm_sq = std::numeric_limits<double>::infinity();
  report.best_epsilon = std::numeric_limits<double>::infinity();

  Evaluation at_center = oracle.evaluate(x1);
  report.f_initial = at_center.value;
  report.total_evaluations = 1;
  Vector center = x1;

  for (std::int64_t k = 1; k <= config.max_outer; ++k) {
    std::int64_t allowance = 0;
    if (config.max_evaluations > 0) {
      allowance = config.max_evaluations - report.total_evaluations;
      if (allowance <= 0) {
        report.termination = Termination::evaluation_budget;
        return report;
      }
    }
    DescentStepResult step;
    try {
      step = prox_descent_step(oracle, center, at_center, config, allowance);
    } catch (const InnerBudgetExhausted& e) {
      report.total_evaluations += e.partial().evaluations;
      report.termination = e.evaluation_budget() ? Termination::evaluation_budget
                                                 : Termination::inner_budget_exhausted;
      report.partial_step = e.partial();
      report.diagnostic = e.what();
      return report;
    }
    report.total_evaluations += step.evaluations;

    OuterRecord rec;
    rec.k = k;
    rec.f_center = step.f_center;
    rec.f_value = step.f_trial;
    rec.gtilde_norm_sq = step.gtilde.squaredNorm();
    rec.epsilon = step.inexactness;
    rec.raw_gap = step.raw_gap;
    rec.step_norm_sq = (step.trial - center).squaredNorm();
    rec.inner_iterations = step.inner_iterations;
    rec.cumulative_evaluations = report.total_evaluations;
    rec.max_cut_slope_norm = step.max_cut_slope_norm;
    rec.inner_trace = std::move(step.inner_trace);
    rec.point = step.trial;
    report.best_gtilde_norm_sq = std::min(report.best_gtilde_norm_sq, rec.gtilde_norm_sq);
    report.best_epsilon = std::min(report.best_epsilon, rec.epsilon);
    const bool certified = std::sqrt(rec.gtilde_norm_sq) <= config.eta_target &&
                           rec.epsilon <= config.eps_target;
    report.iterates.push_back(std::move(rec));

    center = std::move(step.trial);
    at_center = std::move(step.trial_evaluation);
    if (certified) {
      report.termination = Termination::certified;
      report.certified_index = k;
      return report;
    }
  }
  report.termination = Termination::max_outer;
  return report;
}

double outer_iteration_bound(double f_gap, double m, const ProxDescentConfig& config) {
  const double alpha = m + config.rho;
  const double beta = config.beta;
  return 2.0 * alpha * alpha * f_gap / ((m + beta * config.rho) * config.eta_target * config.eta_target) +
         (1.0 - beta) * f_gap / (beta * config.eps_target) + 1.0;
}

}  // namespace wcprox
