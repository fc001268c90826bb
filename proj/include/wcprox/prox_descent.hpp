#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "wcprox/bundle.hpp"
#include "wcprox/core.hpp"

namespace wcprox {

struct ProxDescentConfig {
  double beta = 0.5;              // relaxation in the descent test, in (0, 1)
  double rho = 1.0;               // proximal parameter; alpha = m + rho
  double eta_target = 1e-6;       // ||gtilde|| target
  double eps_target = 1e-6;       // inexactness target
  std::int64_t max_outer = 1000;
  std::int64_t max_inner_per_step = 100000;
  double descent_test_slack = 1e-12;
  /// Total oracle calls allowed over a run, 0 for no limit.
  std::int64_t max_evaluations = 0;
  /// Relative tolerance before a negative approximation gap is treated as
  /// a weak-convexity violation.
  double minorant_tolerance = 1e-9;

  /// Throws std::invalid_argument when a field is out of range.
  void validate() const;
};

/// One null or descent trial inside an inner loop.
struct InnerRecord {
  double eta = 0.0;          // optimal value of the model subproblem
  double gap = 0.0;          // f(z) + (m/2)||z - x_k||^2 - model(z)
  double aggregate_slope_norm = 0.0;
  double cut_slope_norm = 0.0;  // ||g_j|| of the cut the step was taken from
  double theta = 0.0;
  double slope_difference_sq = 0.0;  // ||g_j - s_j||^2 of the two cuts after the update
};

struct DescentStepResult {
  Vector trial;              // z_{k+1}
  Vector gtilde;             // alpha (x_k - z_{k+1})
  double inexactness = 0.0;  // epsilon_{k+1}
  double raw_gap = 0.0;      // same before clamping tiny round-off negatives
  double f_center = 0.0;
  double f_trial = 0.0;
  Evaluation trial_evaluation;
  std::int64_t inner_iterations = 0;  // T_k, number of trial points evaluated
  std::int64_t evaluations = 0;       // oracle calls made by this step
  double max_cut_slope_norm = 0.0;    // G_k over the cuts that were built
  std::vector<InnerRecord> inner_trace;
};

/// The inner loop hit max_inner_per_step (or the evaluation budget) before
/// the descent test passed. Carries the partial trace.
class InnerBudgetExhausted : public std::runtime_error {
 public:
  InnerBudgetExhausted(const std::string& what, DescentStepResult partial, bool evaluation_budget)
      : std::runtime_error(what), partial_(std::move(partial)), evaluation_budget_(evaluation_budget) {}
  const DescentStepResult& partial() const { return partial_; }
  bool evaluation_budget() const { return evaluation_budget_; }

 private:
  DescentStepResult partial_;
  bool evaluation_budget_;
};

/// A cut failed to minorize the convexified function by more than the
/// tolerance: the declared m is too small for this oracle.
class WeakConvexityViolation : public std::runtime_error {
 public:
  WeakConvexityViolation(const std::string& what, Vector center, Vector trial, double gap)
      : std::runtime_error(what), center_(std::move(center)), trial_(std::move(trial)), gap_(gap) {}
  const Vector& center() const { return center_; }
  const Vector& trial() const { return trial_; }
  double gap() const { return gap_; }

 private:
  Vector center_;
  Vector trial_;
  double gap_;
};

/// f(x_k) - (f(z) + (m/2)||z - x_k||^2) >= beta (f(x_k) - model(z)),
/// relaxed by slack * max(1, |f(x_k)|).
bool descent_test(double f_center, double f_trial_convexified, double model_value_at_trial,
                  double beta, double slack);

/// Null steps on the essential model until the descent test passes.
DescentStepResult prox_descent_step(const FirstOrderOracle& oracle, const Vector& center,
                                    const ProxDescentConfig& config);

/// Same, reusing an evaluation already taken at the center. The caller owns
/// the budget: at most `evaluation_allowance` new oracle calls (0 = unlimited).
DescentStepResult prox_descent_step(const FirstOrderOracle& oracle, const Vector& center,
                                    const Evaluation& at_center, const ProxDescentConfig& config,
                                    std::int64_t evaluation_allowance = 0);

enum class Termination { certified, max_outer, inner_budget_exhausted, evaluation_budget };

std::string to_string(Termination t);

struct OuterRecord {
  std::int64_t k = 0;            // 1-based; the record describes x_{k+1}
  double f_center = 0.0;         // f(x_k)
  double f_value = 0.0;          // f(x_{k+1})
  double gtilde_norm_sq = 0.0;
  double epsilon = 0.0;
  double raw_gap = 0.0;
  double step_norm_sq = 0.0;     // ||x_{k+1} - x_k||^2
  std::int64_t inner_iterations = 0;
  std::int64_t cumulative_evaluations = 0;
  double max_cut_slope_norm = 0.0;
  std::vector<InnerRecord> inner_trace;
  Vector point;                  // x_{k+1}
};

struct SolveReport {
  Vector initial_point;
  double f_initial = 0.0;
  double m = 0.0;
  double alpha = 0.0;
  ProxDescentConfig config;
  std::vector<OuterRecord> iterates;
  Termination termination = Termination::max_outer;
  std::optional<std::int64_t> certified_index;  // k of the jointly certified x_{k+1}
  std::int64_t total_evaluations = 0;
  double best_gtilde_norm_sq = 0.0;
  double best_epsilon = 0.0;
  std::optional<DescentStepResult> partial_step;  // set on budget termination
  std::string diagnostic;

  const Vector& final_point() const {
    return iterates.empty() ? initial_point : iterates.back().point;
  }
};

/// Proximal descent method: x_{k+1} = ProxDescent(x_k). Stops at the first
/// iterate with ||gtilde|| <= eta_target and epsilon <= eps_target, or when a
/// budget runs out. WeakConvexityViolation propagates.
SolveReport run(const FirstOrderOracle& oracle, const Vector& x1, const ProxDescentConfig& config);

/// Outer iteration bound for reaching an (eta, eps) certificate:
/// 2 alpha^2 D / ((m + beta rho) eta^2) + (1 - beta) D / (beta eps) + 1,
/// with D >= f(x1) - f*.
double outer_iteration_bound(double f_gap, double m, const ProxDescentConfig& config);

}  // namespace wcprox
