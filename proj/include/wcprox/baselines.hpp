#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "wcprox/core.hpp"
#include "wcprox/stationarity.hpp"

namespace wcprox {

/// Step sizes for the subgradient method and the PGSG inner loop.
class StepSchedule {
 public:
  enum class Kind { constant, horizon_constant, pgsg };

  static StepSchedule constant(double value);
  /// sqrt(delta / (m L^2 (T + 1))) for every step.
  static StepSchedule horizon_constant(double delta, double m, double lipschitz, std::int64_t horizon);
  /// 2 / (mu (j + 2 + 36 / (gamma^4 mu^4 (j + 1)))), j = 0, 1, ...
  static StepSchedule pgsg(double mu, double gamma);

  double step(std::int64_t j) const;
  Kind kind() const { return kind_; }

 private:
  StepSchedule(Kind kind, double a, double b) : kind_(kind), a_(a), b_(b) {}
  Kind kind_;
  double a_;
  double b_;
};

enum class BaselineTermination { completed, inner_budget_exhausted, evaluation_budget, diverged };

std::string to_string(BaselineTermination t);

struct BaselineRecord {
  std::int64_t k = 0;                 // 1-based
  double f_value = 0.0;               // f(x_k)
  double step_norm_sq = 0.0;          // ||x_{k+1} - x_k||^2, NaN on the last row
  double stationarity_proxy = 0.0;    // proxy_scale ||x_{k+1} - x_k||^2
  std::int64_t inner_count = 0;       // oracle calls spent producing x_{k+1}
  std::int64_t cumulative_evaluations = 0;
  double prox_point_error = 0.0;      // PPM: certified ||x_{k+1} - exact prox point||
  std::vector<double> inner_objective;  // PGSG, on request
  Vector point;                       // x_k
};

struct BaselineReport {
  std::string algorithm;
  std::vector<BaselineRecord> iterates;
  std::int64_t total_evaluations = 0;
  double proxy_scale = 0.0;
  BaselineTermination termination = BaselineTermination::completed;
  std::string diagnostic;

  double min_stationarity_proxy() const;
};

/// x_{k+1} = x_k - alpha_k g_k for k = 1..T. Rows cover x_1..x_{T+1}; the
/// last row costs one extra evaluation for f(x_{T+1}). The proxy is
/// proxy_scale ||x_{k+1} - x_k||^2.
BaselineReport subgradient_method(const FirstOrderOracle& oracle, const Vector& x1,
                                  const StepSchedule& schedule, std::int64_t T,
                                  double proxy_scale = 1.0);

struct PpmOptions {
  double inner_tol = 1e-10;          // target ||x_{k+1} - exact prox point||
  /// Floor on the certified gap, relative to max(1, |f(x_k)|); gaps much
  /// below double precision are not certifiable.
  double gap_floor = 1e-14;
  std::int64_t max_inner = 1000000;
  /// Total oracle calls over the run, 0 for no limit. A step that would
  /// exceed it is dropped and the run ends with evaluation_budget.
  std::int64_t max_evaluations = 0;
};

/// x_{k+1} = argmin f(y) + (alpha/2)||y - x_k||^2, solved by moreau_reference.
/// Rows cover x_1..x_{T+1}; proxy is alpha^2 ||x_{k+1} - x_k||^2.
BaselineReport ppm(const FirstOrderOracle& oracle, const Vector& x1, double alpha, std::int64_t T,
                   const PpmOptions& options = {});

struct PgsgOptions {
  /// Use x + alpha v as printed instead of the descent update x - alpha v.
  bool paper_sign = false;
  bool record_inner = false;
};

/// T rounds of J subgradient steps on f(.) + (rho/2)||. - x_k||^2 with the
/// pgsg(rho, 1/(rho + m)) schedule restarted each round. Row k reports
/// f(x_k) (the first inner evaluation of round k), so the total is exactly T J.
BaselineReport pgsg(const FirstOrderOracle& oracle, const Vector& x1, double rho, std::int64_t T,
                    std::int64_t J, const PgsgOptions& options = {});

}  // namespace wcprox
