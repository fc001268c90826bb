#include "wcprox/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace wcprox {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

BaselineRecord make_row(std::int64_t k, double f, const Vector& x) {
  BaselineRecord r;
  r.k = k;
  r.f_value = f;
  r.point = x;
  return r;
}

void close_row(BaselineRecord& row, const Vector& next, double scale) {
  row.step_norm_sq = (next - row.point).squaredNorm();
  row.stationarity_proxy = scale * row.step_norm_sq;
}

void mark_last(BaselineRecord& row) {
  row.step_norm_sq = kNaN;
  row.stationarity_proxy = kNaN;
}

}  // namespace

StepSchedule StepSchedule::constant(double value) {
  if (!(value > 0.0) || !std::isfinite(value)) throw std::invalid_argument("constant step must be positive");
  return StepSchedule(Kind::constant, value, 0.0);
}

StepSchedule StepSchedule::horizon_constant(double delta, double m, double lipschitz,
                                            std::int64_t horizon) {
  if (!(delta > 0.0) || !(m > 0.0) || !(lipschitz > 0.0) || horizon < 1) {
    throw std::invalid_argument("horizon_constant step needs delta, m, L > 0 and T >= 1");
  }
  const double a = std::sqrt(delta / (m * lipschitz * lipschitz * static_cast<double>(horizon + 1)));
  return StepSchedule(Kind::horizon_constant, a, 0.0);
}

StepSchedule StepSchedule::pgsg(double mu, double gamma) {
  if (!(mu > 0.0) || !(gamma > 0.0)) throw std::invalid_argument("pgsg step needs mu, gamma > 0");
  return StepSchedule(Kind::pgsg, mu, gamma);
}

double StepSchedule::step(std::int64_t j) const {
  if (j < 0) throw std::invalid_argument("step index must be >= 0");
  if (kind_ != Kind::pgsg) return a_;
  const double mu = a_, gamma = b_;
  const double jd = static_cast<double>(j);
  const double g4mu4 = std::pow(gamma * mu, 4.0);
  return 2.0 / (mu * (jd + 2.0 + 36.0 / (g4mu4 * (jd + 1.0))));
}

std::string to_string(BaselineTermination t) {
  switch (t) {
    case BaselineTermination::completed:
      return "completed";
    case BaselineTermination::inner_budget_exhausted:
      return "inner_budget_exhausted";
    case BaselineTermination::evaluation_budget:
      return "evaluation_budget";
    case BaselineTermination::diverged:
      return "diverged";
  }
  return "unknown";
}

double BaselineReport::min_stationarity_proxy() const {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& r : iterates)
    if (!std::isnan(r.stationarity_proxy)) best = std::min(best, r.stationarity_proxy);
  return best;
}

BaselineReport subgradient_method(const FirstOrderOracle& oracle, const Vector& x1,
                                  const StepSchedule& schedule, std::int64_t T, double proxy_scale) {
  if (T < 1) throw std::invalid_argument("subgradient_method: T must be >= 1");
  if (x1.size() != oracle.dimension()) throw std::invalid_argument("subgradient_method: x1 dimension mismatch");
  BaselineReport rep;
  rep.algorithm = "subgradient";
  rep.proxy_scale = proxy_scale;
  Vector x = x1;
  for (std::int64_t k = 1; k <= T + 1; ++k) {
    Evaluation e;
    try {
      e = oracle.evaluate(x);
    } catch (const std::invalid_argument& err) {
      rep.termination = BaselineTermination::diverged;
      rep.diagnostic = err.what();
      if (!rep.iterates.empty()) mark_last(rep.iterates.back());
      return rep;
    }
    ++rep.total_evaluations;
    BaselineRecord row = make_row(k, e.value, x);
    row.inner_count = 1;
    row.cumulative_evaluations = rep.total_evaluations;
    if (k == T + 1) {
      mark_last(row);
      rep.iterates.push_back(std::move(row));
      break;
    }
    Vector next = x - schedule.step(k - 1) * e.subgradient;
    close_row(row, next, proxy_scale);
    rep.iterates.push_back(std::move(row));
    x = std::move(next);
  }
  return rep;
}

BaselineReport ppm(const FirstOrderOracle& oracle, const Vector& x1, double alpha, std::int64_t T,
                   const PpmOptions& options) {
  const double m = oracle.weak_convexity();
  if (!(alpha > m)) throw std::invalid_argument("ppm: alpha must exceed the weak convexity m");
  if (T < 1) throw std::invalid_argument("ppm: T must be >= 1");
  if (!(options.inner_tol > 0.0)) throw std::invalid_argument("ppm: inner_tol must be positive");
  if (x1.size() != oracle.dimension()) throw std::invalid_argument("ppm: x1 dimension mismatch");

  BaselineReport rep;
  rep.algorithm = "ppm";
  rep.proxy_scale = alpha * alpha;
  Vector x = x1;
  double f_x = 0.0;
  MoreauOptions mo;
  mo.max_iterations = options.max_inner;
  mo.tol = 0.5 * (alpha - m) * options.inner_tol * options.inner_tol;
  mo.relative_floor = options.gap_floor;
  std::int64_t done = 0;
  for (std::int64_t k = 1; k <= T; ++k) {
    bool budget_bound = false;
    if (options.max_evaluations > 0) {
      const std::int64_t remaining = options.max_evaluations - rep.total_evaluations;
      if (remaining < 1) {
        rep.termination = BaselineTermination::evaluation_budget;
        break;
      }
      budget_bound = remaining < options.max_inner;
      mo.max_iterations = std::min(options.max_inner, remaining);
    }
    MoreauResult res;
    try {
      res = moreau_reference(oracle, x, alpha, mo);
    } catch (const ReferenceBudgetExhausted& e) {
      rep.total_evaluations += e.best().evaluations;
      if (done == 0) f_x = e.best().f_at_center;
      rep.termination = budget_bound ? BaselineTermination::evaluation_budget
                                     : BaselineTermination::inner_budget_exhausted;
      rep.diagnostic = "ppm step " + std::to_string(k) + ": " + e.what();
      break;
    }
    ++done;
    rep.total_evaluations += res.evaluations;
    BaselineRecord row = make_row(k, res.f_at_center, x);
    row.inner_count = res.evaluations;
    row.cumulative_evaluations = rep.total_evaluations;
    row.prox_point_error = res.point_error(alpha, m);
    close_row(row, res.prox_point, rep.proxy_scale);
    rep.iterates.push_back(std::move(row));
    x = res.prox_point;
    f_x = res.f_at_prox;
  }
  if (rep.total_evaluations == 0) return rep;
  BaselineRecord last = make_row(done + 1, f_x, x);
  last.cumulative_evaluations = rep.total_evaluations;
  mark_last(last);
  rep.iterates.push_back(std::move(last));
  return rep;
}

BaselineReport pgsg(const FirstOrderOracle& oracle, const Vector& x1, double rho, std::int64_t T,
                    std::int64_t J, const PgsgOptions& options) {
  if (!(rho > 0.0)) throw std::invalid_argument("pgsg: rho must be positive");
  if (T < 1 || J < 1) throw std::invalid_argument("pgsg: T and J must be >= 1");
  if (x1.size() != oracle.dimension()) throw std::invalid_argument("pgsg: x1 dimension mismatch");
  const double m = oracle.weak_convexity();
  const StepSchedule schedule = StepSchedule::pgsg(rho, 1.0 / (rho + m));
  const double sign = options.paper_sign ? 1.0 : -1.0;

  BaselineReport rep;
  rep.algorithm = "pgsg";
  rep.proxy_scale = (rho + m) * (rho + m);
  Vector center = x1;
  for (std::int64_t k = 1; k <= T; ++k) {
    Vector y = center;
    BaselineRecord row;
    try {
      for (std::int64_t j = 0; j < J; ++j) {
        const Evaluation e = oracle.evaluate(y);
        ++rep.total_evaluations;
        const Vector d = y - center;
        if (j == 0) row = make_row(k, e.value, center);
        if (options.record_inner) row.inner_objective.push_back(e.value + 0.5 * rho * d.squaredNorm());
        const Vector v = e.subgradient + rho * d;
        y += sign * schedule.step(j) * v;
      }
    } catch (const std::invalid_argument& err) {
      rep.termination = BaselineTermination::diverged;
      rep.diagnostic = std::string("pgsg round ") + std::to_string(k) + ": " + err.what();
      return rep;
    }
    row.inner_count = J;
    row.cumulative_evaluations = rep.total_evaluations;
    close_row(row, y, rep.proxy_scale);
    rep.iterates.push_back(std::move(row));
    center = std::move(y);
  }
  return rep;
}

}  // namespace wcprox
