#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <utility>

#include "wcprox/core.hpp"

namespace wcprox {

struct MoreauOptions {
  double tol = 1e-12;                     // certified gap, upper - lower
  std::int64_t max_iterations = 1000000;  // oracle calls
  /// Effective tolerance is max(tol, relative_floor * max(1, |f(x)|)).
  double relative_floor = 0.0;
  /// Cuts kept in the model; 2 is the aggregate-plus-newest essential model.
  std::int64_t bundle_size = 64;
  /// Optional early exit, checked on the current bounds after every evaluation.
  std::function<bool(const struct MoreauResult&)> stop_when;
};

/// Reference value of the Moreau envelope f_r(x) = min_y f(y) + (r/2)||y - x||^2.
struct MoreauResult {
  Vector prox_point;          // best evaluated point, within sqrt(2 gap / (r - m)) of the exact one
  double envelope_value = 0.0;  // upper bound: objective at prox_point
  Vector gradient;            // r (x - prox_point)
  double certified_gap = 0.0;   // envelope_value - lower_bound
  double lower_bound = 0.0;
  double f_at_prox = 0.0;
  double f_at_center = 0.0;
  std::int64_t evaluations = 0;

  /// Bound on ||prox_point - exact prox point||.
  double point_error(double rho_env, double m) const;
  /// Bound on the error of `gradient`.
  double gradient_error(double rho_env, double m) const;
};

class ReferenceBudgetExhausted : public std::runtime_error {
 public:
  ReferenceBudgetExhausted(const std::string& what, MoreauResult best)
      : std::runtime_error(what), best_(std::move(best)) {}
  const MoreauResult& best() const { return best_; }

 private:
  MoreauResult best_;
};

/// Solves the (rho_env - m)-strongly convex prox subproblem with a bundle
/// loop around the fixed center x (no descent test). The model keeps up to
/// bundle_size cuts and is compressed by aggregation.
///
/// Lower bounds: the dual values of the model subproblem, and phi(y) - ||dphi(y)||^2 / (2 (rho_env - m))
/// at each evaluated y. Upper bound: the best evaluated objective. Stops once
/// the two are within `tol`. Throws std::invalid_argument if rho_env <= m or
/// tol <= 0, ReferenceBudgetExhausted if the budget runs out first.
MoreauResult moreau_reference(const FirstOrderOracle& oracle, const Vector& x, double rho_env,
                              const MoreauOptions& options = {});

struct StationarityCertificate {
  double eta = 0.0;
  double eps = 0.0;
  std::optional<double> moreau_delta;
  double alpha = 0.0;
};

/// (eta, eps)-inexact stationarity => ||grad f_{m+lambda}(x)|| <= returned value.
double is_to_ms_bound(double eta, double eps, double m, double lambda);

/// (delta, alpha)-Moreau stationarity of an L-Lipschitz f => (eta, eps).
std::pair<double, double> ms_to_is_bound(double delta, double alpha, double m, double lipschitz);

/// (eta, eps)-inexact stationarity of an M-smooth f => ||grad f(x)|| <= returned value.
double is_to_grad_bound(double eta, double eps, double m, double alpha, double smoothness);

/// Certificate implied by a proximal gap delta_k = f(x_k) - f_alpha(x_k), alpha = m + rho.
StationarityCertificate prox_gap_certificate(double delta_k, double rho, double m);

/// Upper estimate of f_alpha(w) under quadratic growth, with
/// Lambda = f(w) - f* - (m/2) dist^2 and d = dist(w, argmin f).
double qg_moreau_upper_bound(double f_w, double lambda, double dist_w_to_s, double rho);

}  // namespace wcprox
