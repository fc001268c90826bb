#include "wcprox/stationarity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/LU>

#include "wcprox/bundle.hpp"

namespace wcprox {

double MoreauResult::point_error(double rho_env, double m) const {
  return std::sqrt(2.0 * std::max(certified_gap, 0.0) / (rho_env - m));
}

double MoreauResult::gradient_error(double rho_env, double m) const {
  return rho_env * point_error(rho_env, m);
}

namespace {

// Cuts of the convexified function written around the center x:
// l_i(y) = b_i + <g_i, y - x>.
struct Bundle {
  std::vector<Vector> slopes;
  std::vector<double> values;
  std::vector<double> weights;  // dual iterate on the simplex
  Matrix gram;                  // <g_i, g_j> / mu

  std::size_t size() const { return values.size(); }
};

// max_lambda b.lambda - lambda' Q lambda / 2 over the simplex, by an active
// set method on the support (kept affinely independent, so at most d + 1
// cuts). The iterate stays feasible throughout, so every intermediate dual
// value is a valid lower bound.
void solve_dual(Bundle& B) {
  const auto k = static_cast<Index>(B.size());
  Vector lam = Eigen::Map<const Vector>(B.weights.data(), k);
  std::vector<Index> S;
  for (Index i = 0; i < k; ++i) {
    if (lam[i] > 0.0) S.push_back(i);
  }
  Vector b(k);
  for (Index i = 0; i < k; ++i) b[i] = B.values[i];

  auto drop_zeros = [&]() {
    std::erase_if(S, [&](Index i) { return !(lam[i] > 0.0); });
  };
  const int max_steps = 50 * static_cast<int>(k) + 100;
  for (int step = 0; step < max_steps; ++step) {
    const auto s = static_cast<Index>(S.size());
    Matrix kkt = Matrix::Zero(s + 1, s + 1);
    Vector rhs(s + 1);
    for (Index p = 0; p < s; ++p) {
      for (Index q = 0; q < s; ++q) kkt(p, q) = B.gram(S[p], S[q]);
      kkt(p, s) = kkt(s, p) = 1.0;
      rhs[p] = b[S[p]];
    }
    rhs[s] = 1.0;
    Eigen::FullPivLU<Matrix> lu(kkt);
    lu.setThreshold(1e-13);
    Vector dir(s);
    bool ray = false;
    if (lu.isInvertible()) {
      const Vector sol = lu.solve(rhs);
      bool nonneg = true;
      for (Index p = 0; p < s; ++p) {
        dir[p] = sol[p] - lam[S[p]];
        nonneg = nonneg && sol[p] >= 0.0;
      }
      if (nonneg) {
        for (Index p = 0; p < s; ++p) lam[S[p]] = sol[p];
        // optimal on the face: add the most violated cut, if any
        const Vector grad = b - B.gram * lam;
        double on_face = 0.0;
        for (Index p = 0; p < s; ++p) on_face += lam[S[p]] * grad[S[p]];
        Index best = -1;
        double best_val = on_face + 4e-16 * (1.0 + std::abs(on_face));
        for (Index i = 0; i < k; ++i) {
          if (grad[i] > best_val && std::find(S.begin(), S.end(), i) == S.end()) {
            best = i;
            best_val = grad[i];
          }
        }
        if (best < 0) break;
        S.push_back(best);
        continue;
      }
    } else {
      // slopes affinely dependent: move along the null direction, which
      // leaves the quadratic term unchanged, until a weight hits zero
      const Matrix ker = lu.kernel();
      dir = ker.col(0).head(s);
      // slope of the objective along dir; grad.dir avoids the cancellation in b.dir
      const Vector grad = b - B.gram * lam;
      double lin = 0.0;
      for (Index p = 0; p < s; ++p) lin += dir[p] * grad[S[p]];
      if (lin < 0.0 || (lin == 0.0 && dir[s - 1] < 0.0)) dir = -dir;
      ray = true;
    }
    double t = ray ? std::numeric_limits<double>::infinity() : 1.0;
    for (Index p = 0; p < s; ++p) {
      if (dir[p] < 0.0) t = std::min(t, lam[S[p]] / -dir[p]);
    }
    if (!std::isfinite(t)) break;
    Index hit = -1;
    double hit_ratio = std::numeric_limits<double>::infinity();
    for (Index p = 0; p < s; ++p) {
      if (dir[p] < 0.0 && lam[S[p]] / -dir[p] < hit_ratio) {
        hit_ratio = lam[S[p]] / -dir[p];
        hit = p;
      }
    }
    for (Index p = 0; p < s; ++p) lam[S[p]] = std::max(lam[S[p]] + t * dir[p], 0.0);
    if (hit >= 0 && t >= hit_ratio) lam[S[hit]] = 0.0;
    drop_zeros();
    if (S.empty()) break;
  }
  lam = lam.cwiseMax(0.0);
  const double total = lam.sum();
  if (total > 0.0) lam /= total;
  for (Index i = 0; i < k; ++i) B.weights[i] = lam[i];
}

void add_cut(Bundle& B, Vector slope, double value, double mu) {
  const auto k = static_cast<Index>(B.size());
  Matrix gram(k + 1, k + 1);
  gram.topLeftCorner(k, k) = B.gram;
  for (Index i = 0; i < k; ++i) gram(i, k) = gram(k, i) = B.slopes[i].dot(slope) / mu;
  gram(k, k) = slope.squaredNorm() / mu;
  B.gram = std::move(gram);
  B.slopes.push_back(std::move(slope));
  B.values.push_back(value);
  B.weights.push_back(B.size() == 1 ? 1.0 : 0.0);
}

// Drops unused cuts; when the bundle is still too large the old cuts are
// replaced by their aggregate, which keeps the dual iterate feasible.
void compress(Bundle& B, std::size_t capacity, double mu) {
  if (B.size() <= capacity) return;
  Bundle kept;
  const std::size_t newest = B.size() - 1;
  for (std::size_t i = 0; i < B.size(); ++i) {
    if (B.weights[i] > 0.0 || i == newest) {
      add_cut(kept, B.slopes[i], B.values[i], mu);
      kept.weights.back() = B.weights[i];
    }
  }
  if (kept.size() > capacity) {
    Vector slope = Vector::Zero(B.slopes[0].size());
    double value = 0.0, total = 0.0;
    for (std::size_t i = 0; i + 1 < kept.size(); ++i) {
      slope += kept.weights[i] * kept.slopes[i];
      value += kept.weights[i] * kept.values[i];
      total += kept.weights[i];
    }
    Bundle agg;
    add_cut(agg, slope / total, value / total, mu);
    agg.weights.back() = total;
    add_cut(agg, kept.slopes.back(), kept.values.back(), mu);
    agg.weights.back() = kept.weights.back();
    kept = std::move(agg);
  }
  B = std::move(kept);
}

}  // namespace

MoreauResult moreau_reference(const FirstOrderOracle& oracle, const Vector& x, double rho_env,
                              const MoreauOptions& options) {
  const double m = oracle.weak_convexity();
  if (!(rho_env > m)) {
    throw std::invalid_argument("moreau_reference: rho_env must exceed the weak convexity m");
  }
  if (!(options.tol > 0.0)) throw std::invalid_argument("moreau_reference: tol must be positive");
  if (options.max_iterations < 1 || options.relative_floor < 0.0) {
    throw std::invalid_argument("moreau_reference: max_iterations must be >= 1 and relative_floor >= 0");
  }
  if (options.bundle_size < 2) throw std::invalid_argument("moreau_reference: bundle_size must be >= 2");
  const double mu = rho_env - m;  // strong convexity of the subproblem

  MoreauResult r;
  double lower = -std::numeric_limits<double>::infinity();
  double upper = std::numeric_limits<double>::infinity();
  Bundle bundle;

  auto absorb = [&](const Vector& y, const Evaluation& e) {
    const Vector d = y - x;
    const double phi = e.value + 0.5 * rho_env * d.squaredNorm();
    const Vector dphi = e.subgradient + rho_env * d;
    lower = std::max(lower, phi - dphi.squaredNorm() / (2.0 * mu));
    if (phi < upper) {
      upper = phi;
      r.prox_point = y;
      r.f_at_prox = e.value;
    }
    // cut of f + (m/2)||. - x||^2 at y, moved to the center
    Vector slope = e.subgradient + m * d;
    const double at_center = e.value + 0.5 * m * d.squaredNorm() - slope.dot(d);
    add_cut(bundle, std::move(slope), at_center, mu);
  };
  auto finish = [&]() {
    r.envelope_value = upper;
    r.lower_bound = lower;
    r.certified_gap = std::max(upper - lower, 0.0);
    r.gradient = rho_env * (x - r.prox_point);
    return r;
  };

  const Evaluation at_x = oracle.evaluate(x);
  r.evaluations = 1;
  r.f_at_center = at_x.value;
  const double tol = std::max(options.tol, options.relative_floor * std::max(1.0, std::abs(at_x.value)));
  absorb(x, at_x);
  if (options.stop_when && options.stop_when(finish())) return r;

  while (true) {
    solve_dual(bundle);
    Vector v = Vector::Zero(x.size());
    double eta = 0.0;
    for (std::size_t i = 0; i < bundle.size(); ++i) {
      v += bundle.weights[i] * bundle.slopes[i];
      eta += bundle.weights[i] * bundle.values[i];
    }
    // any simplex point gives a lower bound by weak duality
    eta -= v.squaredNorm() / (2.0 * mu);
    lower = std::max(lower, eta);
    if (upper - lower <= tol) return finish();
    if (r.evaluations >= options.max_iterations) {
      throw ReferenceBudgetExhausted("moreau_reference: budget of " +
                                         std::to_string(options.max_iterations) +
                                         " evaluations exhausted at gap " +
                                         std::to_string(upper - lower),
                                     finish());
    }
    const Vector z = x - v / mu;
    const Evaluation at_z = oracle.evaluate(z);
    ++r.evaluations;
    absorb(z, at_z);
    if (upper - lower <= tol) return finish();
    if (options.stop_when && options.stop_when(finish())) return r;
    compress(bundle, static_cast<std::size_t>(options.bundle_size), mu);
  }
}

double is_to_ms_bound(double eta, double eps, double m, double lambda) {
  if (!(lambda > 0.0)) throw std::invalid_argument("is_to_ms_bound: lambda must be positive");
  if (eta < 0.0 || eps < 0.0) throw std::invalid_argument("is_to_ms_bound: eta, eps must be >= 0");
  return (m + lambda) * (2.0 * eta / lambda + std::sqrt(2.0 * eps / lambda));
}

std::pair<double, double> ms_to_is_bound(double delta, double alpha, double m, double lipschitz) {
  if (!(alpha > m)) throw std::invalid_argument("ms_to_is_bound: alpha must exceed m");
  if (lipschitz < 0.0) throw std::invalid_argument("ms_to_is_bound: L must be >= 0");
  return {lipschitz * delta / alpha, std::sqrt(2.0 * (alpha - m) * lipschitz * delta / alpha)};
}

double is_to_grad_bound(double eta, double eps, double m, double alpha, double smoothness) {
  if (!(alpha > m)) throw std::invalid_argument("is_to_grad_bound: alpha must exceed m");
  if (smoothness < 0.0) throw std::invalid_argument("is_to_grad_bound: M must be >= 0");
  const double lambda = alpha - m;
  return (1.0 + smoothness / alpha) * alpha * (2.0 * eta / lambda + std::sqrt(2.0 * eps / lambda));
}

StationarityCertificate prox_gap_certificate(double delta_k, double rho, double m) {
  if (delta_k < 0.0) throw std::invalid_argument("prox_gap_certificate: negative proximal gap");
  if (!(rho > 0.0)) throw std::invalid_argument("prox_gap_certificate: rho must be positive");
  const double alpha = m + rho;
  StationarityCertificate c;
  c.eta = std::sqrt(2.0 * rho * delta_k);
  c.eps = delta_k;
  c.moreau_delta = std::sqrt(2.0 * alpha * alpha * delta_k / rho);
  c.alpha = alpha;
  return c;
}

double qg_moreau_upper_bound(double f_w, double lambda, double dist_w_to_s, double rho) {
  if (!(dist_w_to_s > 0.0)) throw std::invalid_argument("qg_moreau_upper_bound: distance must be > 0");
  if (lambda < 0.0) throw std::invalid_argument("qg_moreau_upper_bound: Lambda must be >= 0");
  const double d2 = dist_w_to_s * dist_w_to_s;
  if (lambda > rho * d2) return f_w - lambda + 0.5 * rho * d2;
  return f_w - lambda * lambda / (2.0 * rho * d2);
}

}  // namespace wcprox
