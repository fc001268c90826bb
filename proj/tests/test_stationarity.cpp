#include <doctest.h>

#include <cmath>

#include "wcprox/problems.hpp"
#include "wcprox/prox_descent.hpp"
#include "wcprox/stationarity.hpp"

using namespace wcprox;

namespace {

Vector v1(double a) { return Vector::Constant(1, a); }

}  // namespace

TEST_CASE("moreau_reference examples") {
  const auto aq = toy(ToyKind::abs_quadratic, 1);
  for (double x : {-1.0, 0.0, 1.0}) {
    const auto r = moreau_reference(aq.oracle, v1(x), 4.0);
    CHECK(std::abs(r.gradient[0]) <= 1e-8);
    CHECK(r.prox_point[0] == doctest::Approx(x).epsilon(1e-9));
    CHECK(std::abs(r.envelope_value - aq.oracle.evaluate(v1(x)).value) <= 1e-8);
  }

  const auto q = toy(ToyKind::quadratic, 1, 1.0);
  auto r = moreau_reference(q.oracle, v1(2.0), 1.0);
  CHECK(r.prox_point[0] == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(r.gradient[0] == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(r.envelope_value == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(r.certified_gap <= 1e-12);

  const auto a = toy(ToyKind::abs, 1);
  r = moreau_reference(a.oracle, v1(0.5), 1.0);
  CHECK(r.prox_point[0] == doctest::Approx(0.0));
  CHECK(r.gradient[0] == doctest::Approx(0.5));
  CHECK(r.envelope_value == doctest::Approx(0.125));
}

TEST_CASE("moreau_reference errors") {
  const auto aq = toy(ToyKind::abs_quadratic, 1);
  CHECK_THROWS_AS(moreau_reference(aq.oracle, v1(0.3), 2.0), std::invalid_argument);
  MoreauOptions o;
  o.tol = 0.0;
  CHECK_THROWS_AS(moreau_reference(aq.oracle, v1(0.3), 4.0, o), std::invalid_argument);
  o = {};
  o.max_iterations = 3;
  const auto pr = gen_phase_retrieval(8, 24, 1).second;
  CHECK_THROWS_AS(moreau_reference(pr, Vector::Ones(8), pr.weak_convexity() + 1.0, o),
                  ReferenceBudgetExhausted);
  try {
    (void)moreau_reference(pr, Vector::Ones(8), pr.weak_convexity() + 1.0, o);
  } catch (const ReferenceBudgetExhausted& e) {
    CHECK(e.best().evaluations == 3);
    CHECK(e.best().certified_gap > 0.0);
  }
}

TEST_CASE("moreau_reference invariants") {
  RngStream rng(8);
  const auto t = toy(ToyKind::abs_quadratic, 3);
  const double m = t.oracle.weak_convexity();
  for (int i = 0; i < 30; ++i) {
    const Vector x = uniform_box_vector(rng, 3, -2.0, 2.0);
    const double rho = m + std::exp(rng.uniform(-1.0, 2.0));
    const auto r = moreau_reference(t.oracle, x, rho);
    CHECK((r.gradient - rho * (x - r.prox_point)).norm() == 0.0);
    CHECK(r.envelope_value <= t.oracle.evaluate(x).value + 1e-9);
    CHECK(r.certified_gap >= 0.0);
    CHECK(r.certified_gap <= 1e-12);
    CHECK(r.lower_bound <= r.envelope_value);
    CHECK(r.point_error(rho, m) == doctest::Approx(std::sqrt(2.0 * r.certified_gap / (rho - m))));
    CHECK(r.gradient_error(rho, m) == doctest::Approx(rho * r.point_error(rho, m)));
  }
}

TEST_CASE("stop_when ends the solve early") {
  const auto pr = gen_phase_retrieval(8, 24, 1).second;
  MoreauOptions o;
  int calls = 0;
  o.stop_when = [&](const MoreauResult& partial) {
    ++calls;
    return partial.evaluations >= 5;
  };
  const auto r = moreau_reference(pr, Vector::Ones(8), pr.weak_convexity() + 1.0, o);
  CHECK(r.evaluations == 5);
  CHECK(calls == 5);
}

TEST_CASE("Moreau gradient agrees with finite differences of the envelope") {
  const auto t = toy(ToyKind::smooth_qg, 3);
  const double rho = 3.0;
  RngStream rng(12);
  const double h = 1e-5;
  for (int i = 0; i < 20; ++i) {
    const Vector x = uniform_box_vector(rng, 3, -2.0, 2.0);
    const auto r = moreau_reference(t.oracle, x, rho);
    Vector fd(3);
    for (Index j = 0; j < 3; ++j) {
      Vector xp = x, xm = x;
      xp[j] += h;
      xm[j] -= h;
      fd[j] = (moreau_reference(t.oracle, xp, rho).envelope_value -
               moreau_reference(t.oracle, xm, rho).envelope_value) /
              (2.0 * h);
    }
    CHECK((r.gradient - fd).norm() <= 1e-4);
  }
}

TEST_CASE("prox point is nearly stationary for f") {
  const auto t = toy(ToyKind::smooth_qg, 4);
  RngStream rng(13);
  for (int i = 0; i < 20; ++i) {
    const Vector x = uniform_box_vector(rng, 4, -2.0, 2.0);
    const double rho = 2.0;
    const auto r = moreau_reference(t.oracle, x, rho);
    const Vector grad_at_prox = t.oracle.evaluate(r.prox_point).subgradient;
    // grad f(x_hat) = rho (x - x_hat) at the exact prox point; f is 11-smooth
    const double err = r.gradient_error(rho, 1.0) + 11.0 * r.point_error(rho, 1.0);
    CHECK(grad_at_prox.norm() <= r.gradient.norm() + err + 1e-9);
  }
}

TEST_CASE("prox_descent certificates are consistent with reference Moreau gradients") {
  const auto t = toy(ToyKind::abs_quadratic, 2);
  const double m = t.oracle.weak_convexity();
  ProxDescentConfig c;
  c.rho = 1.0;
  c.max_outer = 30;
  const auto rep = run(t.oracle, Vector::Constant(2, 1.7), c);
  for (const auto& r : rep.iterates) {
    const double bound = is_to_ms_bound(std::sqrt(r.gtilde_norm_sq), r.epsilon, m, c.rho);
    const auto ref = moreau_reference(t.oracle, r.point, m + c.rho);
    CHECK(ref.gradient.norm() <= bound + ref.gradient_error(m + c.rho, m) + 1e-9);
  }
}

TEST_CASE("is_to_ms_bound examples") {
  CHECK(is_to_ms_bound(0.0, 0.0, 1.0, 1.0) == 0.0);
  CHECK(is_to_ms_bound(1.0, 0.0, 1.0, 1.0) == doctest::Approx(4.0));
  CHECK(is_to_ms_bound(0.0, 1.0, 2.0, 2.0) == doctest::Approx(4.0));
  // lambda = m reduces to 4 eta + 2 sqrt(2 m eps)
  CHECK(is_to_ms_bound(0.3, 0.7, 1.5, 1.5) == doctest::Approx(4 * 0.3 + 2 * std::sqrt(2 * 1.5 * 0.7)));
  CHECK_THROWS_AS(is_to_ms_bound(1.0, 1.0, 1.0, 0.0), std::invalid_argument);
}

TEST_CASE("ms_to_is_bound examples") {
  auto [e0, s0] = ms_to_is_bound(0.0, 2.0, 1.0, 1.0);
  CHECK(e0 == 0.0);
  CHECK(s0 == 0.0);
  auto [e1, s1] = ms_to_is_bound(2.0, 2.0, 1.0, 1.0);
  CHECK(e1 == doctest::Approx(1.0));
  CHECK(s1 == doctest::Approx(std::sqrt(2.0)));
  auto [e2, s2] = ms_to_is_bound(4.0, 4.0, 2.0, 2.0);
  CHECK(e2 == doctest::Approx(2.0));
  CHECK(s2 == doctest::Approx(2.0 * std::sqrt(2.0)));
  CHECK_THROWS_AS(ms_to_is_bound(1.0, 1.0, 1.0, 1.0), std::invalid_argument);
}

TEST_CASE("is_to_grad_bound examples") {
  CHECK(is_to_grad_bound(0.0, 0.0, 0.0, 1.0, 1.0) == 0.0);
  CHECK(is_to_grad_bound(1.0, 0.0, 0.0, 1.0, 1.0) == doctest::Approx(4.0));
  CHECK(is_to_grad_bound(0.0, 0.5, 1.0, 2.0, 2.0) == doctest::Approx(4.0));
  CHECK_THROWS_AS(is_to_grad_bound(1.0, 1.0, 2.0, 2.0, 1.0), std::invalid_argument);
}

TEST_CASE("prox_gap_certificate examples") {
  auto c = prox_gap_certificate(0.0, 1.0, 0.0);
  CHECK(c.eta == 0.0);
  CHECK(c.eps == 0.0);
  CHECK(*c.moreau_delta == 0.0);
  c = prox_gap_certificate(2.0, 1.0, 0.0);
  CHECK(c.eta == doctest::Approx(2.0));
  CHECK(c.eps == doctest::Approx(2.0));
  CHECK(*c.moreau_delta == doctest::Approx(2.0));
  CHECK(c.alpha == 1.0);
  c = prox_gap_certificate(0.5, 2.0, 2.0);
  CHECK(c.eta == doctest::Approx(std::sqrt(2.0)));
  CHECK(c.eps == doctest::Approx(0.5));
  CHECK(*c.moreau_delta == doctest::Approx(std::sqrt(8.0)));
  CHECK(c.alpha == 4.0);
  CHECK_THROWS_AS(prox_gap_certificate(-1.0, 1.0, 0.0), std::invalid_argument);
}

TEST_CASE("qg_moreau_upper_bound examples") {
  CHECK(qg_moreau_upper_bound(1.0, 0.0, 1.0, 2.0) == 1.0);
  CHECK(qg_moreau_upper_bound(1.0, 1.0, 1.0, 2.0) == doctest::Approx(0.75));
  CHECK(qg_moreau_upper_bound(1.0, 1.0, 0.5, 2.0) == doctest::Approx(0.25));
  CHECK_THROWS_AS(qg_moreau_upper_bound(1.0, 1.0, 0.0, 2.0), std::invalid_argument);
}

TEST_CASE("envelope of a quadratic stays below the growth bound") {
  const double mu = 10.0;
  const auto q = toy(ToyKind::quadratic, 4, mu);
  RngStream rng(14);
  for (int i = 0; i < 20; ++i) {
    const Vector w = uniform_box_vector(rng, 4, -2.0, 2.0);
    const double rho = 1.0;
    const double f = q.oracle.evaluate(w).value;
    const double d = q.distance_to_solutions(w);
    const double bound = qg_moreau_upper_bound(f, f, d, rho);
    CHECK(moreau_reference(q.oracle, w, rho).envelope_value <= bound + 1e-8);
  }
}
