#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "wcprox/problems.hpp"
#include "wcprox/prox_descent.hpp"

using namespace wcprox;

namespace {

Vector v1(double a) { return Vector::Constant(1, a); }

ProxDescentConfig cfg(double beta, double rho) {
  ProxDescentConfig c;
  c.beta = beta;
  c.rho = rho;
  return c;
}

// (3.7a) and (3.7b) for one step, relative slack
void check_step_inequalities(const DescentStepResult& r, double m, const ProxDescentConfig& c) {
  const double alpha = m + c.rho;
  const double g2 = r.gtilde.squaredNorm();
  const double tol = 1e-9 * std::max(1.0, std::abs(r.f_center));
  CHECK(r.f_trial <= r.f_center - (m + c.beta * c.rho) / (2.0 * alpha * alpha) * g2 + tol);
  CHECK(r.inexactness <=
        (1.0 - c.beta) / c.beta * (r.f_center - r.f_trial - m / (2.0 * alpha * alpha) * g2) + tol);
  CHECK(r.inexactness >= 0.0);
}

}  // namespace

TEST_CASE("descent_test examples") {
  CHECK(descent_test(1.0, 0.2, 0.0, 0.5, 0.0));
  CHECK_FALSE(descent_test(1.0, 0.7, 0.0, 0.5, 0.0));
  for (double beta : {0.01, 0.5, 0.99}) CHECK(descent_test(1.0, 0.3, 0.3, beta, 0.0));
  // slack is relative to max(1, |f|)
  CHECK(descent_test(100.0, 100.0, 99.0, 0.5, 0.006));
  CHECK_FALSE(descent_test(100.0, 100.0, 99.0, 0.5, 0.004));
}

TEST_CASE("config validation") {
  ProxDescentConfig c;
  CHECK_NOTHROW(c.validate());
  c.beta = 1.0;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = {};
  c.rho = 0.0;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = {};
  c.max_inner_per_step = 0;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = {};
  c.eta_target = -1.0;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
}

TEST_CASE("one step on |x| from 1 is exact") {
  const auto f = toy(ToyKind::abs, 1);
  const auto r = prox_descent_step(f.oracle, v1(1.0), cfg(0.5, 1.0));
  CHECK(r.inner_iterations == 1);
  CHECK(r.evaluations == 2);
  CHECK(r.trial[0] == doctest::Approx(0.0));
  CHECK(r.gtilde[0] == doctest::Approx(1.0));
  CHECK(r.inexactness == 0.0);
}

TEST_CASE("a step on |x^2 - 1| satisfies the descent inequalities and the certificate") {
  const auto f = toy(ToyKind::abs_quadratic, 1);
  const double m = f.oracle.weak_convexity();
  for (double beta : {0.25, 0.5, 0.75}) {
    for (double x : {0.5, -1.7, 0.0, 3.0}) {
      const auto c = cfg(beta, 1.0);
      const auto r = prox_descent_step(f.oracle, v1(x), c);
      check_step_inequalities(r, m, c);
      CHECK((r.gtilde - (m + c.rho) * (v1(x) - r.trial)).norm() == 0.0);
      RngStream rng(static_cast<std::uint64_t>(1000 * (x + 5) + 10 * beta));
      CHECK(testing::sampled_minorant_gap(f.oracle, r.trial, r.gtilde, r.inexactness, rng, 1000, -2.0, 2.0) <=
            1e-8);
      for (std::size_t j = 1; j < r.inner_trace.size(); ++j) {
        CHECK(r.inner_trace[j].eta >= r.inner_trace[j - 1].eta - 1e-10);
      }
    }
  }
}

TEST_CASE("run on |x| follows the hand recursion") {
  const auto f = toy(ToyKind::abs, 1);
  const auto rep = run(f.oracle, v1(1.0), cfg(0.5, 1.0));
  // x2 = 0 with gtilde = 1; the step from 0 is null in size and certifies
  REQUIRE(rep.iterates.size() == 2);
  CHECK(rep.iterates[0].point[0] == doctest::Approx(0.0));
  CHECK(rep.iterates[0].gtilde_norm_sq == doctest::Approx(1.0));
  CHECK(rep.iterates[1].gtilde_norm_sq == 0.0);
  CHECK(rep.termination == Termination::certified);
  REQUIRE(rep.certified_index.has_value());
  CHECK(*rep.certified_index == 2);
  CHECK(rep.total_evaluations == 3);
  CHECK(rep.total_evaluations == rep.iterates.back().cumulative_evaluations);
  CHECK(static_cast<double>(rep.iterates.size()) <= outer_iteration_bound(1.0, 0.0, rep.config));
}

TEST_CASE("run on a convex quadratic decreases monotonically to 0") {
  const auto f = toy(ToyKind::quadratic, 1, 1.0);
  auto c = cfg(0.5, 1.0);
  c.eta_target = 0.0;
  c.eps_target = 0.0;
  c.max_outer = 60;
  const auto rep = run(f.oracle, v1(1.0), c);
  double prev = rep.f_initial;
  double x_prev = 1.0;
  for (const auto& r : rep.iterates) {
    CHECK(r.f_value <= prev);
    CHECK(std::abs(r.point[0]) <= std::abs(x_prev));
    prev = r.f_value;
    x_prev = r.point[0];
  }
  CHECK(std::abs(rep.final_point()[0]) <= 1e-6);
}

TEST_CASE("telescoping sums on phase retrieval") {
  const auto [inst, oracle] = gen_phase_retrieval(10, 30, 3);
  const double m = oracle.weak_convexity();
  auto c = cfg(0.5, 1.0);
  c.max_outer = 40;
  RngStream rng = RngStream::derive(3, 1);
  const auto rep = run(oracle, standard_normal_vector(rng, 10), c);
  const double alpha = m + c.rho;
  double sum_g = 0.0, sum_e = 0.0;
  for (const auto& r : rep.iterates) {
    sum_g += r.gtilde_norm_sq;
    sum_e += r.epsilon;
    const double drop = rep.f_initial - r.f_value;
    CHECK(sum_g <= 2.0 * alpha * alpha * drop / (m + c.beta * c.rho) * (1.0 + 1e-9) + 1e-12);
    CHECK(sum_e <= (1.0 - c.beta) / c.beta * drop * (1.0 + 1e-9) + 1e-12);
  }
}

TEST_CASE("a too small m is reported, not silently used") {
  // concave: -x^2/2 declared convex
  const FirstOrderOracle bad(1, OracleConstants{}, [](const Vector& x) {
    return Evaluation{-0.5 * x.squaredNorm(), -x};
  });
  CHECK_THROWS_AS(prox_descent_step(bad, v1(1.0), cfg(0.5, 1.0)), WeakConvexityViolation);
  try {
    (void)prox_descent_step(bad, v1(1.0), cfg(0.5, 1.0));
  } catch (const WeakConvexityViolation& e) {
    CHECK(e.gap() < 0.0);
    CHECK(e.center()[0] == 1.0);
    CHECK(std::string(e.what()).find("too small") != std::string::npos);
  }
}

TEST_CASE("inner budget exhaustion is an explicit state") {
  const auto f = toy(ToyKind::abs, 1);
  auto c = cfg(0.5, 0.1);
  c.max_inner_per_step = 1;
  CHECK_THROWS_AS(prox_descent_step(f.oracle, v1(1.0), c), InnerBudgetExhausted);
  const auto rep = run(f.oracle, v1(1.0), c);
  CHECK(rep.termination == Termination::inner_budget_exhausted);
  REQUIRE(rep.partial_step.has_value());
  CHECK(rep.partial_step->inner_iterations == 1);
  CHECK_FALSE(rep.diagnostic.empty());
}

TEST_CASE("the evaluation budget is respected") {
  const auto [inst, oracle] = gen_phase_retrieval(5, 15, 2);
  for (std::int64_t budget : {1, 2, 7, 50, 333}) {
    auto c = cfg(0.5, 1.0);
    c.max_evaluations = budget;
    const auto rep = run(oracle, Vector::Ones(5), c);
    CHECK(rep.total_evaluations <= budget);
    CHECK(rep.termination == Termination::evaluation_budget);
  }
}

TEST_CASE("outer_iteration_bound formula") {
  ProxDescentConfig c = cfg(0.5, 1.0);
  c.eta_target = 1.0;
  c.eps_target = 1.0;
  // 2 * 1 * 1 / 0.5 + 0.5 * 1 / 0.5 + 1
  CHECK(outer_iteration_bound(1.0, 0.0, c) == doctest::Approx(6.0));
  CHECK(to_string(Termination::certified) == "certified");
}
