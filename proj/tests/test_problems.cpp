#include <doctest.h>

#include <cmath>
#include <sstream>

#include "oracles.hpp"
#include "wcprox/problems.hpp"

using namespace wcprox;

namespace {

Vector v1(double a) { return Vector::Constant(1, a); }

Vector vec(std::initializer_list<double> xs) {
  Vector v(static_cast<Index>(xs.size()));
  Index i = 0;
  for (double x : xs) v[i++] = x;
  return v;
}

// Central differences; valid away from kinks.
Vector fd_gradient(const FirstOrderOracle& f, const Vector& x, double h = 1e-6) {
  Vector g(x.size());
  for (Index j = 0; j < x.size(); ++j) {
    Vector xp = x, xm = x;
    xp[j] += h;
    xm[j] -= h;
    g[j] = (f.evaluate(xp).value - f.evaluate(xm).value) / (2.0 * h);
  }
  return g;
}

}  // namespace

TEST_CASE("toy oracles") {
  const auto a = toy(ToyKind::abs, 1);
  auto e = a.oracle.evaluate(v1(2.0));
  CHECK(e.value == 2.0);
  CHECK(e.subgradient[0] == 1.0);
  CHECK(a.oracle.evaluate(v1(0.0)).subgradient[0] == 0.0);
  CHECK(*a.oracle.constants().lipschitz == 1.0);

  const auto aq = toy(ToyKind::abs_quadratic, 1);
  CHECK(aq.oracle.weak_convexity() == 2.0);
  e = aq.oracle.evaluate(v1(0.0));
  CHECK(e.value == 1.0);
  CHECK(e.subgradient[0] == 0.0);
  e = aq.oracle.evaluate(v1(2.0));
  CHECK(e.value == 3.0);
  CHECK(e.subgradient[0] == 4.0);
  CHECK(aq.oracle.evaluate(v1(1.0)).value == 0.0);
  CHECK(aq.distance_to_solutions(v1(0.2)) == doctest::Approx(0.8));
  CHECK(aq.distance_to_solutions(v1(-3.0)) == doctest::Approx(2.0));

  const auto sq = toy(ToyKind::smooth_qg, 3);
  CHECK(sq.oracle.evaluate(Vector::Zero(3)).subgradient.norm() == 0.0);
  CHECK(sq.oracle.evaluate(Vector::Zero(3)).value == 1.0);
  CHECK(sq.oracle.weak_convexity() == 1.0);
  CHECK(*sq.oracle.constants().smoothness == 11.0);
  CHECK(*sq.quadratic_growth >= 9.0);
  CHECK(*sq.oracle.constants().optimal_value == 1.0);

  const auto q = toy(ToyKind::quadratic, 2, 10.0);
  CHECK(q.oracle.evaluate(vec({1.0, 1.0})).value == 10.0);
  CHECK(*q.quadratic_growth == 10.0);
}

TEST_CASE("toy kind names round trip") {
  for (auto k : {ToyKind::abs, ToyKind::abs_quadratic, ToyKind::quadratic, ToyKind::smooth_qg}) {
    CHECK(parse_toy_kind(to_string(k)) == k);
  }
  CHECK_THROWS(parse_toy_kind("cubic"));
  CHECK_THROWS(toy(ToyKind::abs, 0));
}

TEST_CASE("declared constants hold on samples") {
  RngStream rng(77);
  for (auto k : {ToyKind::abs, ToyKind::abs_quadratic, ToyKind::quadratic, ToyKind::smooth_qg}) {
    const auto t = toy(k, 4, 3.0);
    CHECK(testing::sampled_pair_violation(t.oracle, t.oracle.weak_convexity(), rng, 1000, -2.0, 2.0) <= 1e-9);
    if (auto L = t.oracle.constants().lipschitz) {
      for (int i = 0; i < 1000; ++i) {
        const Vector x = uniform_box_vector(rng, 4, -2.0, 2.0);
        const Vector y = uniform_box_vector(rng, 4, -2.0, 2.0);
        CHECK(std::abs(t.oracle.evaluate(x).value - t.oracle.evaluate(y).value) <=
              *L * (x - y).norm() * (1.0 + 1e-12));
      }
    }
  }
}

TEST_CASE("phase retrieval spec example") {
  Matrix a(1, 1);
  a << 1.0;
  const auto inst = phase_retrieval_instance(a, Vector::Zero(1), v1(0.0));
  const auto f = phase_retrieval_oracle(inst);
  const auto e = f.evaluate(v1(2.0));
  CHECK(e.value == 4.0);
  CHECK(e.subgradient[0] == 4.0);
  CHECK(inst.m == 2.0);
}

TEST_CASE("generated phase retrieval") {
  const auto [inst, f] = gen_phase_retrieval(20, 60, 1);
  CHECK(inst.a.rows() == 60);
  CHECK(inst.a.cols() == 20);
  CHECK(inst.ground_truth.norm() == doctest::Approx(1.0));
  CHECK(f.evaluate(inst.ground_truth).value == 0.0);
  for (Index i = 0; i < 60; ++i) {
    const double r = inst.a.row(i).dot(inst.ground_truth);
    CHECK(inst.b[i] == r * r);
  }
  CHECK(inst.m == doctest::Approx(2.0 * inst.a.squaredNorm() / 60.0).epsilon(1e-14));
  CHECK(f.weak_convexity() == inst.m);
  CHECK(inst.lipschitz_box_estimate > 0.0);

  RngStream rng(5);
  CHECK(testing::sampled_pair_violation(f, inst.m, rng, 1000, -2.0, 2.0) <= 1e-9);
  for (int i = 0; i < 20; ++i) {
    const Vector x = uniform_box_vector(rng, 20, -2.0, 2.0);
    CHECK((f.evaluate(x).subgradient - fd_gradient(f, x)).norm() <= 1e-5 * std::max(1.0, f.evaluate(x).subgradient.norm()));
  }
}

TEST_CASE("generators are deterministic per seed") {
  const auto a = gen_phase_retrieval(7, 21, 9).first;
  const auto b = gen_phase_retrieval(7, 21, 9).first;
  const auto c = gen_phase_retrieval(7, 21, 10).first;
  CHECK(a.a == b.a);
  CHECK(a.b == b.b);
  CHECK(a.ground_truth == b.ground_truth);
  CHECK(a.a != c.a);
  const auto u = gen_blind_deconv(4, 12, 9).first;
  const auto w = gen_blind_deconv(4, 12, 9).first;
  CHECK(u.u == w.u);
  CHECK(u.v == w.v);
  CHECK(u.b == w.b);
}

TEST_CASE("blind deconvolution spec example") {
  Matrix u(1, 1), v(1, 1);
  u << 1.0;
  v << 1.0;
  const auto inst = blind_deconv_instance(u, v, Vector::Zero(1), v1(0.0), v1(0.0));
  const auto f = blind_deconv_oracle(inst);
  const auto e = f.evaluate(vec({1.0, 2.0}));
  CHECK(e.value == 2.0);
  CHECK(e.subgradient[0] == 2.0);
  CHECK(e.subgradient[1] == 1.0);
  CHECK(inst.m == 1.0);
  CHECK(inst.m_inner_product == 1.0);
}

TEST_CASE("generated blind deconvolution") {
  const auto [inst, f] = gen_blind_deconv(10, 30, 2);
  CHECK(f.dimension() == 20);
  CHECK(f.evaluate(inst.stacked_ground_truth()).value == 0.0);
  double m = 0.0, mi = 0.0;
  for (Index i = 0; i < 30; ++i) {
    m += inst.u.row(i).norm() * inst.v.row(i).norm();
    mi += std::abs(inst.u.row(i).dot(inst.v.row(i)));
    CHECK(inst.b[i] == inst.u.row(i).dot(inst.ground_truth_x) * inst.v.row(i).dot(inst.ground_truth_y));
  }
  CHECK(inst.m == doctest::Approx(m / 30.0).epsilon(1e-14));
  CHECK(inst.m_inner_product == doctest::Approx(mi / 30.0).epsilon(1e-14));
  RngStream rng(6);
  CHECK(testing::sampled_pair_violation(f, inst.m, rng, 1000, -2.0, 2.0) <= 1e-9);
}

TEST_CASE("the inner-product modulus is not a valid weak-convexity constant") {
  // u = e1, v = e2: f(x, y) = |x_1 y_2| with sum |<u, v>| = 0
  Matrix u = Matrix::Zero(1, 2), v = Matrix::Zero(1, 2);
  u(0, 0) = 1.0;
  v(0, 1) = 1.0;
  const auto inst = blind_deconv_instance(u, v, Vector::Zero(1), Vector::Zero(2), Vector::Zero(2));
  const auto f = blind_deconv_oracle(inst);
  CHECK(inst.m_inner_product == 0.0);
  CHECK(inst.m == 1.0);
  // along x1 = 1 + s, y2 = 1 - s the function is 1 - s^2: concave
  const Vector x = vec({1.0, 0.0, 0.0, 1.0});
  const Vector y = vec({1.5, 0.0, 0.0, 0.5});
  const auto ex = f.evaluate(x);
  const double lin = ex.value + ex.subgradient.dot(y - x);
  CHECK(f.evaluate(y).value + 0.5 * inst.m_inner_product * (y - x).squaredNorm() < lin - 0.1);
  CHECK(f.evaluate(y).value + 0.5 * inst.m * (y - x).squaredNorm() >= lin - 1e-12);
}

TEST_CASE("instance files round trip") {
  const auto pr = gen_phase_retrieval(6, 18, 3).first;
  std::stringstream s1;
  write_instance(s1, pr);
  CHECK(peek_instance_family(s1) == "phase_retrieval");
  const auto pr2 = read_phase_retrieval(s1);
  CHECK(pr2.a == pr.a);
  CHECK(pr2.b == pr.b);
  CHECK(pr2.ground_truth == pr.ground_truth);
  CHECK(pr2.m == pr.m);
  CHECK(pr2.seed == pr.seed);
  std::stringstream s1b;
  write_instance(s1b, pr2);
  std::stringstream s1c;
  write_instance(s1c, pr);
  CHECK(s1b.str() == s1c.str());

  const auto bd = gen_blind_deconv(4, 12, 5).first;
  std::stringstream s2;
  write_instance(s2, bd);
  CHECK(peek_instance_family(s2) == "blind_deconv");
  const auto bd2 = read_blind_deconv(s2);
  CHECK(bd2.u == bd.u);
  CHECK(bd2.v == bd.v);
  CHECK(bd2.b == bd.b);
  CHECK(bd2.m == bd.m);
  const Vector z = Vector::Constant(8, 0.3);
  CHECK(blind_deconv_oracle(bd2).evaluate(z).value == blind_deconv_oracle(bd).evaluate(z).value);
}

TEST_CASE("malformed instance files are rejected") {
  std::stringstream empty;
  CHECK_THROWS_AS(read_phase_retrieval(empty), std::runtime_error);
  std::stringstream wrong("not an instance\n");
  CHECK_THROWS_AS(read_phase_retrieval(wrong), std::runtime_error);

  const auto pr = gen_phase_retrieval(3, 6, 3).first;
  std::stringstream s;
  write_instance(s, pr);
  std::string text = s.str();
  std::stringstream truncated(text.substr(0, text.size() / 2));
  CHECK_THROWS_AS(read_phase_retrieval(truncated), std::runtime_error);
  std::stringstream as_bd(text);
  CHECK_THROWS_AS(read_blind_deconv(as_bd), std::runtime_error);

  // a stored modulus that disagrees with the data
  const auto pos = text.find("\nm ");
  REQUIRE(pos != std::string::npos);
  const auto eol = text.find('\n', pos + 1);
  std::string tampered = text.substr(0, pos) + "\nm 0.5" + text.substr(eol);
  std::stringstream bad_m(tampered);
  CHECK_THROWS_AS(read_phase_retrieval(bad_m), std::runtime_error);
}
