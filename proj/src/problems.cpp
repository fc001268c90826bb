#include "wcprox/problems.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace wcprox {

namespace {

constexpr int kLipschitzSamples = 256;

double sign_or_zero(double r) { return r > 0.0 ? 1.0 : (r < 0.0 ? -1.0 : 0.0); }

Matrix gaussian_rows(RngStream& rng, Index n, Index d) {
  Matrix a(n, d);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < d; ++j) a(i, j) = rng.standard_normal();
  return a;
}

Vector unit_sphere(RngStream& rng, Index d) {
  Vector x = standard_normal_vector(rng, d);
  double norm = x.norm();
  while (norm == 0.0) {
    x = standard_normal_vector(rng, d);
    norm = x.norm();
  }
  return x / norm;
}

double box_lipschitz(const FirstOrderOracle& oracle, std::uint64_t seed) {
  RngStream rng = RngStream::derive(seed, 0x4c495053ULL);
  double best = 0.0;
  for (int s = 0; s < kLipschitzSamples; ++s) {
    const Vector x = uniform_box_vector(rng, oracle.dimension(), -2.0, 2.0);
    best = std::max(best, oracle.evaluate(x).subgradient.norm());
  }
  return best;
}

void check_dims(bool ok, const char* what) {
  if (!ok) throw std::invalid_argument(what);
}

}  // namespace

ToyKind parse_toy_kind(const std::string& name) {
  if (name == "abs") return ToyKind::abs;
  if (name == "abs_quadratic") return ToyKind::abs_quadratic;
  if (name == "quadratic") return ToyKind::quadratic;
  if (name == "smooth_qg") return ToyKind::smooth_qg;
  throw std::invalid_argument("unknown toy kind '" + name +
                              "' (expected abs, abs_quadratic, quadratic or smooth_qg)");
}

std::string to_string(ToyKind kind) {
  switch (kind) {
    case ToyKind::abs:
      return "abs";
    case ToyKind::abs_quadratic:
      return "abs_quadratic";
    case ToyKind::quadratic:
      return "quadratic";
    case ToyKind::smooth_qg:
      return "smooth_qg";
  }
  return "unknown";
}

double ToyFunction::distance_to_solutions(const Vector& x) const {
  if (kind == ToyKind::abs_quadratic) {
    // nearest point of {-1, 1}^n, coordinatewise; ties at 0 go to +1
    double d2 = 0.0;
    for (Index i = 0; i < x.size(); ++i) {
      const double t = x[i] >= 0.0 ? 1.0 : -1.0;
      d2 += (x[i] - t) * (x[i] - t);
    }
    return std::sqrt(d2);
  }
  return x.norm();
}

ToyFunction toy(ToyKind kind, Index dimension, double mu) {
  if (dimension < 1) throw std::invalid_argument("toy: dimension must be >= 1");
  const Index n = dimension;
  OracleConstants c;
  FirstOrderOracle::Function fn;
  std::optional<double> qg;
  std::string minimizers = "{0}";
  switch (kind) {
    case ToyKind::abs:
      c.weak_convexity = 0.0;
      c.lipschitz = std::sqrt(static_cast<double>(n));
      c.optimal_value = 0.0;
      fn = [](const Vector& x) {
        Vector g = x.unaryExpr([](double t) { return sign_or_zero(t); });
        return Evaluation{x.lpNorm<1>(), std::move(g)};
      };
      break;
    case ToyKind::abs_quadratic:
      c.weak_convexity = 2.0;
      c.optimal_value = 0.0;
      minimizers = "{-1, 1}^n";
      fn = [](const Vector& x) {
        double value = 0.0;
        Vector g(x.size());
        for (Index i = 0; i < x.size(); ++i) {
          const double r = x[i] * x[i] - 1.0;
          value += std::abs(r);
          g[i] = 2.0 * x[i] * sign_or_zero(r);
        }
        return Evaluation{value, std::move(g)};
      };
      break;
    case ToyKind::quadratic:
      if (!(mu > 0.0)) throw std::invalid_argument("toy quadratic: mu must be positive");
      c.weak_convexity = 0.0;
      c.smoothness = mu;
      c.optimal_value = 0.0;
      qg = mu;
      fn = [mu](const Vector& x) { return Evaluation{0.5 * mu * x.squaredNorm(), mu * x}; };
      break;
    case ToyKind::smooth_qg:
      c.weak_convexity = 1.0;
      c.smoothness = 11.0;
      c.optimal_value = 1.0;
      qg = 9.0;
      fn = [](const Vector& x) {
        Vector g = 10.0 * x;
        g[0] -= std::sin(x[0]);
        return Evaluation{5.0 * x.squaredNorm() + std::cos(x[0]), std::move(g)};
      };
      break;
  }
  return ToyFunction{kind, FirstOrderOracle(n, c, std::move(fn), to_string(kind)), qg, minimizers};
}

// ---- phase retrieval

PhaseRetrievalInstance phase_retrieval_instance(const Matrix& a, const Vector& b,
                                                const Vector& ground_truth) {
  check_dims(a.rows() >= 1 && a.cols() >= 1, "phase retrieval: need n, d >= 1");
  check_dims(b.size() == a.rows(), "phase retrieval: b must have n entries");
  check_dims(ground_truth.size() == a.cols(), "phase retrieval: ground truth must have d entries");
  PhaseRetrievalInstance inst;
  inst.a = a;
  inst.b = b;
  inst.ground_truth = ground_truth;
  inst.m = 2.0 * a.squaredNorm() / static_cast<double>(a.rows());
  return inst;
}

PhaseRetrievalInstance phase_retrieval_instance(const Matrix& a, const Vector& ground_truth) {
  check_dims(ground_truth.size() == a.cols(), "phase retrieval: ground truth must have d entries");
  // same expression as the oracle, so the residual at the ground truth is exactly 0
  const Vector r = a * ground_truth;
  return phase_retrieval_instance(a, r.cwiseProduct(r), ground_truth);
}

FirstOrderOracle phase_retrieval_oracle(const PhaseRetrievalInstance& inst) {
  OracleConstants c;
  c.weak_convexity = inst.m;
  c.optimal_value = 0.0;
  const Matrix a = inst.a;
  const Vector b = inst.b;
  const double inv_n = 1.0 / static_cast<double>(a.rows());
  auto fn = [a, b, inv_n](const Vector& x) {
    const Vector ax = a * x;
    const Vector r = ax.cwiseProduct(ax) - b;
    Vector w(r.size());
    for (Index i = 0; i < r.size(); ++i) w[i] = 2.0 * ax[i] * sign_or_zero(r[i]);
    return Evaluation{inv_n * r.lpNorm<1>(), inv_n * (a.transpose() * w)};
  };
  return FirstOrderOracle(a.cols(), c, std::move(fn), "phase_retrieval");
}

std::pair<PhaseRetrievalInstance, FirstOrderOracle> gen_phase_retrieval(Index d, Index n,
                                                                       std::uint64_t seed) {
  check_dims(d >= 1 && n >= 1, "gen_phase_retrieval: d, n must be >= 1");
  RngStream rng(seed);
  const Matrix a = gaussian_rows(rng, n, d);
  const Vector truth = unit_sphere(rng, d);
  PhaseRetrievalInstance inst = phase_retrieval_instance(a, truth);
  inst.seed = seed;
  FirstOrderOracle oracle = phase_retrieval_oracle(inst);
  inst.lipschitz_box_estimate = box_lipschitz(oracle, seed);
  return {std::move(inst), std::move(oracle)};
}

// ---- blind deconvolution

Vector BlindDeconvInstance::stacked_ground_truth() const {
  Vector z(dimension());
  z << ground_truth_x, ground_truth_y;
  return z;
}

BlindDeconvInstance blind_deconv_instance(const Matrix& u, const Matrix& v, const Vector& b,
                                          const Vector& x_bar, const Vector& y_bar) {
  check_dims(u.rows() >= 1 && u.cols() >= 1, "blind deconvolution: need n, d >= 1");
  check_dims(v.rows() == u.rows() && v.cols() == u.cols(), "blind deconvolution: u, v shape mismatch");
  check_dims(b.size() == u.rows(), "blind deconvolution: b must have n entries");
  check_dims(x_bar.size() == u.cols() && y_bar.size() == u.cols(),
             "blind deconvolution: ground truth must have d entries");
  BlindDeconvInstance inst;
  inst.u = u;
  inst.v = v;
  inst.b = b;
  inst.ground_truth_x = x_bar;
  inst.ground_truth_y = y_bar;
  const double n = static_cast<double>(u.rows());
  double m = 0.0, m_ip = 0.0;
  for (Index i = 0; i < u.rows(); ++i) {
    m += u.row(i).norm() * v.row(i).norm();
    m_ip += std::abs(u.row(i).dot(v.row(i)));
  }
  inst.m = m / n;
  inst.m_inner_product = m_ip / n;
  return inst;
}

BlindDeconvInstance blind_deconv_instance(const Matrix& u, const Matrix& v, const Vector& x_bar,
                                          const Vector& y_bar) {
  check_dims(x_bar.size() == u.cols() && y_bar.size() == v.cols(),
             "blind deconvolution: ground truth must have d entries");
  const Vector ux = u * x_bar;
  const Vector vy = v * y_bar;
  return blind_deconv_instance(u, v, ux.cwiseProduct(vy), x_bar, y_bar);
}

FirstOrderOracle blind_deconv_oracle(const BlindDeconvInstance& inst) {
  OracleConstants c;
  c.weak_convexity = inst.m;
  c.optimal_value = 0.0;
  const Matrix u = inst.u;
  const Matrix v = inst.v;
  const Vector b = inst.b;
  const Index d = u.cols();
  const double inv_n = 1.0 / static_cast<double>(u.rows());
  auto fn = [u, v, b, d, inv_n](const Vector& z) {
    const Vector ux = u * z.head(d);
    const Vector vy = v * z.tail(d);
    const Vector r = ux.cwiseProduct(vy) - b;
    Vector s(r.size());
    for (Index i = 0; i < r.size(); ++i) s[i] = sign_or_zero(r[i]);
    Vector g(2 * d);
    g.head(d) = inv_n * (u.transpose() * vy.cwiseProduct(s));
    g.tail(d) = inv_n * (v.transpose() * ux.cwiseProduct(s));
    return Evaluation{inv_n * r.lpNorm<1>(), std::move(g)};
  };
  return FirstOrderOracle(2 * d, c, std::move(fn), "blind_deconv");
}

std::pair<BlindDeconvInstance, FirstOrderOracle> gen_blind_deconv(Index d, Index n,
                                                                 std::uint64_t seed) {
  check_dims(d >= 1 && n >= 1, "gen_blind_deconv: d, n must be >= 1");
  RngStream rng(seed);
  const Matrix u = gaussian_rows(rng, n, d);
  const Matrix v = gaussian_rows(rng, n, d);
  const Vector x_bar = unit_sphere(rng, d);
  const Vector y_bar = unit_sphere(rng, d);
  BlindDeconvInstance inst = blind_deconv_instance(u, v, x_bar, y_bar);
  inst.seed = seed;
  FirstOrderOracle oracle = blind_deconv_oracle(inst);
  inst.lipschitz_box_estimate = box_lipschitz(oracle, seed);
  return {std::move(inst), std::move(oracle)};
}

double max_minorant_violation(const FirstOrderOracle& oracle, double m, RngStream& rng, int pairs,
                              double lo, double hi) {
  double worst = -std::numeric_limits<double>::infinity();
  for (int p = 0; p < pairs; ++p) {
    const Vector x = uniform_box_vector(rng, oracle.dimension(), lo, hi);
    const Vector y = uniform_box_vector(rng, oracle.dimension(), lo, hi);
    const Evaluation ex = oracle.evaluate(x);
    const double fy = oracle.evaluate(y).value;
    const Vector d = y - x;
    const double minorant = ex.value + ex.subgradient.dot(d) - 0.5 * m * d.squaredNorm();
    worst = std::max(worst, minorant - fy);
  }
  return worst;
}

// ---- instance files

namespace {

constexpr const char* kHeader = "wcprox-instance v1";

void put_row(std::ostream& out, const char* key, const Eigen::Ref<const Vector>& row) {
  out << key;
  for (Index i = 0; i < row.size(); ++i) out << ' ' << row[i];
  out << '\n';
}

void put_rows(std::ostream& out, const char* key, const Matrix& a) {
  for (Index i = 0; i < a.rows(); ++i) put_row(out, key, a.row(i).transpose());
}

class Reader {
 public:
  explicit Reader(std::istream& in) : in_(in) {}

  std::istringstream line(const std::string& key) {
    std::string text;
    while (std::getline(in_, text)) {
      ++lineno_;
      if (!text.empty() && text.find_first_not_of(" \t\r") != std::string::npos) break;
      text.clear();
    }
    if (text.empty()) fail("unexpected end of file, expected '" + key + "'");
    std::istringstream ss(text);
    std::string got;
    ss >> got;
    if (got != key) fail("expected '" + key + "', found '" + got + "'");
    return ss;
  }

  template <typename T>
  T scalar(const std::string& key) {
    auto ss = line(key);
    T value{};
    if (!(ss >> value)) fail("bad value for '" + key + "'");
    return value;
  }

  Vector vector(const std::string& key, Index size) {
    auto ss = line(key);
    Vector v(size);
    for (Index i = 0; i < size; ++i) {
      std::string tok;
      if (!(ss >> tok)) fail("'" + key + "' has too few entries");
      try {
        std::size_t used = 0;
        v[i] = std::stod(tok, &used);
        if (used != tok.size()) throw std::invalid_argument(tok);
      } catch (const std::exception&) {
        fail("'" + key + "' has a non-numeric entry '" + tok + "'");
      }
    }
    std::string extra;
    if (ss >> extra) fail("'" + key + "' has too many entries");
    return v;
  }

  Matrix rows(const std::string& key, Index n, Index d) {
    Matrix a(n, d);
    for (Index i = 0; i < n; ++i) a.row(i) = vector(key, d).transpose();
    return a;
  }

  void header(const std::string& family) {
    std::string text;
    if (!std::getline(in_, text)) fail("empty instance file");
    ++lineno_;
    if (!text.empty() && text.back() == '\r') text.pop_back();
    if (text != kHeader) fail("not an instance file (bad header)");
    const auto got = scalar<std::string>("family");
    if (got != family) fail("instance family is '" + got + "', expected '" + family + "'");
  }

  [[noreturn]] void fail(const std::string& what) {
    throw std::runtime_error("instance file line " + std::to_string(lineno_) + ": " + what);
  }

 private:
  std::istream& in_;
  int lineno_ = 0;
};

void check_m(Reader& r, double stored, double recomputed) {
  if (std::abs(stored - recomputed) > 1e-12 * std::max(1.0, std::abs(recomputed))) {
    r.fail("stored m does not match the data");
  }
}

}  // namespace

void write_instance(std::ostream& out, const PhaseRetrievalInstance& inst) {
  const auto old = out.precision(17);
  out << kHeader << '\n'
      << "family phase_retrieval\n"
      << "d " << inst.dimension() << '\n'
      << "n " << inst.measurements() << '\n'
      << "seed " << inst.seed << '\n'
      << "m " << inst.m << '\n'
      << "lipschitz_box_estimate " << inst.lipschitz_box_estimate << '\n';
  put_row(out, "ground_truth", inst.ground_truth);
  put_rows(out, "a", inst.a);
  put_row(out, "b", inst.b);
  out << "end\n";
  out.precision(old);
}

void write_instance(std::ostream& out, const BlindDeconvInstance& inst) {
  const auto old = out.precision(17);
  out << kHeader << '\n'
      << "family blind_deconv\n"
      << "d " << inst.signal_dimension() << '\n'
      << "n " << inst.measurements() << '\n'
      << "seed " << inst.seed << '\n'
      << "m " << inst.m << '\n'
      << "lipschitz_box_estimate " << inst.lipschitz_box_estimate << '\n';
  put_row(out, "ground_truth_x", inst.ground_truth_x);
  put_row(out, "ground_truth_y", inst.ground_truth_y);
  put_rows(out, "u", inst.u);
  put_rows(out, "v", inst.v);
  put_row(out, "b", inst.b);
  out << "end\n";
  out.precision(old);
}

PhaseRetrievalInstance read_phase_retrieval(std::istream& in) {
  Reader r(in);
  r.header("phase_retrieval");
  const auto d = r.scalar<Index>("d");
  const auto n = r.scalar<Index>("n");
  if (d < 1 || n < 1) r.fail("d and n must be >= 1");
  const auto seed = r.scalar<std::uint64_t>("seed");
  const auto m = r.scalar<double>("m");
  const auto lip = r.scalar<double>("lipschitz_box_estimate");
  const Vector truth = r.vector("ground_truth", d);
  const Matrix a = r.rows("a", n, d);
  const Vector b = r.vector("b", n);
  r.line("end");
  PhaseRetrievalInstance inst = phase_retrieval_instance(a, b, truth);
  check_m(r, m, inst.m);
  inst.seed = seed;
  inst.lipschitz_box_estimate = lip;
  return inst;
}

BlindDeconvInstance read_blind_deconv(std::istream& in) {
  Reader r(in);
  r.header("blind_deconv");
  const auto d = r.scalar<Index>("d");
  const auto n = r.scalar<Index>("n");
  if (d < 1 || n < 1) r.fail("d and n must be >= 1");
  const auto seed = r.scalar<std::uint64_t>("seed");
  const auto m = r.scalar<double>("m");
  const auto lip = r.scalar<double>("lipschitz_box_estimate");
  const Vector x_bar = r.vector("ground_truth_x", d);
  const Vector y_bar = r.vector("ground_truth_y", d);
  const Matrix u = r.rows("u", n, d);
  const Matrix v = r.rows("v", n, d);
  const Vector b = r.vector("b", n);
  r.line("end");
  BlindDeconvInstance inst = blind_deconv_instance(u, v, b, x_bar, y_bar);
  check_m(r, m, inst.m);
  inst.seed = seed;
  inst.lipschitz_box_estimate = lip;
  return inst;
}

std::string peek_instance_family(std::istream& in) {
  const auto start = in.tellg();
  std::string header, family_line;
  std::getline(in, header);
  std::getline(in, family_line);
  in.clear();
  in.seekg(start);
  if (!header.empty() && header.back() == '\r') header.pop_back();
  if (header != kHeader) throw std::runtime_error("not an instance file (bad header)");
  std::istringstream ss(family_line);
  std::string key, family;
  ss >> key >> family;
  if (key != "family" || family.empty()) throw std::runtime_error("instance file lacks a family line");
  return family;
}

}  // namespace wcprox
