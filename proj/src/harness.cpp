#include "wcprox/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <memory>
#include <set>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "wcprox/stationarity.hpp"

namespace wcprox {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// ---- config parsing

class Section {
 public:
  Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(where() + " must be an object");
  }

  bool has(const std::string& key) {
    used_.insert(key);
    return j_.contains(key) && !j_.at(key).is_null();
  }

  const json& raw(const std::string& key) {
    used_.insert(key);
    return j_.at(key);
  }

  double number(const std::string& key, double fallback) {
    if (!has(key)) return fallback;
    const json& v = j_.at(key);
    if (!v.is_number()) throw ConfigError(where(key) + " must be a number");
    return v.get<double>();
  }

  std::int64_t integer(const std::string& key, std::int64_t fallback) {
    if (!has(key)) return fallback;
    return as_integer(j_.at(key), where(key));
  }

  std::string string(const std::string& key, const std::string& fallback) {
    if (!has(key)) return fallback;
    const json& v = j_.at(key);
    if (!v.is_string()) throw ConfigError(where(key) + " must be a string");
    return v.get<std::string>();
  }

  bool boolean(const std::string& key, bool fallback) {
    if (!has(key)) return fallback;
    const json& v = j_.at(key);
    if (!v.is_boolean()) throw ConfigError(where(key) + " must be true or false");
    return v.get<bool>();
  }

  std::vector<double> numbers(const std::string& key) {
    if (!has(key)) return {};
    const json& v = j_.at(key);
    if (!v.is_array()) throw ConfigError(where(key) + " must be an array of numbers");
    std::vector<double> out;
    for (const auto& e : v) {
      if (!e.is_number()) throw ConfigError(where(key) + " must be an array of numbers");
      out.push_back(e.get<double>());
    }
    return out;
  }

  Section child(const std::string& key) {
    used_.insert(key);
    return Section(j_.at(key), where(key));
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!used_.count(it.key())) throw ConfigError("unknown key " + where(it.key()));
    }
  }

  std::string where(const std::string& key = "") const {
    if (key.empty()) return path_.empty() ? "config" : path_;
    return path_.empty() ? key : path_ + "." + key;
  }

  static std::int64_t as_integer(const json& v, const std::string& where) {
    if (v.is_number_integer()) return v.get<std::int64_t>();
    if (v.is_number_float()) {
      const double d = v.get<double>();
      if (std::isfinite(d) && d == std::floor(d) && std::abs(d) < 9.0e15) {
        return static_cast<std::int64_t>(d);
      }
    }
    throw ConfigError(where + " must be an integer");
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> used_;
};

StartSpec parse_start(const json& v, const std::string& where) {
  StartSpec s;
  if (v.is_number()) {
    s.kind = StartSpec::Kind::constant;
    s.value = v.get<double>();
  } else if (v.is_string()) {
    if (v.get<std::string>() != "gaussian") {
      throw ConfigError(where + " must be a number, an array, \"gaussian\" or {\"gaussian\": scale}");
    }
    s.kind = StartSpec::Kind::gaussian;
  } else if (v.is_array()) {
    s.kind = StartSpec::Kind::vector;
    s.point.resize(static_cast<Index>(v.size()));
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!v[i].is_number()) throw ConfigError(where + " must contain numbers only");
      s.point[static_cast<Index>(i)] = v[i].get<double>();
    }
  } else if (v.is_object()) {
    Section sec(v, where);
    s.kind = StartSpec::Kind::gaussian;
    s.scale = sec.number("gaussian", 1.0);
    sec.finish();
  } else {
    throw ConfigError(where + " must be a number, an array, \"gaussian\" or {\"gaussian\": scale}");
  }
  return s;
}

void validate(const ExperimentConfig& c) {
  const auto& p = c.problem;
  if (p.family != "toy" && p.family != "phase_retrieval" && p.family != "blind_deconv" &&
      p.family != "instance") {
    throw ConfigError("problem.family must be toy, phase_retrieval, blind_deconv or instance");
  }
  if (p.d < 1) throw ConfigError("problem.d must be >= 1");
  if (p.n < 1) throw ConfigError("problem.n must be >= 1");
  if (p.family == "instance" && p.instance_path.empty()) throw ConfigError("problem.path is required for family instance");
  if (c.budget < 1) throw ConfigError("budget.total_evaluations must be >= 1");
  const auto& a = c.algorithm;
  if (a.name != "prox_descent" && a.name != "subgradient" && a.name != "ppm" && a.name != "pgsg") {
    throw ConfigError("algorithm.name must be prox_descent, subgradient, ppm or pgsg");
  }
  try {
    a.prox_descent.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("algorithm: ") + e.what());
  }
  if (a.schedule != "constant" && a.schedule != "horizon_constant") {
    throw ConfigError("algorithm.schedule must be constant or horizon_constant");
  }
  if (!(a.step > 0.0)) throw ConfigError("algorithm.step must be positive");
  if (a.T && *a.T < 1) throw ConfigError("algorithm.T must be >= 1");
  if (a.J < 1) throw ConfigError("algorithm.J must be >= 1");
  if (!(a.inner_tol > 0.0)) throw ConfigError("algorithm.inner_tol must be positive");
  if (a.max_inner < 1) throw ConfigError("algorithm.max_inner must be >= 1");
  if (!(a.proxy_rho >= 0.0)) throw ConfigError("algorithm.proxy_rho must be >= 0");
  if (c.output.experiment_id.empty() ||
      c.output.experiment_id.find_first_of("/\\,") != std::string::npos) {
    throw ConfigError("output.experiment_id must be non-empty and contain no '/', '\\' or ','");
  }
  for (const auto& [T, J] : c.compare.splits) {
    if (T < 1 || J < 1) throw ConfigError("compare.splits entries must be [T, J] with T, J >= 1");
  }
  if (c.compare.pgsg_rho && !(*c.compare.pgsg_rho > 0.0)) throw ConfigError("compare.pgsg_rho must be positive");
  if (c.sweep.threads < 0) throw ConfigError("sweep.threads must be >= 0");
  if (c.certify.max_checks < 1) throw ConfigError("certify.max_checks must be >= 1");
  if (!(c.certify.tol > 0.0)) throw ConfigError("certify.tol must be positive");
  if (c.certify.max_inner < 1) throw ConfigError("certify.max_inner must be >= 1");
}

// ---- formatting

std::string fmt_double(double v) {
  if (std::isnan(v)) return "";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string fmt_short(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

std::string fmt_ms(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  return buf;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (ch != '\r') {
      cur.push_back(ch);
    }
  }
  out.push_back(cur);
  return out;
}

double parse_double_field(const std::string& s, int lineno) {
  if (s.empty()) return kNaN;
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used == s.size()) return v;
  } catch (const std::exception&) {
  }
  throw std::runtime_error("trace line " + std::to_string(lineno) + ": bad number '" + s + "'");
}

std::int64_t parse_int_field(const std::string& s, int lineno, std::int64_t empty_value) {
  if (s.empty()) return empty_value;
  try {
    std::size_t used = 0;
    const long long v = std::stoll(s, &used);
    if (used == s.size()) return v;
  } catch (const std::exception&) {
  }
  throw std::runtime_error("trace line " + std::to_string(lineno) + ": bad integer '" + s + "'");
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

// ---- timing wrapper: stamps[i] is the time of oracle call i + 1

struct Clock {
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
  std::shared_ptr<std::vector<std::chrono::steady_clock::time_point>> stamps =
      std::make_shared<std::vector<std::chrono::steady_clock::time_point>>();

  double ms_at(std::int64_t evaluations) const {
    if (evaluations < 1 || stamps->empty()) return 0.0;
    const auto idx = static_cast<std::size_t>(std::min<std::int64_t>(evaluations, stamps->size()) - 1);
    return std::chrono::duration<double, std::milli>((*stamps)[idx] - start).count();
  }
};

FirstOrderOracle timed(const FirstOrderOracle& inner, const Clock& clock) {
  auto stamps = clock.stamps;
  return FirstOrderOracle(
      inner.dimension(), inner.constants(),
      [inner, stamps](const Vector& x) {
        Evaluation e = inner.evaluate(x);
        stamps->push_back(std::chrono::steady_clock::now());
        return e;
      },
      inner.name());
}

void write_iterates(const fs::path& path, const std::vector<std::pair<std::int64_t, Vector>>& pts) {
  std::ofstream out = open_out(path);
  out << "outer_index";
  const Index d = pts.empty() ? 0 : pts.front().second.size();
  for (Index i = 0; i < d; ++i) out << ",x" << i;
  out << '\n';
  for (const auto& [k, x] : pts) {
    out << k;
    for (Index i = 0; i < x.size(); ++i) out << ',' << fmt_double(x[i]);
    out << '\n';
  }
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

std::map<std::int64_t, Vector> read_iterates(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("missing iterate data: " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("iterate file is empty: " + path.string());
  const auto header = split_csv(line);
  if (header.empty() || header[0] != "outer_index") throw std::runtime_error("bad iterate file header: " + path.string());
  const Index d = static_cast<Index>(header.size()) - 1;
  std::map<std::int64_t, Vector> out;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto f = split_csv(line);
    if (static_cast<Index>(f.size()) != d + 1) {
      throw std::runtime_error("iterate file line " + std::to_string(lineno) + ": wrong field count");
    }
    Vector x(d);
    for (Index i = 0; i < d; ++i) x[i] = parse_double_field(f[static_cast<std::size_t>(i + 1)], lineno);
    out[parse_int_field(f[0], lineno, 0)] = std::move(x);
  }
  return out;
}

fs::path iterates_path_for(const fs::path& trace) {
  fs::path p = trace;
  p.replace_extension(".iterates.csv");
  return p;
}

TraceRow base_row(const std::string& id, const std::string& algo) {
  TraceRow r;
  r.experiment_id = id;
  r.algorithm = algo;
  r.gtilde_norm_sq = kNaN;
  r.epsilon = kNaN;
  r.stationarity_proxy = kNaN;
  return r;
}

RunOutcome run_in(const ExperimentConfig& config, const fs::path& dir) {
  validate(config);
  const Problem problem = build_problem(config.problem);
  const Clock clock;
  const FirstOrderOracle oracle = timed(problem.oracle, clock);
  const double m = oracle.weak_convexity();
  const auto& a = config.algorithm;
  const std::string& id = config.output.experiment_id;

  RunOutcome out;
  out.experiment_id = id;
  out.algorithm = a.name;
  std::vector<std::pair<std::int64_t, Vector>> points;

  auto add_row = [&](TraceRow row) {
    row.wall_time_ms = clock.ms_at(row.cumulative_evaluations);
    out.rows.push_back(std::move(row));
  };

  auto baseline_rows = [&](const BaselineReport& rep) {
    for (const auto& rec : rep.iterates) {
      TraceRow row = base_row(id, a.name);
      row.outer_index = rec.k;
      row.cumulative_evaluations = rec.cumulative_evaluations;
      row.f_value = rec.f_value;
      row.inner_count = rec.inner_count;
      row.stationarity_proxy = rec.stationarity_proxy;
      add_row(row);
      points.emplace_back(rec.k, rec.point);
    }
    out.total_evaluations = rep.total_evaluations;
    out.termination = to_string(rep.termination);
    out.diagnostic = rep.diagnostic;
    out.ok = rep.termination == BaselineTermination::completed ||
             rep.termination == BaselineTermination::evaluation_budget;
  };

  if (a.name == "prox_descent") {
    ProxDescentConfig cfg = a.prox_descent;
    cfg.max_evaluations = config.budget;
    try {
      const SolveReport rep = run(oracle, problem.x1, cfg);
      TraceRow first = base_row(id, a.name);
      first.outer_index = 1;
      first.cumulative_evaluations = 1;
      first.f_value = rep.f_initial;
      first.inner_count = 0;
      add_row(first);
      points.emplace_back(1, rep.initial_point);
      for (const auto& rec : rep.iterates) {
        TraceRow row = base_row(id, a.name);
        row.outer_index = rec.k + 1;
        row.cumulative_evaluations = rec.cumulative_evaluations;
        row.f_value = rec.f_value;
        row.gtilde_norm_sq = rec.gtilde_norm_sq;
        row.epsilon = rec.epsilon;
        row.inner_count = rec.inner_iterations;
        row.stationarity_proxy = rep.alpha * rep.alpha * rec.step_norm_sq;
        add_row(row);
        points.emplace_back(rec.k + 1, rec.point);
      }
      out.total_evaluations = rep.total_evaluations;
      out.termination = to_string(rep.termination);
      out.diagnostic = rep.diagnostic;
      if (rep.certified_index) out.certified_index = *rep.certified_index + 1;
      out.ok = rep.termination != Termination::inner_budget_exhausted;
    } catch (const WeakConvexityViolation& e) {
      out.termination = "weak_convexity_violation";
      out.diagnostic = e.what();
      out.ok = false;
    }
  } else if (a.name == "subgradient") {
    const std::int64_t T = a.T.value_or(config.budget - 1);
    if (T < 1 || T + 1 > config.budget) {
      throw ConfigError("algorithm.T: the subgradient method needs T + 1 <= budget evaluations");
    }
    StepSchedule schedule = StepSchedule::constant(a.step);
    if (a.schedule == "horizon_constant") {
      double delta = 0.0;
      if (a.delta) {
        delta = *a.delta;
      } else if (oracle.constants().optimal_value) {
        delta = problem.oracle.evaluate(problem.x1).value - *oracle.constants().optimal_value;
      } else {
        throw ConfigError("algorithm.delta is required: f* of this problem is unknown");
      }
      const auto lip = a.lipschitz ? a.lipschitz : oracle.constants().lipschitz;
      if (!lip) throw ConfigError("algorithm.lipschitz is required: this problem declares no L");
      try {
        schedule = StepSchedule::horizon_constant(delta, m, *lip, T);
      } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("algorithm: ") + e.what());
      }
    }
    const double s = a.proxy_rho + m;
    baseline_rows(subgradient_method(oracle, problem.x1, schedule, T, s * s));
  } else if (a.name == "ppm") {
    const double alpha = a.alpha.value_or(m + 1.0);
    if (!(alpha > m)) throw ConfigError("algorithm.alpha must exceed the weak convexity m");
    PpmOptions po;
    po.inner_tol = a.inner_tol;
    po.max_inner = a.max_inner;
    po.max_evaluations = config.budget;
    baseline_rows(ppm(oracle, problem.x1, alpha, a.T.value_or(config.budget), po));
  } else {
    const std::int64_t J = a.J;
    const std::int64_t T = a.T.value_or(config.budget / J);
    if (T < 1 || T > config.budget / J) {
      throw ConfigError("algorithm: infeasible pgsg split, need 1 <= T and T * J <= budget");
    }
    PgsgOptions po;
    po.paper_sign = a.pgsg_paper_sign;
    baseline_rows(pgsg(oracle, problem.x1, a.prox_descent.rho, T, J, po));
  }

  out.min_stationarity_proxy = std::numeric_limits<double>::infinity();
  for (const auto& r : out.rows) {
    if (!std::isnan(r.stationarity_proxy)) {
      out.min_stationarity_proxy = std::min(out.min_stationarity_proxy, r.stationarity_proxy);
    }
  }

  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create output directory " + dir.string() + ": " + ec.message());
  out.trace_path = dir / (id + ".csv");
  {
    std::ofstream f = open_out(out.trace_path);
    write_trace(f, out.rows);
    if (!f) throw std::runtime_error("write failed: " + out.trace_path.string());
  }
  if (config.output.write_iterates) {
    out.iterates_path = iterates_path_for(out.trace_path);
    write_iterates(out.iterates_path, points);
  }
  return out;
}

}  // namespace

// ---- config

ExperimentConfig parse_config(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  ExperimentConfig c;
  Section top(root, "");

  if (!top.has("problem")) throw ConfigError("missing section 'problem'");
  {
    Section p = top.child("problem");
    auto& ps = c.problem;
    ps.family = p.string("family", ps.family);
    if (p.has("kind")) {
      try {
        ps.toy = parse_toy_kind(p.string("kind", ""));
      } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("problem.kind: ") + e.what());
      }
    } else if (ps.family == "toy") {
      throw ConfigError("problem.kind is required for family toy");
    }
    ps.mu = p.number("mu", ps.mu);
    ps.d = p.integer("d", ps.d);
    ps.n = p.integer("n", ps.n);
    const std::int64_t seed = p.integer("seed", 0);
    if (seed < 0) throw ConfigError("problem.seed must be >= 0");
    ps.seed = static_cast<std::uint64_t>(seed);
    ps.instance_path = p.string("path", "");
    if (p.has("x1")) ps.x1 = parse_start(p.raw("x1"), "problem.x1");
    p.finish();
  }
  if (top.has("algorithm")) {
    Section s = top.child("algorithm");
    auto& a = c.algorithm;
    auto& pd = a.prox_descent;
    a.name = s.string("name", a.name);
    pd.beta = s.number("beta", pd.beta);
    pd.rho = s.number("rho", pd.rho);
    pd.eta_target = s.number("eta_target", pd.eta_target);
    pd.eps_target = s.number("eps_target", pd.eps_target);
    pd.max_outer = s.integer("max_outer", pd.max_outer);
    pd.max_inner_per_step = s.integer("max_inner_per_step", pd.max_inner_per_step);
    pd.descent_test_slack = s.number("descent_test_slack", pd.descent_test_slack);
    pd.minorant_tolerance = s.number("minorant_tolerance", pd.minorant_tolerance);
    a.schedule = s.string("schedule", a.schedule);
    a.step = s.number("step", a.step);
    if (s.has("delta")) a.delta = s.number("delta", 0.0);
    if (s.has("lipschitz")) a.lipschitz = s.number("lipschitz", 0.0);
    if (s.has("T")) a.T = s.integer("T", 1);
    if (s.has("alpha")) a.alpha = s.number("alpha", 0.0);
    a.inner_tol = s.number("inner_tol", a.inner_tol);
    a.max_inner = s.integer("max_inner", a.max_inner);
    a.J = s.integer("J", a.J);
    a.pgsg_paper_sign = s.boolean("pgsg_paper_sign", a.pgsg_paper_sign);
    a.proxy_rho = s.number("proxy_rho", a.proxy_rho);
    s.finish();
  }
  if (top.has("budget")) {
    Section s = top.child("budget");
    c.budget = s.integer("total_evaluations", c.budget);
    s.finish();
  }
  if (top.has("output")) {
    Section s = top.child("output");
    c.output.directory = s.string("directory", c.output.directory);
    c.output.experiment_id = s.string("experiment_id", c.output.experiment_id);
    c.output.write_iterates = s.boolean("write_iterates", c.output.write_iterates);
    s.finish();
  }
  if (top.has("sweep")) {
    Section s = top.child("sweep");
    c.sweep.beta = s.numbers("beta");
    c.sweep.rho = s.numbers("rho");
    c.sweep.threads = static_cast<int>(s.integer("threads", 0));
    s.finish();
  }
  if (top.has("compare")) {
    Section s = top.child("compare");
    if (s.has("splits")) {
      const json& v = s.raw("splits");
      if (!v.is_array()) throw ConfigError("compare.splits must be an array of [T, J] pairs");
      for (const auto& e : v) {
        if (!e.is_array() || e.size() != 2) throw ConfigError("compare.splits must be an array of [T, J] pairs");
        c.compare.splits.emplace_back(Section::as_integer(e[0], "compare.splits"),
                                      Section::as_integer(e[1], "compare.splits"));
      }
    }
    if (s.has("pgsg_rho")) c.compare.pgsg_rho = s.number("pgsg_rho", 0.0);
    s.finish();
  }
  if (top.has("certify")) {
    Section s = top.child("certify");
    c.certify.max_checks = static_cast<int>(s.integer("max_checks", c.certify.max_checks));
    c.certify.tol = s.number("tol", c.certify.tol);
    c.certify.max_inner = s.integer("max_inner", c.certify.max_inner);
    s.finish();
  }
  top.finish();
  validate(c);
  return c;
}

ExperimentConfig load_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  ExperimentConfig c = parse_config(ss.str());
  if (!c.problem.instance_path.empty() && fs::path(c.problem.instance_path).is_relative()) {
    c.problem.instance_path = (path.parent_path() / c.problem.instance_path).string();
  }
  return c;
}

fs::path output_directory(const ExperimentConfig& config) {
  if (const char* env = std::getenv("WCPROX_OUTPUT_DIR"); env && *env) return fs::path(env);
  return fs::path(config.output.directory);
}

// ---- problems

Problem build_problem(const ProblemSpec& spec) {
  std::optional<ToyFunction> toy_fn;
  std::optional<FirstOrderOracle> oracle;
  std::string description;
  std::uint64_t seed = spec.seed;
  if (spec.family == "toy") {
    toy_fn = toy(spec.toy, spec.d, spec.mu);
    oracle = toy_fn->oracle;
    description = "toy " + to_string(spec.toy) + " (dimension " + std::to_string(spec.d) + ")";
  } else if (spec.family == "phase_retrieval") {
    auto [inst, o] = gen_phase_retrieval(spec.d, spec.n, spec.seed);
    oracle = std::move(o);
    description = "phase retrieval d=" + std::to_string(spec.d) + " n=" + std::to_string(spec.n) +
                  " seed=" + std::to_string(spec.seed);
  } else if (spec.family == "blind_deconv") {
    auto [inst, o] = gen_blind_deconv(spec.d, spec.n, spec.seed);
    oracle = std::move(o);
    description = "blind deconvolution d=" + std::to_string(spec.d) + " n=" + std::to_string(spec.n) +
                  " seed=" + std::to_string(spec.seed);
  } else if (spec.family == "instance") {
    std::ifstream in(spec.instance_path);
    if (!in) throw std::runtime_error("cannot read instance file " + spec.instance_path);
    const std::string family = peek_instance_family(in);
    if (family == "phase_retrieval") {
      const auto inst = read_phase_retrieval(in);
      seed = inst.seed;
      oracle = phase_retrieval_oracle(inst);
    } else if (family == "blind_deconv") {
      const auto inst = read_blind_deconv(in);
      seed = inst.seed;
      oracle = blind_deconv_oracle(inst);
    } else {
      throw std::runtime_error("instance file has unknown family '" + family + "'");
    }
    description = family + " instance from " + spec.instance_path;
  } else {
    throw ConfigError("problem.family must be toy, phase_retrieval, blind_deconv or instance");
  }

  const Index dim = oracle->dimension();
  StartSpec start;
  if (spec.x1) {
    start = *spec.x1;
  } else if (spec.family == "toy") {
    start.kind = StartSpec::Kind::constant;
    start.value = 2.0;
  }
  Vector x1;
  switch (start.kind) {
    case StartSpec::Kind::constant:
      x1 = Vector::Constant(dim, start.value);
      break;
    case StartSpec::Kind::vector:
      if (start.point.size() != dim) {
        throw ConfigError("problem.x1 has " + std::to_string(start.point.size()) +
                          " entries, the problem has dimension " + std::to_string(dim));
      }
      x1 = start.point;
      break;
    case StartSpec::Kind::gaussian: {
      RngStream rng = RngStream::derive(seed, 1);
      x1 = start.scale * standard_normal_vector(rng, dim);
      break;
    }
  }
  require_finite(x1, "problem.x1");
  return Problem{std::move(*oracle), std::move(x1), std::move(toy_fn), std::move(description)};
}

// ---- trace files

const std::string& trace_header() {
  static const std::string h =
      "experiment_id,algorithm,outer_index,cumulative_evaluations,f_value,gtilde_norm_sq,epsilon,"
      "inner_count,stationarity_proxy,wall_time_ms";
  return h;
}

void write_trace(std::ostream& out, const std::vector<TraceRow>& rows) {
  out << trace_header() << '\n';
  for (const auto& r : rows) {
    out << r.experiment_id << ',' << r.algorithm << ',' << r.outer_index << ','
        << r.cumulative_evaluations << ',' << fmt_double(r.f_value) << ',' << fmt_double(r.gtilde_norm_sq)
        << ',' << fmt_double(r.epsilon) << ',' << (r.inner_count >= 0 ? std::to_string(r.inner_count) : "")
        << ',' << fmt_double(r.stationarity_proxy) << ',' << fmt_ms(r.wall_time_ms) << '\n';
  }
}

std::vector<TraceRow> read_trace(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("trace is empty (no header)");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != trace_header()) throw std::runtime_error("trace header does not match the expected schema");
  std::vector<TraceRow> rows;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    const auto f = split_csv(line);
    if (f.size() != 10) throw std::runtime_error("trace line " + std::to_string(lineno) + ": expected 10 fields");
    TraceRow r;
    r.experiment_id = f[0];
    r.algorithm = f[1];
    r.outer_index = parse_int_field(f[2], lineno, 0);
    r.cumulative_evaluations = parse_int_field(f[3], lineno, 0);
    r.f_value = parse_double_field(f[4], lineno);
    r.gtilde_norm_sq = parse_double_field(f[5], lineno);
    r.epsilon = parse_double_field(f[6], lineno);
    r.inner_count = parse_int_field(f[7], lineno, -1);
    r.stationarity_proxy = parse_double_field(f[8], lineno);
    r.wall_time_ms = parse_double_field(f[9], lineno);
    rows.push_back(std::move(r));
  }
  return rows;
}

// ---- run / sweep / compare

RunOutcome run_experiment(const ExperimentConfig& config) {
  return run_in(config, output_directory(config));
}

SweepResult sweep(const ExperimentConfig& base, const std::vector<double>& beta_grid,
                  const std::vector<double>& rho_grid) {
  validate(base);
  if (beta_grid.empty() || rho_grid.empty()) throw ConfigError("sweep needs at least one beta and one rho");
  if (base.algorithm.name != "prox_descent") throw ConfigError("sweep runs prox_descent only (algorithm.name)");

  SweepResult res;
  res.directory = output_directory(base) / (base.output.experiment_id + "_sweep");
  std::vector<ExperimentConfig> configs;
  for (double beta : beta_grid) {
    for (double rho : rho_grid) {
      ExperimentConfig c = base;
      c.algorithm.prox_descent.beta = beta;
      c.algorithm.prox_descent.rho = rho;
      c.output.experiment_id = base.output.experiment_id + "_beta" + fmt_short(beta) + "_rho" + fmt_short(rho);
      validate(c);
      configs.push_back(std::move(c));
      SweepCell cell;
      cell.beta = beta;
      cell.rho = rho;
      res.cells.push_back(std::move(cell));
    }
  }

  unsigned threads = base.sweep.threads > 0 ? static_cast<unsigned>(base.sweep.threads)
                                            : std::max(1u, std::thread::hardware_concurrency());
  threads = std::min<unsigned>(threads, static_cast<unsigned>(configs.size()));
  std::vector<std::exception_ptr> errors(configs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (std::size_t i = next++; i < configs.size(); i = next++) {
      try {
        res.cells[i].outcome = run_in(configs[i], res.directory);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);

  for (auto& cell : res.cells) {
    cell.final_gtilde_norm_sq = cell.final_epsilon = kNaN;
    cell.min_gtilde_norm_sq = cell.min_epsilon = std::numeric_limits<double>::infinity();
    for (const auto& r : cell.outcome.rows) {
      if (std::isnan(r.gtilde_norm_sq)) continue;
      cell.final_gtilde_norm_sq = r.gtilde_norm_sq;
      cell.final_epsilon = r.epsilon;
      cell.min_gtilde_norm_sq = std::min(cell.min_gtilde_norm_sq, r.gtilde_norm_sq);
      cell.min_epsilon = std::min(cell.min_epsilon, r.epsilon);
    }
    if (std::isinf(cell.min_gtilde_norm_sq)) cell.min_gtilde_norm_sq = cell.min_epsilon = kNaN;
  }

  res.summary_path = res.directory / "summary.csv";
  std::ofstream out = open_out(res.summary_path);
  out << "experiment_id,beta,rho,termination,outer_steps,total_evaluations,final_gtilde_norm_sq,"
         "final_epsilon,min_gtilde_norm_sq,min_epsilon\n";
  for (const auto& cell : res.cells) {
    const std::int64_t steps = std::max<std::int64_t>(0, static_cast<std::int64_t>(cell.outcome.rows.size()) - 1);
    out << cell.outcome.experiment_id << ',' << fmt_double(cell.beta) << ',' << fmt_double(cell.rho) << ','
        << cell.outcome.termination << ',' << steps << ',' << cell.outcome.total_evaluations << ','
        << fmt_double(cell.final_gtilde_norm_sq) << ',' << fmt_double(cell.final_epsilon) << ','
        << fmt_double(cell.min_gtilde_norm_sq) << ',' << fmt_double(cell.min_epsilon) << '\n';
  }
  if (!out) throw std::runtime_error("write failed: " + res.summary_path.string());
  return res;
}

CompareResult compare(const ExperimentConfig& config) {
  validate(config);
  if (config.compare.splits.empty()) throw ConfigError("compare.splits must list at least one [T, J] pair");
  for (const auto& [T, J] : config.compare.splits) {
    if (T > config.budget / J) {
      throw ConfigError("infeasible split [" + std::to_string(T) + ", " + std::to_string(J) +
                        "]: T * J exceeds the budget of " + std::to_string(config.budget));
    }
  }
  const fs::path dir = output_directory(config) / (config.output.experiment_id + "_compare");
  CompareResult res;

  ExperimentConfig pd = config;
  pd.algorithm.name = "prox_descent";
  pd.output.experiment_id = config.output.experiment_id + "_prox_descent";
  {
    CompareRow row;
    row.algorithm = "prox_descent";
    row.label = "prox_descent";
    row.outcome = run_in(pd, dir);
    row.outer_iterations = std::max<std::int64_t>(0, static_cast<std::int64_t>(row.outcome.rows.size()) - 1);
    row.total_iterations = row.outcome.total_evaluations;
    row.stationarity = row.outcome.min_stationarity_proxy;
    res.rows.push_back(std::move(row));
  }
  for (const auto& [T, J] : config.compare.splits) {
    ExperimentConfig c = config;
    c.algorithm.name = "pgsg";
    c.algorithm.T = T;
    c.algorithm.J = J;
    c.algorithm.prox_descent.rho = config.compare.pgsg_rho.value_or(config.algorithm.prox_descent.rho);
    const std::string label = "pgsg_T" + std::to_string(T) + "_J" + std::to_string(J);
    c.output.experiment_id = config.output.experiment_id + "_" + label;
    CompareRow row;
    row.algorithm = "pgsg";
    row.label = label;
    row.outcome = run_in(c, dir);
    row.outer_iterations = static_cast<std::int64_t>(row.outcome.rows.size());
    row.inner_iterations = J;
    row.total_iterations = row.outcome.total_evaluations;
    row.stationarity = row.outcome.min_stationarity_proxy;
    res.rows.push_back(std::move(row));
  }

  res.table_path = dir / "compare.csv";
  std::ofstream out = open_out(res.table_path);
  out << "experiment_id,algorithm,label,outer_iterations,inner_iterations,total_iterations,stationarity,termination\n";
  for (const auto& r : res.rows) {
    out << r.outcome.experiment_id << ',' << r.algorithm << ',' << r.label << ',' << r.outer_iterations << ','
        << (r.inner_iterations ? std::to_string(*r.inner_iterations) : "") << ',' << r.total_iterations << ','
        << fmt_double(r.stationarity) << ',' << r.outcome.termination << '\n';
  }
  if (!out) throw std::runtime_error("write failed: " + res.table_path.string());
  return res;
}

void print_compare_table(std::ostream& out, const CompareResult& result) {
  const int first = 14, width = 20;
  out << std::left << std::setw(first) << "";
  for (const auto& r : result.rows) out << std::right << std::setw(width) << r.label;
  out << '\n';
  auto line = [&](const char* name, auto cell) {
    out << std::left << std::setw(first) << name;
    for (const auto& r : result.rows) out << std::right << std::setw(width) << cell(r);
    out << '\n';
  };
  line("Outer Iter.", [](const CompareRow& r) { return std::to_string(r.outer_iterations); });
  line("Inner Iter.", [](const CompareRow& r) {
    return r.inner_iterations ? std::to_string(*r.inner_iterations) : std::string("dynamic");
  });
  line("Total Iter.", [](const CompareRow& r) { return std::to_string(r.total_iterations); });
  line("Stationarity", [](const CompareRow& r) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3e", r.stationarity);
    return std::string(buf);
  });
}

// ---- certify

CertifyReport certify(const fs::path& trace_path, const ExperimentConfig& config) {
  validate(config);
  std::ifstream in(trace_path);
  if (!in) throw std::runtime_error("cannot read trace " + trace_path.string());
  const std::vector<TraceRow> rows = read_trace(in);
  if (rows.empty()) throw std::runtime_error("trace " + trace_path.string() + " is empty");

  std::vector<const TraceRow*> certified_rows;
  for (const auto& r : rows)
    if (!std::isnan(r.gtilde_norm_sq) && !std::isnan(r.epsilon)) certified_rows.push_back(&r);
  if (certified_rows.empty()) {
    throw std::runtime_error("trace " + trace_path.string() + " carries no (eta, eps) certificates");
  }
  const auto points = read_iterates(iterates_path_for(trace_path));
  auto point_at = [&](std::int64_t k) -> const Vector& {
    const auto it = points.find(k);
    if (it == points.end()) throw std::runtime_error("missing iterate data for outer_index " + std::to_string(k));
    return it->second;
  };

  const Problem problem = build_problem(config.problem);
  const double m = problem.oracle.weak_convexity();

  CertifyReport rep;
  rep.experiment_id = rows.front().experiment_id;
  rep.m = m;
  // alpha = ||gtilde|| / ||x_{k+1} - x_k||, read back from the data
  double alpha = m + config.algorithm.prox_descent.rho;
  for (const TraceRow* r : certified_rows) {
    const auto prev = points.find(r->outer_index - 1);
    const auto cur = points.find(r->outer_index);
    if (prev == points.end() || cur == points.end()) continue;
    const double step = (cur->second - prev->second).norm();
    if (step > 1e-8 && r->gtilde_norm_sq > 0.0) {
      alpha = std::sqrt(r->gtilde_norm_sq) / step;
      break;
    }
  }
  if (!(alpha > m)) throw std::runtime_error("certify: trace implies alpha <= m, wrong problem config?");
  rep.rho = alpha - m;

  const auto& pd = config.algorithm.prox_descent;
  for (const TraceRow* r : certified_rows) {
    if (std::sqrt(r->gtilde_norm_sq) <= pd.eta_target && r->epsilon <= pd.eps_target) {
      rep.certified_index = r->outer_index;
      break;
    }
  }

  std::set<std::size_t> pick;
  const std::size_t count = certified_rows.size();
  const std::size_t limit = static_cast<std::size_t>(config.certify.max_checks);
  if (count <= limit) {
    for (std::size_t i = 0; i < count; ++i) pick.insert(i);
  } else {
    for (std::size_t i = 0; i < limit; ++i) pick.insert(i * (count - 1) / (limit - 1 == 0 ? 1 : limit - 1));
  }
  if (rep.certified_index) {
    for (std::size_t i = 0; i < count; ++i)
      if (certified_rows[i]->outer_index == *rep.certified_index) pick.insert(i);
  }

  for (std::size_t i : pick) {
    const TraceRow& r = *certified_rows[i];
    CertifyCheck c;
    c.outer_index = r.outer_index;
    c.gtilde_norm = std::sqrt(r.gtilde_norm_sq);
    c.epsilon = std::max(r.epsilon, 0.0);
    c.bound = is_to_ms_bound(c.gtilde_norm, c.epsilon, m, rep.rho);
    const double slack = 1e-9 * std::max(1.0, c.bound);
    MoreauOptions mo;
    mo.tol = config.certify.tol;
    mo.relative_floor = 1e-14;
    mo.max_iterations = config.certify.max_inner;
    // stop once the sandwich decides the check, with the estimate within 10% of the bound
    mo.stop_when = [&](const MoreauResult& partial) {
      const double est = partial.gradient.norm();
      const double err = partial.gradient_error(alpha, m);
      return (est + err <= c.bound + slack && err <= 0.1 * c.bound) || est - err > c.bound + slack;
    };
    const MoreauResult ref = moreau_reference(problem.oracle, point_at(r.outer_index), alpha, mo);
    c.moreau_gradient_norm = ref.gradient.norm();
    c.solver_error = ref.gradient_error(alpha, m);
    c.satisfied = c.moreau_gradient_norm <= c.bound + c.solver_error + slack;
    rep.all_satisfied = rep.all_satisfied && c.satisfied;
    rep.checks.push_back(c);
  }

  json j;
  j["experiment_id"] = rep.experiment_id;
  j["trace"] = trace_path.string();
  j["m"] = rep.m;
  j["rho"] = rep.rho;
  j["certified_index"] = rep.certified_index ? json(*rep.certified_index) : json(nullptr);
  j["all_satisfied"] = rep.all_satisfied;
  j["checks"] = json::array();
  for (const auto& c : rep.checks) {
    j["checks"].push_back({{"outer_index", c.outer_index},
                           {"gtilde_norm", c.gtilde_norm},
                           {"epsilon", c.epsilon},
                           {"bound", c.bound},
                           {"moreau_gradient_norm", c.moreau_gradient_norm},
                           {"solver_error", c.solver_error},
                           {"satisfied", c.satisfied}});
  }
  const fs::path dir = output_directory(config);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create output directory " + dir.string() + ": " + ec.message());
  rep.report_path = dir / (rep.experiment_id + ".certificate.json");
  std::ofstream out = open_out(rep.report_path);
  out << std::setw(2) << j << '\n';
  if (!out) throw std::runtime_error("write failed: " + rep.report_path.string());
  return rep;
}

}  // namespace wcprox
