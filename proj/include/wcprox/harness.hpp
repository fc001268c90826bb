#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "wcprox/baselines.hpp"
#include "wcprox/core.hpp"
#include "wcprox/problems.hpp"
#include "wcprox/prox_descent.hpp"

namespace wcprox {

/// Starting point: a fixed vector, a constant fill, or a seeded Gaussian draw.
struct StartSpec {
  enum class Kind { constant, vector, gaussian };
  Kind kind = Kind::gaussian;
  double value = 1.0;
  Vector point;
  double scale = 1.0;  // gaussian draws are multiplied by this
};

struct ProblemSpec {
  std::string family = "toy";   // toy | phase_retrieval | blind_deconv | instance
  ToyKind toy = ToyKind::abs;
  double mu = 1.0;              // toy quadratic
  Index d = 1;                  // toy dimension, or signal dimension
  Index n = 1;
  std::uint64_t seed = 0;
  std::string instance_path;    // family == instance
  std::optional<StartSpec> x1;  // default: gaussian for generated problems, 2 fill for toys
};

struct AlgorithmSpec {
  std::string name = "prox_descent";  // prox_descent | subgradient | ppm | pgsg
  ProxDescentConfig prox_descent;
  // subgradient
  std::string schedule = "constant";  // constant | horizon_constant
  double step = 1e-3;
  std::optional<double> delta;        // horizon_constant; default f(x1) - f* when f* is known
  std::optional<double> lipschitz;    // horizon_constant; default the oracle's L
  std::optional<std::int64_t> T;      // subgradient, ppm, pgsg
  // ppm
  std::optional<double> alpha;        // default m + 1
  double inner_tol = 1e-10;
  std::int64_t max_inner = 1000000;
  // pgsg (rho shared with prox_descent.rho)
  std::int64_t J = 100;
  bool pgsg_paper_sign = false;
  /// Scale of the proxy column for the subgradient method: (rho + m)^2 with this rho.
  double proxy_rho = 1.0;
};

struct OutputSpec {
  std::string directory = "wcprox_out";
  std::string experiment_id = "experiment";
  bool write_iterates = true;
};

struct SweepSpec {
  std::vector<double> beta;
  std::vector<double> rho;
  int threads = 0;  // 0: hardware concurrency
};

struct CompareSpec {
  std::vector<std::pair<std::int64_t, std::int64_t>> splits;  // (T, J)
  std::optional<double> pgsg_rho;                              // default prox_descent.rho
};

struct CertifySpec {
  int max_checks = 50;
  double tol = 1e-12;  // reference gap; solves also stop once the check is decided
  std::int64_t max_inner = 1000000;
};

struct ExperimentConfig {
  ProblemSpec problem;
  AlgorithmSpec algorithm;
  std::int64_t budget = 100000;  // total oracle calls
  OutputSpec output;
  SweepSpec sweep;
  CompareSpec compare;
  CertifySpec certify;
};

/// Errors in config files, missing keys, bad values: messages carry the key path.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

ExperimentConfig parse_config(const std::string& json_text);
ExperimentConfig load_config(const std::filesystem::path& path);
/// Output directory: $WCPROX_OUTPUT_DIR if set and non-empty, else the config's.
std::filesystem::path output_directory(const ExperimentConfig& config);

struct Problem {
  FirstOrderOracle oracle;
  Vector x1;
  std::optional<ToyFunction> toy;
  std::string description;
};

Problem build_problem(const ProblemSpec& spec);

/// One line of the trace CSV. Fields that do not apply are NaN / -1 and
/// are written empty.
struct TraceRow {
  std::string experiment_id;
  std::string algorithm;
  std::int64_t outer_index = 0;
  std::int64_t cumulative_evaluations = 0;
  double f_value = 0.0;
  double gtilde_norm_sq = 0.0;
  double epsilon = 0.0;
  std::int64_t inner_count = -1;
  double stationarity_proxy = 0.0;
  double wall_time_ms = 0.0;
};

const std::string& trace_header();
void write_trace(std::ostream& out, const std::vector<TraceRow>& rows);
/// Throws std::runtime_error on a header mismatch or malformed line.
std::vector<TraceRow> read_trace(std::istream& in);

struct RunOutcome {
  std::string experiment_id;
  std::string algorithm;
  std::filesystem::path trace_path;
  std::filesystem::path iterates_path;  // empty when not written
  std::vector<TraceRow> rows;
  std::string termination;
  bool ok = true;                       // false on any error state
  std::string diagnostic;
  std::optional<std::int64_t> certified_index;  // trace outer_index
  std::int64_t total_evaluations = 0;
  double min_stationarity_proxy = 0.0;
};

/// Runs one algorithm on one problem and writes <id>.csv (and <id>.iterates.csv)
/// into the output directory. Throws ConfigError / std::runtime_error for bad
/// configs or I/O failures; algorithm error states come back with ok = false.
RunOutcome run_experiment(const ExperimentConfig& config);

struct SweepCell {
  double beta = 0.0;
  double rho = 0.0;
  RunOutcome outcome;
  double final_gtilde_norm_sq = 0.0;
  double final_epsilon = 0.0;
  double min_gtilde_norm_sq = 0.0;
  double min_epsilon = 0.0;
};

struct SweepResult {
  std::filesystem::path directory;
  std::filesystem::path summary_path;
  std::vector<SweepCell> cells;  // beta-major order
};

/// prox_descent over the beta x rho grid, cells in parallel.
SweepResult sweep(const ExperimentConfig& base, const std::vector<double>& beta_grid,
                  const std::vector<double>& rho_grid);

struct CompareRow {
  std::string algorithm;
  std::string label;
  std::int64_t outer_iterations = 0;
  std::optional<std::int64_t> inner_iterations;  // empty: dynamic
  std::int64_t total_iterations = 0;
  double stationarity = 0.0;
  RunOutcome outcome;
};

struct CompareResult {
  std::filesystem::path table_path;
  std::vector<CompareRow> rows;  // prox_descent first, then one per split
};

/// prox_descent and PGSG splits under the same total budget.
CompareResult compare(const ExperimentConfig& config);
/// Table with Outer Iter. / Inner Iter. / Total Iter. / Stationarity rows.
void print_compare_table(std::ostream& out, const CompareResult& result);

struct CertifyCheck {
  std::int64_t outer_index = 0;
  double gtilde_norm = 0.0;
  double epsilon = 0.0;
  double bound = 0.0;                // is_to_ms_bound with lambda = rho
  double moreau_gradient_norm = 0.0;  // estimate from the reference solve
  double solver_error = 0.0;          // |estimate - true norm| <= solver_error
  bool satisfied = false;
};

struct CertifyReport {
  std::string experiment_id;
  double m = 0.0;
  double rho = 0.0;
  std::vector<CertifyCheck> checks;
  std::optional<std::int64_t> certified_index;
  bool all_satisfied = true;
  std::filesystem::path report_path;
};

/// Recomputes reference Moreau gradients at trace iterates and checks the
/// emitted (eta, eps) against the conversion bound. Needs the iterates file
/// next to the trace. Throws std::runtime_error on an empty trace, a trace
/// without certificates, or missing iterates.
CertifyReport certify(const std::filesystem::path& trace_path, const ExperimentConfig& config);

}  // namespace wcprox
