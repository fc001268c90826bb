// wcprox: run, sweep, compare and certify experiments from JSON configs.
//
// Exit status: 0 success, 1 the algorithm ended in an error state (inner
// budget exhausted, weak-convexity violation, divergence, failed
// certificate), 2 bad usage or config, 3 I/O or other runtime failure.

#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "wcprox/harness.hpp"

namespace {

constexpr int kAlgorithmError = 1;
constexpr int kConfigError = 2;
constexpr int kRuntimeError = 3;

int report_run(const wcprox::RunOutcome& r) {
  std::cout << r.experiment_id << ": " << r.algorithm << " " << r.termination << ", "
            << r.rows.size() << " rows, " << r.total_evaluations << " evaluations\n"
            << "  trace: " << r.trace_path.string() << "\n";
  if (!r.iterates_path.empty()) std::cout << "  iterates: " << r.iterates_path.string() << "\n";
  if (r.certified_index) std::cout << "  certified at outer_index " << *r.certified_index << "\n";
  if (!r.ok) {
    std::cerr << "error: " << r.experiment_id << " ended in state " << r.termination;
    if (!r.diagnostic.empty()) std::cerr << ": " << r.diagnostic;
    std::cerr << "\n";
    return kAlgorithmError;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Proximal descent for weakly convex minimization: experiments and certificates"};
  app.require_subcommand(1);
  app.footer("Set WCPROX_OUTPUT_DIR to override output.directory from the config.");

  std::string config_path, trace_path;
  std::vector<double> betas, rhos;

  auto* run = app.add_subcommand("run", "Run one experiment and write its trace");
  run->add_option("config", config_path, "JSON config file")->required();

  auto* sw = app.add_subcommand("sweep", "prox_descent over a beta x rho grid");
  sw->add_option("config", config_path, "JSON config file")->required();
  sw->add_option("--beta", betas, "beta values (default: sweep.beta from the config)");
  sw->add_option("--rho", rhos, "rho values (default: sweep.rho from the config)");

  auto* cmp = app.add_subcommand("compare", "prox_descent against PGSG splits under one budget");
  cmp->add_option("config", config_path, "JSON config file")->required();

  auto* cert = app.add_subcommand("certify", "Cross-check a trace's certificates against reference Moreau gradients");
  cert->add_option("trace", trace_path, "trace CSV written by run or sweep")->required();
  cert->add_option("config", config_path, "config of the run that produced the trace")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kConfigError;
  }

  try {
    const wcprox::ExperimentConfig config = wcprox::load_config(config_path);

    if (*run) return report_run(wcprox::run_experiment(config));

    if (*sw) {
      if (betas.empty()) betas = config.sweep.beta;
      if (rhos.empty()) rhos = config.sweep.rho;
      const auto res = wcprox::sweep(config, betas, rhos);
      int status = 0;
      for (const auto& cell : res.cells) {
        std::printf("beta=%-6g rho=%-6g %-22s final |g|^2=%.3e eps=%.3e\n", cell.beta, cell.rho,
                    cell.outcome.termination.c_str(), cell.final_gtilde_norm_sq, cell.final_epsilon);
        if (!cell.outcome.ok) {
          std::cerr << "error: " << cell.outcome.experiment_id << " ended in state " << cell.outcome.termination
                    << ": " << cell.outcome.diagnostic << "\n";
          status = kAlgorithmError;
        }
      }
      std::cout << "summary: " << res.summary_path.string() << "\n";
      return status;
    }

    if (*cmp) {
      const auto res = wcprox::compare(config);
      wcprox::print_compare_table(std::cout, res);
      std::cout << "table: " << res.table_path.string() << "\n";
      int status = 0;
      for (const auto& r : res.rows) {
        if (!r.outcome.ok) {
          std::cerr << "error: " << r.outcome.experiment_id << " ended in state " << r.outcome.termination
                    << ": " << r.outcome.diagnostic << "\n";
          status = kAlgorithmError;
        }
      }
      return status;
    }

    const auto rep = wcprox::certify(trace_path, config);
    std::printf("%s: m=%g rho=%g, %zu iterates checked\n", rep.experiment_id.c_str(), rep.m, rep.rho,
                rep.checks.size());
    for (const auto& c : rep.checks) {
      std::printf("  outer_index %-8lld |grad f_alpha|=%.3e  bound=%.3e  (+%.1e)  %s\n",
                  static_cast<long long>(c.outer_index), c.moreau_gradient_norm, c.bound, c.solver_error,
                  c.satisfied ? "ok" : "VIOLATED");
    }
    if (rep.certified_index) {
      std::printf("certified_index: %lld\n", static_cast<long long>(*rep.certified_index));
    } else {
      std::printf("certified_index: none (targets not reached)\n");
    }
    std::cout << "report: " << rep.report_path.string() << "\n";
    if (!rep.all_satisfied) {
      std::cerr << "error: a conversion bound is violated\n";
      return kAlgorithmError;
    }
    return 0;
  } catch (const wcprox::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kRuntimeError;
  }
}
