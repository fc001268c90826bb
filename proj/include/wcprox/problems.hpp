#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>

#include "wcprox/core.hpp"

namespace wcprox {

enum class ToyKind { abs, abs_quadratic, quadratic, smooth_qg };

ToyKind parse_toy_kind(const std::string& name);
std::string to_string(ToyKind kind);

/// Test function with its known constants and minimizer.
struct ToyFunction {
  ToyKind kind = ToyKind::abs;
  FirstOrderOracle oracle;
  std::optional<double> quadratic_growth;  // mu_q in f - f* >= (mu_q/2) dist^2
  std::string minimizers;                  // human-readable solution set
  /// Distance to the solution set, when it is a single point or a finite set.
  double distance_to_solutions(const Vector& x) const;
};

/// abs:            sum |x_i|,               m = 0, L = sqrt(n), f* = 0 at 0
/// abs_quadratic:  sum |x_i^2 - 1|,         m = 2, f* = 0 at {-1, 1}^n
/// quadratic:      (mu/2)||x||^2,           m = 0, M = mu_q = mu, f* = 0 at 0
/// smooth_qg:      5||x||^2 + cos(x_1),     m = 1, M = 11, mu_q = 9, f* = 1 at 0
ToyFunction toy(ToyKind kind, Index dimension = 1, double mu = 1.0);

struct PhaseRetrievalInstance {
  Matrix a;              // n x d, row i is a_i
  Vector b;              // b_i = <a_i, ground_truth>^2
  Vector ground_truth;
  double m = 0.0;        // (2/n) sum ||a_i||^2
  std::uint64_t seed = 0;
  /// max ||subgradient|| over samples in [-2, 2]^d; the function is not
  /// globally Lipschitz, so this is only a diagnostic.
  double lipschitz_box_estimate = 0.0;

  Index dimension() const { return a.cols(); }
  Index measurements() const { return a.rows(); }
};

struct BlindDeconvInstance {
  Matrix u;              // n x d
  Matrix v;              // n x d
  Vector b;              // b_i = <u_i, x_bar> <v_i, y_bar>
  Vector ground_truth_x;
  Vector ground_truth_y;
  /// (1/n) sum ||u_i|| ||v_i||, a valid weak-convexity modulus.
  double m = 0.0;
  /// (1/n) sum |<u_i, v_i>|; too small in general, kept for reference.
  double m_inner_product = 0.0;
  std::uint64_t seed = 0;
  double lipschitz_box_estimate = 0.0;

  Index signal_dimension() const { return u.cols(); }
  Index dimension() const { return 2 * u.cols(); }
  Index measurements() const { return u.rows(); }
  Vector stacked_ground_truth() const;
};

/// Builds the instance from explicit data; b is computed from the ground truth.
PhaseRetrievalInstance phase_retrieval_instance(const Matrix& a, const Vector& ground_truth);
/// Builds the instance from explicit data and measurements.
PhaseRetrievalInstance phase_retrieval_instance(const Matrix& a, const Vector& b,
                                                const Vector& ground_truth);
/// (1/n) sum |<a_i, x>^2 - b_i| with subgradient (2/n) sum <a_i, x> sign(r_i) a_i.
FirstOrderOracle phase_retrieval_oracle(const PhaseRetrievalInstance& instance);
/// Gaussian a_i, ground truth uniform on the unit sphere.
std::pair<PhaseRetrievalInstance, FirstOrderOracle> gen_phase_retrieval(Index d, Index n,
                                                                       std::uint64_t seed);

BlindDeconvInstance blind_deconv_instance(const Matrix& u, const Matrix& v, const Vector& x_bar,
                                          const Vector& y_bar);
BlindDeconvInstance blind_deconv_instance(const Matrix& u, const Matrix& v, const Vector& b,
                                          const Vector& x_bar, const Vector& y_bar);
/// Over the stacked variable (x, y) in R^{2d}.
FirstOrderOracle blind_deconv_oracle(const BlindDeconvInstance& instance);
std::pair<BlindDeconvInstance, FirstOrderOracle> gen_blind_deconv(Index d, Index n,
                                                                 std::uint64_t seed);

/// Largest violation of f(y) >= f(x) + <g, y - x> - (m/2)||y - x||^2 over
/// `pairs` random (x, y) in [lo, hi]^d; <= 0 means no violation found.
double max_minorant_violation(const FirstOrderOracle& oracle, double m, RngStream& rng,
                              int pairs, double lo = -2.0, double hi = 2.0);

/// Plain text instance files: a header line, then key/value records with
/// full-precision numbers. Readers throw std::runtime_error on malformed input.
void write_instance(std::ostream& out, const PhaseRetrievalInstance& instance);
void write_instance(std::ostream& out, const BlindDeconvInstance& instance);
PhaseRetrievalInstance read_phase_retrieval(std::istream& in);
BlindDeconvInstance read_blind_deconv(std::istream& in);
/// "phase_retrieval" or "blind_deconv", read from the header of `in` without consuming it.
std::string peek_instance_family(std::istream& in);

}  // namespace wcprox
