#pragma once

#include <Eigen/Dense>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "gspde/io.hpp"
#include "gspde/operators.hpp"
#include "gspde/spde.hpp"

namespace gspde {

/// Convergence-experiment rows: discretization size against error, an
/// optional a-priori bound, and the ratio to the previous row.
struct RateRow {
  double n = 0.0;
  double error = 0.0;
  std::optional<double> bound;
  std::optional<double> ratio;
};

struct RateTable {
  std::string label;
  std::vector<RateRow> rows;
  std::optional<double> slope;
  std::map<std::string, std::string> meta;
};

/// Least-squares slope of log error against log n. Rows with nonpositive
/// errors are excluded; fewer than three usable rows is an error. The RMS of
/// the log-log residuals is written to residual_rms when given.
double fit_rate(const RateTable& table, double* residual_rms = nullptr);

struct McEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  long paths = 0;
  std::uint64_t seed = 0;
};

/// Everything an experiment hands to the CLI: a CSV document, manifest
/// entries, per-row display lines, rate tables, and the assertion verdict.
struct ExperimentResult {
  std::string name;
  CsvTable csv;
  std::map<std::string, std::string> manifest;
  std::vector<std::string> lines;
  std::vector<RateTable> tables;
  bool passed = true;
  std::vector<std::string> failures;

  void note_failure(const std::string& msg) {
    passed = false;
    failures.push_back(msg);
  }
};

/// Rotate computed eigenvectors inside each degenerate eigenvalue cluster to
/// best match the target columns (orthogonal Procrustes under the discrete
/// inner product). Mode matching across clusters is by index; comparisons
/// within a cluster are subspace comparisons realized by the rotation.
Eigen::MatrixXd align_eigenvectors(const SpectralOperator& op,
                                   const Eigen::MatrixXd& targets,
                                   double cluster_tol = 1e-8);

/// Eigenvalue and lifted-eigenfunction errors of the grid Laplacian against
/// the torus closed forms, with the explicit bounds
/// (1/12) j^4 pi^4 n^{-2/m} and (sqrt2/2) j pi n^{-1/m}.
ExperimentResult spectral_convergence_experiment(int m,
                                                 const std::vector<int>& k_list,
                                                 int j_max);

/// || Lambda (id+A_n)^{-beta} Pi - R_inf^beta || in Hilbert-Schmidt and
/// 2->infty norms over a sequence of grids; j_modes = 0 picks the truncation
/// from the 1e-6 tail rule. Asserts monotone decrease across doublings,
/// allowing one non-strict step of at most 5%.
ExperimentResult resolvent_convergence_experiment(
    const std::vector<int>& k_list, double s, double beta, long j_modes = 0);

/// sup_t t^{2 beta / q} ||S_n(t)||_{q -> infty} per grid; the constants must
/// stay within a factor 3 across the grid family. q may be infinity, in
/// which case the weight drops and the uniform bound 1 + 1e-8 is asserted.
ExperimentResult ultracontractivity_experiment(const std::vector<int>& k_list,
                                               double s, double q, double beta,
                                               const std::vector<double>& t_grid);

/// sup over t of the lifted semigroup gap for initial data x (quadrature
/// samples); asserts the per-doubling ratio stays below ratio_bound.
ExperimentResult semigroup_experiment(const std::vector<int>& k_list, double s,
                                      double t_max, int t_count, long j_inf,
                                      double ratio_bound = 0.6);

struct McExperimentParams {
  std::vector<int> k_list;  // last entry is the reference grid
  double s = 1.0;
  double horizon = 0.5;
  long steps = 512;
  long j_modes = 128;
  long paths = 100;
  std::uint64_t seed = 0;
  double p_minus = 1.0;   // moment for the Allen-Cahn error
  double xi_amplitude = 0.1;
  double blowup_threshold = 1e6;
  int threads = 1;
};

/// Coupled Monte Carlo: E max_t || lift(W_{A_n}) - W_{A_ref} ||_{L^2} with a
/// common continuum Wiener representation, reference = finest grid. Asserts
/// decreasing means separated by two pooled standard errors.
ExperimentResult ou_convergence_experiment(const McExperimentParams& params);

/// Same coupling for the Allen-Cahn equation, sup-norm-in-space error and
/// p^- moments; blow-ups abort the rate fit and are reported.
ExperimentResult allen_cahn_convergence_experiment(
    const McExperimentParams& params, bool with_drift = true);

/// One-mode operator (psi = 1, eigenvalue lambda) for scalar studies.
SpectralOperator scalar_mode_operator(double lambda, double s);

/// max_k |I^{1/2 - beta'} W^{1/2 + beta'} - W_A| on the K-grid, one value
/// per K, all derived from a single Brownian path refined at the finest K.
std::vector<double> factorization_errors(double lambda_s, double beta_prime,
                                         const std::vector<long>& k_values,
                                         double horizon, std::uint64_t seed);

/// Sample variance of the exact-step OU coefficient at time T against the
/// closed form (1 - e^{-2 lambda^s T}) / (2 lambda^s).
McEstimate ou_variance_estimate(double lambda_s, double horizon, long steps,
                                long paths, std::uint64_t seed);

}  // namespace gspde
