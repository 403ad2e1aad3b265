#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <vector>

#include "gspde/lifting.hpp"
#include "gspde/operators.hpp"

namespace gspde {

/// Truncated cylindrical Wiener increments on a uniform time grid.
/// Increment (j, k) of any path regenerates bit-identically from
/// (seed, path, j, k) through a counter-based substream.
struct WienerRepresentation {
  long j_modes = 0;
  long steps = 0;
  double horizon = 0.0;
  std::uint64_t seed = 0;
  BasisKind basis = BasisKind::kDiscrete;

  double dt() const { return horizon / static_cast<double>(steps); }

  /// J x K matrix of N(0, dt) increments for one path.
  Eigen::MatrixXd increments(std::uint64_t path) const;
};

WienerRepresentation generate_noise(long j_modes, double horizon, long steps,
                                    std::uint64_t seed, BasisKind basis);

/// Mixing matrix of Pi_n W: entry (i, j) = < project(psi_inf_j), psi_n_i >
/// in L^2(mu_n). Applied to continuum-mode increments it yields the
/// discrete-mode increments of the projected noise.
struct NoiseCoupling {
  Eigen::MatrixXd mixing;  // n x J

  Eigen::MatrixXd transform(const Eigen::MatrixXd& increments) const {
    return mixing * increments;
  }
};

NoiseCoupling project_noise(const SpectralOperator& op_n,
                            const SpectralOperator& op_inf,
                            const TransportPair& pair, long j_modes);

/// Pointwise drift f(t, x): globally Lipschitz or odd-degree polynomial with
/// negative leading coefficient.
struct NemytskiiDrift {
  enum class Kind { kGloballyLipschitz, kPolynomial };
  Kind kind = Kind::kPolynomial;
  std::vector<double> coeff;  // ascending powers; signs as stored
  double lipschitz = 0.0;
  std::function<double(double, double)> fn;  // Lipschitz kind evaluator

  double eval(double t, double x) const;

  /// f(x) = -x^3 + x (coefficients 0, 1, 0, -1).
  static NemytskiiDrift allen_cahn();
  static NemytskiiDrift polynomial(std::vector<double> ascending_coeff);
  static NemytskiiDrift global_lipschitz(std::function<double(double, double)> f,
                                         double lipschitz_constant);
};

/// [F(t, u)](x_i) = f(t, u(x_i)).
Eigen::VectorXd nemytskii_apply(const NemytskiiDrift& drift, double t,
                                const Eigen::VectorXd& u);

enum class NoiseScheme : char {
  kLeftPoint = 'A',      // coupled-capable; increment variance dt per step
  kExactVariance = 'B',  // per-mode exact OU variance; independent noise only
};

struct SpdeProblem {
  const SpectralOperator* op = nullptr;
  const NemytskiiDrift* drift = nullptr;  // null = linear equation
  Eigen::VectorXd initial;                // nodal
  double horizon = 0.0;
  long steps = 0;
  double blowup_threshold = 1e6;
};

/// Trajectory on the time grid plus blow-up bookkeeping. States are nodal
/// unless coefficients is set (the analysis-side processes below).
struct PathSolution {
  Eigen::MatrixXd states;  // (K+1) x n, row k = state at t_k
  bool coefficients = false;
  double sup_norm = 0.0;   // max over k of the sup norm
  bool blown_up = false;
  long first_exceedance = -1;
  char scheme = 'B';
};

/// Linear (drift-free) equation advanced mode-by-mode with the exact OU
/// one-step law: x <- e^{-lambda^s dt} x + N(0, (1-e^{-2 lambda^s dt}) /
/// (2 lambda^s)). The increments argument carries N(0, dt) draws which are
/// rescaled per mode, so paths stay reproducible.
PathSolution simulate_ou(const SpectralOperator& op,
                         const Eigen::VectorXd& initial_nodal, double horizon,
                         long steps, const Eigen::MatrixXd& increments);

/// W_A(t_k) = sum_{l<k} S((k-l) dt) dW^l, per mode in O(K).
/// Scheme A uses the increments as given (variance dt), scheme B rescales to
/// the exact per-step variance (independent noise only). Coefficient states.
PathSolution stochastic_convolution(const SpectralOperator& op,
                                    const Eigen::MatrixXd& mode_increments,
                                    double horizon, NoiseScheme scheme);

/// W^delta(t_k) = Gamma(delta)^{-1} sum_{l<k} (t_k-t_l)^{delta-1}
/// S(t_k-t_l) dW^l, delta > 1/2. Coefficient states.
PathSolution auxiliary_process(const SpectralOperator& op, double delta,
                               const Eigen::MatrixXd& mode_increments,
                               double horizon);

/// Fractional parabolic integral of a path of coefficient vectors:
/// (I^s f)(t_k) = Gamma(s)^{-1} sum_{l<k} (t_k-t_l)^{s-1} S(t_k-t_l)
/// f(t_l) dt; s = 0 returns f.
Eigen::MatrixXd fractional_integrate(const SpectralOperator& op, double s_frac,
                                     const Eigen::MatrixXd& path_coeff,
                                     double horizon);

/// Exponential Euler for the semilinear equation:
/// X^{k+1} = S(dt) X^k + dt phi1(dt) F(t_k, X^k) + dW_A^k,
/// with phi1 acting per mode as (1 - e^{-lambda^s dt}) / (lambda^s dt).
/// The blow-up detector halts and flags once ||X||_inf exceeds the
/// threshold; NaN aborts with diagnostics.
PathSolution simulate_semilinear(const SpdeProblem& problem,
                                 const Eigen::MatrixXd& mode_increments,
                                 NoiseScheme scheme);

}  // namespace gspde
