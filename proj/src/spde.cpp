#include "gspde/spde.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "gspde/rng.hpp"

namespace gspde {

Eigen::MatrixXd WienerRepresentation::increments(std::uint64_t path) const {
  const CounterRng rng(seed);
  const double sd = std::sqrt(dt());
  Eigen::MatrixXd out(j_modes, steps);
  for (long j = 0; j < j_modes; ++j) {
    for (long k = 0; k < steps; ++k) {
      // 128-bit counter (path | mode, step): one draw per address
      const std::uint64_t mode_step =
          (static_cast<std::uint64_t>(j) << 32) | static_cast<std::uint64_t>(k);
      out(j, k) = sd * rng.normal(path, mode_step);
    }
  }
  return out;
}

WienerRepresentation generate_noise(long j_modes, double horizon, long steps,
                                    std::uint64_t seed, BasisKind basis) {
  if (j_modes < 1 || steps < 1) {
    throw std::invalid_argument("generate_noise: J and K must be >= 1");
  }
  if (horizon <= 0.0) throw std::invalid_argument("generate_noise: T > 0");
  return WienerRepresentation{j_modes, steps, horizon, seed, basis};
}

NoiseCoupling project_noise(const SpectralOperator& op_n,
                            const SpectralOperator& op_inf,
                            const TransportPair& pair, long j_modes) {
  if (j_modes > op_inf.modes()) {
    throw std::invalid_argument(
        "project_noise: request exceeds available continuum modes");
  }
  NoiseCoupling c;
  c.mixing.resize(op_n.modes(), j_modes);
  for (long j = 0; j < j_modes; ++j) {
    c.mixing.col(j) = op_n.to_coefficients(project(op_inf.psi.col(j), pair));
  }
  return c;
}

double NemytskiiDrift::eval(double t, double x) const {
  if (kind == Kind::kGloballyLipschitz) return fn(t, x);
  double acc = 0.0;
  for (auto it = coeff.rbegin(); it != coeff.rend(); ++it) acc = acc * x + *it;
  return acc;
}

NemytskiiDrift NemytskiiDrift::allen_cahn() {
  return polynomial({0.0, 1.0, 0.0, -1.0});
}

NemytskiiDrift NemytskiiDrift::polynomial(std::vector<double> ascending_coeff) {
  if (ascending_coeff.empty() || ascending_coeff.size() % 2 != 0 ||
      ascending_coeff.back() >= 0.0) {
    throw std::invalid_argument(
        "polynomial drift: need odd degree with negative leading coefficient");
  }
  NemytskiiDrift d;
  d.kind = Kind::kPolynomial;
  d.coeff = std::move(ascending_coeff);
  return d;
}

NemytskiiDrift NemytskiiDrift::global_lipschitz(
    std::function<double(double, double)> f, double lipschitz_constant) {
  NemytskiiDrift d;
  d.kind = Kind::kGloballyLipschitz;
  d.fn = std::move(f);
  d.lipschitz = lipschitz_constant;
  return d;
}

Eigen::VectorXd nemytskii_apply(const NemytskiiDrift& drift, double t,
                                const Eigen::VectorXd& u) {
  Eigen::VectorXd out(u.size());
  for (long i = 0; i < u.size(); ++i) out[i] = drift.eval(t, u[i]);
  return out;
}

namespace {

// exact one-step OU standard deviation for increment variance
// (1 - e^{-2 a dt}) / (2 a); a = 0 degenerates to dt
double ou_step_sd(double a, double dt) {
  if (a <= 0.0) return std::sqrt(dt);
  return std::sqrt((1.0 - std::exp(-2.0 * a * dt)) / (2.0 * a));
}

double phi1(double a_dt) {
  if (std::fabs(a_dt) < 1e-8) return 1.0 - 0.5 * a_dt;
  return (1.0 - std::exp(-a_dt)) / a_dt;
}

}  // namespace

PathSolution simulate_ou(const SpectralOperator& op,
                         const Eigen::VectorXd& initial_nodal, double horizon,
                         long steps, const Eigen::MatrixXd& increments) {
  if (increments.rows() != op.modes() || increments.cols() != steps) {
    throw std::invalid_argument("simulate_ou: increment shape mismatch");
  }
  const double dt = horizon / static_cast<double>(steps);
  const long n = op.modes();
  Eigen::VectorXd decay(n), sd(n);
  for (long i = 0; i < n; ++i) {
    decay[i] = std::exp(-op.lambda_s[i] * dt);
    sd[i] = ou_step_sd(op.lambda_s[i], dt) / std::sqrt(dt);
  }
  PathSolution sol;
  sol.scheme = 'B';
  sol.states.resize(steps + 1, op.points());
  Eigen::VectorXd c = op.to_coefficients(initial_nodal);
  sol.states.row(0) = op.from_coefficients(c).transpose();
  sol.sup_norm = sol.states.row(0).cwiseAbs().maxCoeff();
  for (long k = 0; k < steps; ++k) {
    c = decay.cwiseProduct(c) + sd.cwiseProduct(increments.col(k));
    sol.states.row(k + 1) = op.from_coefficients(c).transpose();
    sol.sup_norm =
        std::max(sol.sup_norm, sol.states.row(k + 1).cwiseAbs().maxCoeff());
  }
  return sol;
}

PathSolution stochastic_convolution(const SpectralOperator& op,
                                    const Eigen::MatrixXd& mode_increments,
                                    double horizon, NoiseScheme scheme) {
  const long n = op.modes();
  const long steps = mode_increments.cols();
  if (mode_increments.rows() != n) {
    throw std::invalid_argument("stochastic_convolution: shape mismatch");
  }
  const double dt = horizon / static_cast<double>(steps);
  Eigen::VectorXd decay(n), scale(n);
  for (long i = 0; i < n; ++i) {
    decay[i] = std::exp(-op.lambda_s[i] * dt);
    scale[i] = scheme == NoiseScheme::kExactVariance
                   ? ou_step_sd(op.lambda_s[i], dt) / std::sqrt(dt)
                   : 1.0;
  }
  PathSolution sol;
  sol.scheme = static_cast<char>(scheme);
  sol.coefficients = true;
  sol.states = Eigen::MatrixXd::Zero(steps + 1, n);
  Eigen::VectorXd c = Eigen::VectorXd::Zero(n);
  for (long k = 0; k < steps; ++k) {
    if (scheme == NoiseScheme::kLeftPoint) {
      // W_A(t_{k+1}) = S(dt) (W_A(t_k) + dW^k)
      c = decay.cwiseProduct(c + mode_increments.col(k));
    } else {
      c = decay.cwiseProduct(c) +
          scale.cwiseProduct(mode_increments.col(k));
    }
    sol.states.row(k + 1) = c.transpose();
  }
  sol.sup_norm = sol.states.cwiseAbs().maxCoeff();
  return sol;
}

PathSolution auxiliary_process(const SpectralOperator& op, double delta,
                               const Eigen::MatrixXd& mode_increments,
                               double horizon) {
  if (!(delta > 0.5)) {
    throw std::invalid_argument("auxiliary_process: delta must exceed 1/2");
  }
  const long n = op.modes();
  const long steps = mode_increments.cols();
  const double dt = horizon / static_cast<double>(steps);
  const double gamma_inv = 1.0 / std::tgamma(delta);
  PathSolution sol;
  sol.scheme = 'A';
  sol.coefficients = true;
  sol.states = Eigen::MatrixXd::Zero(steps + 1, n);
  for (long k = 1; k <= steps; ++k) {
    Eigen::VectorXd acc = Eigen::VectorXd::Zero(n);
    for (long l = 0; l < k; ++l) {
      const double tau = (k - l) * dt;
      const double kernel = gamma_inv * std::pow(tau, delta - 1.0);
      acc += (kernel * (-tau * op.lambda_s.array()).exp() *
              mode_increments.col(l).array())
                 .matrix();
    }
    sol.states.row(k) = acc.transpose();
  }
  sol.sup_norm = sol.states.cwiseAbs().maxCoeff();
  return sol;
}

Eigen::MatrixXd fractional_integrate(const SpectralOperator& op, double s_frac,
                                     const Eigen::MatrixXd& path_coeff,
                                     double horizon) {
  if (s_frac < 0.0) {
    throw std::invalid_argument("fractional_integrate: s must be >= 0");
  }
  if (s_frac == 0.0) return path_coeff;
  const long steps = path_coeff.rows() - 1;
  const long n = path_coeff.cols();
  if (n != op.modes()) {
    throw std::invalid_argument("fractional_integrate: mode count mismatch");
  }
  const double dt = horizon / static_cast<double>(steps);
  const double gamma_inv = 1.0 / std::tgamma(s_frac);
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(steps + 1, n);
  for (long k = 1; k <= steps; ++k) {
    Eigen::VectorXd acc = Eigen::VectorXd::Zero(n);
    for (long l = 0; l < k; ++l) {
      const double tau = (k - l) * dt;
      const double kernel = gamma_inv * std::pow(tau, s_frac - 1.0) * dt;
      acc += (kernel * (-tau * op.lambda_s.array()).exp() *
              path_coeff.row(l).transpose().array())
                 .matrix();
    }
    out.row(k) = acc.transpose();
  }
  return out;
}

PathSolution simulate_semilinear(const SpdeProblem& problem,
                                 const Eigen::MatrixXd& mode_increments,
                                 NoiseScheme scheme) {
  const SpectralOperator& op = *problem.op;
  const long steps = problem.steps;
  const long n = op.modes();
  if (mode_increments.cols() != steps || mode_increments.rows() != n) {
    throw std::invalid_argument("simulate_semilinear: increment shape");
  }
  const double dt = problem.horizon / static_cast<double>(steps);
  Eigen::VectorXd decay(n), phi(n), scale(n);
  for (long i = 0; i < n; ++i) {
    decay[i] = std::exp(-op.lambda_s[i] * dt);
    phi[i] = phi1(op.lambda_s[i] * dt);
    scale[i] = scheme == NoiseScheme::kExactVariance
                   ? ou_step_sd(op.lambda_s[i], dt) / std::sqrt(dt)
                   : 1.0;
  }
  PathSolution sol;
  sol.scheme = static_cast<char>(scheme);
  sol.states.resize(steps + 1, op.points());
  Eigen::VectorXd c = op.to_coefficients(problem.initial);
  Eigen::VectorXd x = op.from_coefficients(c);
  sol.states.row(0) = x.transpose();
  sol.sup_norm = x.cwiseAbs().maxCoeff();
  for (long k = 0; k < steps; ++k) {
    Eigen::VectorXd next;
    if (scheme == NoiseScheme::kLeftPoint) {
      next = decay.cwiseProduct(c + mode_increments.col(k));
    } else {
      next = decay.cwiseProduct(c) + scale.cwiseProduct(mode_increments.col(k));
    }
    if (problem.drift != nullptr) {
      const Eigen::VectorXd f = nemytskii_apply(*problem.drift, k * dt, x);
      next += dt * phi.cwiseProduct(op.to_coefficients(f));
    }
    c = next;
    x = op.from_coefficients(c);
    const double sup = x.cwiseAbs().maxCoeff();
    if (std::isnan(sup)) {
      throw std::runtime_error("simulate_semilinear: NaN at step " +
                               std::to_string(k + 1) + " of " +
                               std::to_string(steps));
    }
    sol.states.row(k + 1) = x.transpose();
    sol.sup_norm = std::max(sol.sup_norm, sup);
    if (sup > problem.blowup_threshold) {
      sol.blown_up = true;
      sol.first_exceedance = k + 1;
      sol.states.conservativeResize(k + 2, Eigen::NoChange);
      break;
    }
  }
  return sol;
}

}  // namespace gspde
