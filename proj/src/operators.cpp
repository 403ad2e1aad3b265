#include "gspde/operators.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "gspde/torus_modes.hpp"

namespace gspde {

CoefficientField CoefficientField::laplace() {
  CoefficientField f;
  f.tau = [](const double*, int) { return 0.0; };
  f.kappa = [](const double*, int) { return 1.0; };
  f.laplacian = true;
  return f;
}

CoefficientField CoefficientField::constants(double tau_value,
                                             double kappa_value) {
  CoefficientField f;
  f.tau = [tau_value](const double*, int) { return tau_value; };
  f.kappa = [kappa_value](const double*, int) { return kappa_value; };
  f.laplacian = (tau_value == 0.0 && kappa_value == 1.0);
  return f;
}

double unit_ball_volume(int m) {
  // pi^{m/2} / Gamma(m/2 + 1)
  return std::pow(3.14159265358979323846, 0.5 * m) /
         std::tgamma(0.5 * m + 1.0);
}

WeightMatrix weight_matrix(const Eigen::MatrixXd& nodes, int m, double h) {
  if (!(h > 0.0 && h < 0.5)) {
    throw std::invalid_argument("weight_matrix: need 0 < h < 1/2");
  }
  const long n = nodes.rows();
  WeightMatrix wm;
  wm.n = n;
  wm.m = m;
  wm.h = h;
  const double value =
      2.0 * (m + 2) / unit_ball_volume(m) / (n * std::pow(h, m + 2));
  wm.w = Eigen::MatrixXd::Zero(n, n);
  for (long i = 0; i < n; ++i) {
    wm.w(i, i) = value;  // distance 0; cancels in the operator
    for (long j = i + 1; j < n; ++j) {
      if (periodic_distance(&nodes(i, 0), &nodes(j, 0), m) <= h) {
        wm.w(i, j) = value;
        wm.w(j, i) = value;
      }
    }
  }
  return wm;
}

GraphOperator assemble_graph_operator(const WeightMatrix& weights,
                                      const CoefficientField& coeff,
                                      const Eigen::MatrixXd& nodes) {
  const long n = weights.n;
  if (nodes.rows() != n) {
    throw std::invalid_argument("assemble_graph_operator: size mismatch");
  }
  const int m = weights.m;
  Eigen::VectorXd tau(n), sqrt_kappa(n);
  for (long i = 0; i < n; ++i) {
    tau[i] = coeff.tau(&nodes(i, 0), m);
    const double k = coeff.kappa(&nodes(i, 0), m);
    if (k < 0.0) {
      throw std::invalid_argument("assemble_graph_operator: kappa < 0");
    }
    sqrt_kappa[i] = std::sqrt(k);
  }
  // L u(x_i) = tau_i u_i + sum_j W_ij sqrt(k_i k_j) (u_i - u_j)
  GraphOperator op;
  op.n = n;
  op.source = GraphOperator::Source::kKernelWeights;
  Eigen::MatrixXd scaled =
      weights.w.cwiseProduct(sqrt_kappa * sqrt_kappa.transpose());
  op.matrix = -scaled;
  op.matrix.diagonal() += scaled.rowwise().sum() + tau;
  return op;
}

GraphOperator assemble_fd_operator(const TorusGrid& grid) {
  const long n = grid.n;
  const int m = grid.m;
  const int k = grid.k;
  const double w = std::pow(static_cast<double>(n), 2.0 / m);  // = k^2
  GraphOperator op;
  op.n = n;
  op.source = GraphOperator::Source::kFiniteDifference;
  op.matrix = Eigen::MatrixXd::Zero(n, n);
  // node index is lexicographic over axes, last axis fastest
  std::vector<long> stride(m, 1);
  for (int d = m - 2; d >= 0; --d) stride[d] = stride[d + 1] * k;
  for (long i = 0; i < n; ++i) {
    for (int d = 0; d < m; ++d) {
      const long pos = (i / stride[d]) % k;
      const long up = i + ((pos + 1) % k - pos) * stride[d];
      const long down = i + ((pos + k - 1) % k - pos) * stride[d];
      op.matrix(i, i) += 2.0 * w;
      op.matrix(i, up) -= w;
      op.matrix(i, down) -= w;
    }
  }
  return op;
}

Eigen::VectorXd SpectralOperator::to_coefficients(
    const Eigen::VectorXd& u) const {
  return (psi.transpose() * u) * weight;
}

Eigen::VectorXd SpectralOperator::from_coefficients(
    const Eigen::VectorXd& c) const {
  return psi * c;
}

double SpectralOperator::inner(const Eigen::VectorXd& u,
                               const Eigen::VectorXd& v) const {
  return u.dot(v) * weight;
}

std::uint64_t SpectralOperator::fingerprint() const {
  std::uint64_t h = 14695981039346656037ull;
  const auto* bytes = reinterpret_cast<const unsigned char*>(lambda.data());
  const std::size_t len = sizeof(double) * lambda.size();
  for (std::size_t i = 0; i < len; ++i) {
    h ^= bytes[i];
    h *= 1099511628211ull;
  }
  return h;
}

namespace {

Eigen::VectorXd powers(const Eigen::VectorXd& lambda, double s) {
  Eigen::VectorXd out(lambda.size());
  for (long i = 0; i < lambda.size(); ++i) {
    if (s == 0.0) {
      out[i] = 1.0;
    } else {
      out[i] = lambda[i] > 0.0 ? std::pow(lambda[i], s) : 0.0;
    }
  }
  return out;
}

void fix_column_signs(Eigen::MatrixXd& psi) {
  for (long j = 0; j < psi.cols(); ++j) {
    long arg = 0;
    psi.col(j).cwiseAbs().maxCoeff(&arg);
    if (psi(arg, j) < 0.0) psi.col(j) = -psi.col(j);
  }
}

}  // namespace

SpectralOperator eigendecompose(const GraphOperator& op, double s) {
  if (s < 0.0) throw std::invalid_argument("eigendecompose: s must be >= 0");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(op.matrix);
  if (solver.info() != Eigen::Success) {
    throw std::runtime_error("eigendecompose: eigensolver failed");
  }
  SpectralOperator sp;
  sp.lambda = solver.eigenvalues();
  const double norm =
      std::max(std::fabs(sp.lambda[0]), std::fabs(sp.lambda[sp.lambda.size() - 1]));
  const double clamp = 1e-8 * std::max(norm, 1.0);
  for (long i = 0; i < sp.lambda.size(); ++i) {
    if (sp.lambda[i] < -clamp) {
      throw std::runtime_error(
          "eigendecompose: negative eigenvalue beyond clamp threshold");
    }
    if (sp.lambda[i] < 0.0) sp.lambda[i] = 0.0;
  }
  // L^2(mu_n) normalization: solver columns are Euclidean-orthonormal
  sp.psi = solver.eigenvectors() * std::sqrt(static_cast<double>(op.n));
  fix_column_signs(sp.psi);
  sp.s = s;
  sp.lambda_s = powers(sp.lambda, s);
  sp.kind = BasisKind::kDiscrete;
  sp.weight = 1.0 / static_cast<double>(op.n);
  return sp;
}

SpectralOperator continuum_operator_torus(int m, long j_count, double s,
                                          const QuadratureGrid& quad) {
  if (j_count < 1) {
    throw std::invalid_argument("continuum_operator_torus: j_count >= 1");
  }
  if (quad.m != m) {
    throw std::invalid_argument("continuum_operator_torus: dim mismatch");
  }
  SpectralOperator sp;
  sp.s = s;
  sp.kind = BasisKind::kContinuum;
  sp.weight = quad.weight;
  sp.lambda.resize(j_count);
  sp.psi.resize(quad.size, j_count);
  if (m == 1) {
    for (long j = 1; j <= j_count; ++j) {
      sp.lambda[j - 1] = torus1d::continuum_eigenvalue(j);
    }
    sp.psi = torus1d::continuum_modes_at(quad.nodes.col(0), j_count);
  } else {
    const auto modes = tensor_modes(m, j_count);
    for (long j = 0; j < j_count; ++j) {
      sp.lambda[j] = modes[j].lambda;
      Eigen::VectorXd col = Eigen::VectorXd::Ones(quad.size);
      for (int d = 0; d < m; ++d) {
        const long jd = modes[j].factors[d];
        for (long p = 0; p < quad.size; ++p) {
          col[p] *= torus1d::continuum_mode(jd, quad.nodes(p, d));
        }
      }
      sp.psi.col(j) = col;
    }
  }
  sp.lambda_s = powers(sp.lambda, s);
  return sp;
}

namespace {

Eigen::VectorXd apply_scaled(const SpectralOperator& op,
                             const Eigen::VectorXd& factors,
                             const Eigen::VectorXd& u) {
  if (u.size() != op.points()) {
    throw std::invalid_argument("spectral apply: size mismatch");
  }
  return op.from_coefficients(factors.cwiseProduct(op.to_coefficients(u)));
}

}  // namespace

Eigen::VectorXd fractional_apply(const SpectralOperator& op, double p,
                                 const Eigen::VectorXd& u) {
  if (p < 0.0) {
    throw std::invalid_argument(
        "fractional_apply: negative powers go through resolvent_apply");
  }
  if (p == 0.0) return u;
  Eigen::VectorXd f(op.modes());
  for (long j = 0; j < op.modes(); ++j) {
    f[j] = op.lambda[j] > 0.0 ? std::pow(op.lambda[j], p) : 0.0;
  }
  return apply_scaled(op, f, u);
}

Eigen::VectorXd resolvent_apply(const SpectralOperator& op, double beta,
                                const Eigen::VectorXd& u) {
  if (beta < 0.0) throw std::invalid_argument("resolvent_apply: beta >= 0");
  Eigen::VectorXd f =
      (1.0 + op.lambda_s.array()).pow(-beta).matrix();
  return apply_scaled(op, f, u);
}

Eigen::VectorXd semigroup_apply(const SpectralOperator& op, double t,
                                const Eigen::VectorXd& u) {
  if (t < 0.0) throw std::invalid_argument("semigroup_apply: t >= 0");
  Eigen::VectorXd f = (-t * op.lambda_s.array()).exp().matrix();
  return apply_scaled(op, f, u);
}

std::string spectrum_to_csv(const SpectralOperator& op) {
  std::string out = "j,lambda,lambda_s\n";
  char buf[96];
  for (long j = 0; j < op.modes(); ++j) {
    std::snprintf(buf, sizeof(buf), "%ld,%.17g,%.17g\n", j + 1, op.lambda[j],
                  op.lambda_s[j]);
    out += buf;
  }
  return out;
}

std::string eigenvectors_to_text(const SpectralOperator& op) {
  std::string out;
  char buf[48];
  for (long i = 0; i < op.points(); ++i) {
    for (long j = 0; j < op.modes(); ++j) {
      if (j > 0) out += ' ';
      std::snprintf(buf, sizeof(buf), "%.17g", op.psi(i, j));
      out += buf;
    }
    out += '\n';
  }
  return out;
}

}  // namespace gspde
