#pragma once

#include <Eigen/Dense>
#include <functional>
#include <string>

#include "gspde/geometry.hpp"

namespace gspde {

/// Scalar coefficient fields (tau, kappa) of the base operator
/// tau u - div(kappa grad u). The Laplacian case tau == 0, kappa == 1 is
/// flagged so grid experiments can pick their closed-form path.
struct CoefficientField {
  std::function<double(const double*, int)> tau;
  std::function<double(const double*, int)> kappa;
  bool laplacian = false;

  static CoefficientField laplace();
  static CoefficientField constants(double tau_value, double kappa_value);
};

/// Indicator-kernel graph weights: W_ij = 2(m+2)/nu_m * (n h^{m+2})^{-1}
/// when the periodic distance is <= h. nu_m is the unit-ball volume.
struct WeightMatrix {
  long n = 0;
  int m = 1;
  double h = 0.0;
  Eigen::MatrixXd w;
};

/// Volume of the unit ball in R^m (nu_1 = 2, nu_2 = pi, ...).
double unit_ball_volume(int m);

WeightMatrix weight_matrix(const Eigen::MatrixXd& nodes, int m, double h);
inline WeightMatrix weight_matrix(const PointCloud& cloud, double h) {
  return weight_matrix(cloud.nodes, cloud.m, h);
}

/// Dense symmetric realization of the discretized base operator.
struct GraphOperator {
  enum class Source { kKernelWeights, kFiniteDifference, kContinuumTruncation };
  long n = 0;
  Eigen::MatrixXd matrix;
  Source source = Source::kKernelWeights;
};

/// (L u)(x_i) = tau(x_i) u(x_i) + sum_j W_ij sqrt(kappa_i kappa_j)(u_i - u_j).
GraphOperator assemble_graph_operator(const WeightMatrix& weights,
                                      const CoefficientField& coeff,
                                      const Eigen::MatrixXd& nodes);

/// Standard 2m+1-point periodic finite-difference Laplacian with weight
/// n^{2/m} per axis neighbor (the grid-setting operator of the spectral
/// convergence experiments).
GraphOperator assemble_fd_operator(const TorusGrid& grid);

enum class BasisKind { kDiscrete, kContinuum };

/// Eigenpairs of a base operator plus a fractional exponent s: the
/// computational form of A = (L^{tau,kappa})^s. Eigenvectors are normalized
/// in the owning L^2: (weight * sum psi^2) == 1, with weight 1/n for nodal
/// bases and Q^{-m} for quadrature-sampled continuum bases.
struct SpectralOperator {
  Eigen::VectorXd lambda;    // base eigenvalues, nondecreasing, >= 0
  Eigen::MatrixXd psi;       // columns = eigenvectors
  Eigen::VectorXd lambda_s;  // lambda^s with 0^s = 0
  double s = 1.0;
  BasisKind kind = BasisKind::kDiscrete;
  double weight = 0.0;       // inner-product weight per point

  long points() const { return psi.rows(); }
  long modes() const { return psi.cols(); }

  Eigen::VectorXd to_coefficients(const Eigen::VectorXd& u) const;
  Eigen::VectorXd from_coefficients(const Eigen::VectorXd& c) const;
  double inner(const Eigen::VectorXd& u, const Eigen::VectorXd& v) const;

  /// FNV-1a hash of the eigenvalue bytes; used as the operator fingerprint
  /// in run manifests.
  std::uint64_t fingerprint() const;
};

/// Full dense symmetric eigendecomposition in L^2(mu_n), measure weight 1/n.
/// Numerically negative eigenvalues above -1e-8 * ||L|| are clamped to zero;
/// anything lower throws. Column signs are fixed so the entry of largest
/// magnitude is positive.
SpectralOperator eigendecompose(const GraphOperator& op, double s);

/// Closed-form torus Laplacian eigenpairs sampled on a quadrature grid,
/// tensorized and re-sorted for m > 1.
SpectralOperator continuum_operator_torus(int m, long j_count, double s,
                                          const QuadratureGrid& quad);

/// sum_j lambda_j^p <u, psi_j> psi_j with 0^p := 0; p = 0 is the identity.
/// Negative p is rejected (inverse powers go through resolvent_apply).
Eigen::VectorXd fractional_apply(const SpectralOperator& op, double p,
                                 const Eigen::VectorXd& u);

/// sum_j (1 + lambda_j^s)^{-beta} <u, psi_j> psi_j, beta >= 0.
Eigen::VectorXd resolvent_apply(const SpectralOperator& op, double beta,
                                const Eigen::VectorXd& u);

/// sum_j exp(-t lambda_j^s) <u, psi_j> psi_j, t >= 0.
Eigen::VectorXd semigroup_apply(const SpectralOperator& op, double t,
                                const Eigen::VectorXd& u);

/// Spectra as CSV rows (j, lambda, lambda_s) with header.
std::string spectrum_to_csv(const SpectralOperator& op);

/// Eigenvectors as a dense text matrix: one point per line, one column per
/// mode, space-separated, 17 significant digits.
std::string eigenvectors_to_text(const SpectralOperator& op);

}  // namespace gspde
