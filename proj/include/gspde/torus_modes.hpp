#pragma once

#include <Eigen/Dense>
#include <vector>

namespace gspde {

/// Closed forms of the periodic Laplacian eigensystem on the unit torus,
/// indexed the way the rest of the code matches discrete and continuum
/// modes: mode 1 is the constant, even modes are sines, odd modes (> 1)
/// the cosine partner of the preceding sine.
namespace torus1d {

/// lambda_inf^(j): 0, then (2 ceil((j-1)/2) pi)^2 in sine/cosine pairs.
double continuum_eigenvalue(long j);

/// L^2-normalized eigenfunction value at x.
double continuum_mode(long j, double x);

/// Exact integral of mode j over [a, b].
double mode_integral(long j, double a, double b);

/// Eigenvalue of the n-point periodic finite-difference Laplacian paired
/// with continuum mode j: 4 n^2 sin^2(pi j' / (2n)), j' the even member
/// of the pair.
double fd_eigenvalue(long j, long n);

/// Discrete eigenvector values at the grid nodes (paper pairing): constant,
/// interleaved sines/cosines, alternating +-1 top mode for even n.
Eigen::VectorXd fd_eigenvector(long j, long n);

/// Values of modes 1..J at the points x: matrix |x| x J. Uses trig
/// recurrences so J in the 1e5 range stays cheap.
Eigen::MatrixXd continuum_modes_at(const Eigen::VectorXd& x, long J);

/// Exact cell integrals: entry (l, j) = integral of mode j+1 over the grid
/// cell [l/n, (l+1)/n).
Eigen::MatrixXd cell_integrals(long n, long J);

}  // namespace torus1d

/// Tensorized continuum eigenpairs on the m-torus: the J smallest
/// eigenvalues (sums over axes) with their factor indices, sorted
/// nondecreasing with deterministic tie order.
struct TensorModeIndex {
  double lambda;
  std::vector<long> factors;  // per-axis 1-d mode index
};

std::vector<TensorModeIndex> tensor_modes(int m, long J);

}  // namespace gspde
