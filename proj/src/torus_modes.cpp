#include "gspde/torus_modes.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace gspde {
namespace torus1d {

namespace {
constexpr double kPi = 3.14159265358979323846;
constexpr double kSqrt2 = 1.41421356237309504880;

// frequency of the pair containing mode j (0 for the constant)
long pair_frequency(long j) { return (j % 2 == 0) ? j / 2 : (j - 1) / 2; }
}  // namespace

double continuum_eigenvalue(long j) {
  if (j < 1) throw std::invalid_argument("mode index must be >= 1");
  if (j == 1) return 0.0;
  const double w = static_cast<double>(j % 2 == 0 ? j : j - 1) * kPi;
  return w * w;
}

double continuum_mode(long j, double x) {
  if (j == 1) return 1.0;
  if (j % 2 == 0) return kSqrt2 * std::sin(j * kPi * x);
  return kSqrt2 * std::cos((j - 1) * kPi * x);
}

double mode_integral(long j, double a, double b) {
  if (j == 1) return b - a;
  if (j % 2 == 0) {
    const double w = j * kPi;
    return kSqrt2 * (std::cos(w * a) - std::cos(w * b)) / w;
  }
  const double w = (j - 1) * kPi;
  return kSqrt2 * (std::sin(w * b) - std::sin(w * a)) / w;
}

double fd_eigenvalue(long j, long n) {
  if (j < 1 || j > n) throw std::invalid_argument("fd_eigenvalue: bad index");
  if (j == 1) return 0.0;
  const double jj = static_cast<double>(j % 2 == 0 ? j : j - 1);
  const double s = std::sin(kPi * jj / (2.0 * n));
  return 4.0 * static_cast<double>(n) * n * s * s;
}

Eigen::VectorXd fd_eigenvector(long j, long n) {
  Eigen::VectorXd v(n);
  for (long i = 1; i <= n; ++i) {
    const double x = (i - 0.5) / n;
    if (j == 1) {
      v[i - 1] = 1.0;
    } else if (j == n && n % 2 == 0) {
      v[i - 1] = (i % 2 == 0) ? 1.0 : -1.0;
    } else {
      v[i - 1] = continuum_mode(j, x);
    }
  }
  return v;
}

Eigen::MatrixXd continuum_modes_at(const Eigen::VectorXd& x, long J) {
  const long nx = x.size();
  Eigen::MatrixXd out(nx, J);
  for (long p = 0; p < nx; ++p) {
    const double c1 = std::cos(kPi * x[p]);
    const double s1 = std::sin(kPi * x[p]);
    // running sin(j pi x), cos(j pi x); resynced periodically against drift
    double sj = 0.0, cj = 1.0;  // j = 0
    for (long j = 1; j <= J; ++j) {
      const double sn = sj * c1 + cj * s1;
      const double cn = cj * c1 - sj * s1;
      sj = sn;
      cj = cn;
      if ((j & 1023) == 0) {
        sj = std::sin(kPi * j * x[p]);
        cj = std::cos(kPi * j * x[p]);
      }
      // mode j: constant / sqrt2 sin(j pi x) / sqrt2 cos((j-1) pi x)
      if (j == 1) {
        out(p, 0) = 1.0;
      } else if (j % 2 == 0) {
        out(p, j - 1) = kSqrt2 * sj;
        if (j + 1 <= J) out(p, j) = kSqrt2 * cj;  // cosine partner
      }
    }
  }
  return out;
}

Eigen::MatrixXd cell_integrals(long n, long J) {
  Eigen::MatrixXd out(n, J);
  for (long l = 0; l < n; ++l) {
    const double a = static_cast<double>(l) / n;
    const double b = static_cast<double>(l + 1) / n;
    for (long j = 1; j <= J; ++j) out(l, j - 1) = mode_integral(j, a, b);
  }
  return out;
}

}  // namespace torus1d

std::vector<TensorModeIndex> tensor_modes(int m, long J) {
  if (m < 1 || J < 1) throw std::invalid_argument("tensor_modes: bad inputs");
  // Per-axis count B large enough that the J-th smallest tensor eigenvalue
  // is below the first excluded one-axis eigenvalue.
  long B = std::max<long>(2, static_cast<long>(
      std::ceil(std::pow(static_cast<double>(J), 1.0 / m))) + 2);
  for (;;) {
    std::vector<TensorModeIndex> all;
    std::vector<long> idx(m, 1);
    for (;;) {
      TensorModeIndex t;
      t.factors = idx;
      t.lambda = 0.0;
      for (int d = 0; d < m; ++d) {
        t.lambda += torus1d::continuum_eigenvalue(idx[d]);
      }
      all.push_back(std::move(t));
      int d = m - 1;
      while (d >= 0 && ++idx[d] > B) idx[d--] = 1;
      if (d < 0) break;
    }
    std::stable_sort(all.begin(), all.end(),
                     [](const TensorModeIndex& a, const TensorModeIndex& b) {
                       if (a.lambda != b.lambda) return a.lambda < b.lambda;
                       return a.factors < b.factors;
                     });
    if (static_cast<long>(all.size()) >= J &&
        all[J - 1].lambda <= torus1d::continuum_eigenvalue(B + 1)) {
      all.resize(J);
      return all;
    }
    B *= 2;
  }
}

}  // namespace gspde
