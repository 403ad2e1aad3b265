#include "gspde/lifting.hpp"

#include <cmath>
#include <stdexcept>

#include "gspde/torus_modes.hpp"

namespace gspde {

TransportPair make_transport_pair(const TorusGrid& grid,
                                  const QuadratureGrid& quad) {
  return TransportPair{build_transport_map_grid(grid, quad), quad};
}

TransportPair make_transport_pair(const PointCloud& cloud,
                                  const QuadratureGrid& quad) {
  return TransportPair{build_transport_map_voronoi(cloud, quad), quad};
}

Eigen::VectorXd lift(const Eigen::VectorXd& u_nodal,
                     const TransportPair& pair) {
  if (u_nodal.size() != pair.map.n_nodes) {
    throw std::invalid_argument("lift: size mismatch");
  }
  Eigen::VectorXd out(pair.quad.size);
  for (long p = 0; p < pair.quad.size; ++p) {
    out[p] = u_nodal[pair.map.cell_of[p]];
  }
  return out;
}

Eigen::VectorXd project(const Eigen::VectorXd& u_quad,
                        const TransportPair& pair) {
  if (u_quad.size() != pair.quad.size) {
    throw std::invalid_argument("project: size mismatch");
  }
  const long n = pair.map.n_nodes;
  // Cell means accumulated against the first sample of each cell, so that a
  // lifted vector projects back to itself without rounding: Pi Lambda = id.
  std::vector<double> base(n, 0.0), delta(n, 0.0);
  std::vector<long> count(n, 0);
  for (long p = 0; p < pair.quad.size; ++p) {
    const long j = pair.map.cell_of[p];
    if (count[j] == 0) {
      base[j] = u_quad[p];
    } else {
      delta[j] += u_quad[p] - base[j];
    }
    ++count[j];
  }
  Eigen::VectorXd out(n);
  for (long j = 0; j < n; ++j) {
    if (count[j] == 0) {
      throw std::runtime_error(
          "project: empty cell, quadrature resolution too coarse");
    }
    out[j] = base[j] + delta[j] / static_cast<double>(count[j]);
  }
  return out;
}

namespace {

double lq_norm(const Eigen::VectorXd& u, double q, double weight) {
  if (std::isinf(q)) return u.cwiseAbs().maxCoeff();
  if (q < 1.0) throw std::invalid_argument("lq_norm: q must be >= 1");
  if (q == 2.0) return std::sqrt(u.squaredNorm() * weight);
  return std::pow(u.cwiseAbs().array().pow(q).sum() * weight, 1.0 / q);
}

}  // namespace

double lq_norm_discrete(const Eigen::VectorXd& u, double q) {
  return lq_norm(u, q, 1.0 / static_cast<double>(u.size()));
}

double lq_norm_quadrature(const Eigen::VectorXd& u, double q, double weight) {
  return lq_norm(u, q, weight);
}

LiftedKernel lifted_resolvent_kernel(const SpectralOperator& op,
                                     const TransportPair* pair, double beta,
                                     long j_count) {
  if (j_count > op.modes()) {
    throw std::invalid_argument("lifted_resolvent_kernel: j_count too large");
  }
  LiftedKernel k;
  k.alpha = (1.0 + op.lambda_s.head(j_count).array()).pow(-beta).matrix();
  if (op.kind == BasisKind::kDiscrete) {
    if (pair == nullptr) {
      throw std::invalid_argument(
          "lifted_resolvent_kernel: discrete operator needs a transport pair");
    }
    k.weight = pair->quad.weight;
    k.factors.resize(pair->quad.size, j_count);
    for (long j = 0; j < j_count; ++j) {
      k.factors.col(j) = lift(op.psi.col(j), *pair);
    }
  } else {
    k.weight = op.weight;
    k.factors = op.psi.leftCols(j_count);
  }
  return k;
}

Eigen::VectorXd apply_kernel(const LiftedKernel& kernel,
                             const Eigen::VectorXd& u_quad) {
  const Eigen::VectorXd coef =
      (kernel.factors.transpose() * u_quad) * kernel.weight;
  return kernel.factors * kernel.alpha.cwiseProduct(coef);
}

namespace {

void check_same_grid(const LiftedKernel& k1, const LiftedKernel& k2) {
  if (k1.factors.rows() != k2.factors.rows() || k1.weight != k2.weight) {
    throw std::invalid_argument("kernel norms: quadrature grids differ");
  }
}

}  // namespace

double hs_norm_diff(const LiftedKernel& k1, const LiftedKernel& k2) {
  check_same_grid(k1, k2);
  const double w = k1.weight;
  const Eigen::MatrixXd g11 = (k1.factors.transpose() * k1.factors) * w;
  const Eigen::MatrixXd g22 = (k2.factors.transpose() * k2.factors) * w;
  const Eigen::MatrixXd g12 = (k1.factors.transpose() * k2.factors) * w;
  const auto& a = k1.alpha;
  const auto& b = k2.alpha;
  const double t11 = a.transpose() * g11.cwiseProduct(g11) * a;
  const double t22 = b.transpose() * g22.cwiseProduct(g22) * b;
  const double t12 = a.transpose() * g12.cwiseProduct(g12) * b;
  return std::sqrt(std::max(t11 + t22 - 2.0 * t12, 0.0));
}

double two_to_infty_norm_diff(const LiftedKernel& k1, const LiftedKernel& k2) {
  check_same_grid(k1, k2);
  const double w = k1.weight;
  const Eigen::MatrixXd g11 = (k1.factors.transpose() * k1.factors) * w;
  const Eigen::MatrixXd g22 = (k2.factors.transpose() * k2.factors) * w;
  const Eigen::MatrixXd g12 = (k1.factors.transpose() * k2.factors) * w;
  // row functions: g(x) = ||D(x, .)||_{L^2}^2 from the factored Grams
  const Eigen::MatrixXd u = k1.factors * k1.alpha.asDiagonal();
  const Eigen::MatrixXd v = k2.factors * k2.alpha.asDiagonal();
  Eigen::ArrayXd g = ((u * g11).cwiseProduct(u)).rowwise().sum().array() -
                     2.0 * ((u * g12).cwiseProduct(v)).rowwise().sum().array() +
                     ((v * g22).cwiseProduct(v)).rowwise().sum().array();
  return std::sqrt(std::max(g.maxCoeff(), 0.0));
}

double semigroup_convergence_gap(const SpectralOperator& op_n,
                                 const SpectralOperator& op_inf,
                                 const TransportPair& pair,
                                 const Eigen::VectorXd& x_quad,
                                 const std::vector<double>& t_grid,
                                 double q) {
  const Eigen::VectorXd coef_n = op_n.to_coefficients(project(x_quad, pair));
  const Eigen::VectorXd coef_inf = op_inf.to_coefficients(x_quad);
  double gap = 0.0;
  for (const double t : t_grid) {
    const Eigen::VectorXd un = op_n.from_coefficients(
        ((-t * op_n.lambda_s.array()).exp() * coef_n.array()).matrix());
    const Eigen::VectorXd uinf = op_inf.from_coefficients(
        ((-t * op_inf.lambda_s.array()).exp() * coef_inf.array()).matrix());
    const Eigen::VectorXd diff = lift(un, pair) - uinf;
    gap = std::max(gap, lq_norm_quadrature(diff, q, pair.quad.weight));
  }
  return gap;
}

namespace {

constexpr double kTorusPi = 3.14159265358979323846;

double resolvent_pair_term(long r, double s, double beta) {
  const double lam = std::pow(2.0 * kTorusPi * static_cast<double>(r), 2.0);
  return std::pow(1.0 + std::pow(lam, s), -2.0 * beta);
}

// Upper estimate of sum over pairs r' > r of 2 (1 + lambda_{r'}^s)^{-2 beta}:
// ten thousand explicit terms, then the integral majorant of the power tail.
double tail_beyond_pairs(long r, double s, double beta) {
  const double p = 4.0 * s * beta;  // > 1 for convergence
  const long explicit_terms = 10000;
  double acc = 0.0;
  for (long rp = r + 1; rp <= r + explicit_terms; ++rp) {
    acc += 2.0 * resolvent_pair_term(rp, s, beta);
  }
  const double a = static_cast<double>(r + explicit_terms);
  acc += 2.0 * std::pow(4.0 * kTorusPi * kTorusPi, -2.0 * s * beta) *
         std::pow(a, 1.0 - p) / (p - 1.0);
  return acc;
}

}  // namespace

double continuum_tail(long j_count, double s, double beta) {
  if (!(4.0 * s * beta > 1.0)) {
    throw std::invalid_argument("continuum tail diverges: need 4 s beta > 1");
  }
  const long rdone = (j_count % 2 == 1) ? (j_count - 1) / 2 : j_count / 2;
  double tail = tail_beyond_pairs(rdone, s, beta);
  if (j_count % 2 == 0) tail += resolvent_pair_term(rdone, s, beta);
  return tail;
}

long continuum_modes_for_tail(double s, double beta, double target) {
  if (!(4.0 * s * beta > 1.0)) {
    throw std::invalid_argument("continuum tail diverges: need 4 s beta > 1");
  }
  // smallest complete-pair count R with tail < target, found by doubling
  // followed by bisection (the tail estimate is decreasing in R)
  long hi = 1;
  while (tail_beyond_pairs(hi, s, beta) >= target) {
    hi *= 2;
    if (hi > (1l << 40)) {
      throw std::runtime_error("continuum_modes_for_tail: target unreachable");
    }
  }
  long lo = hi / 2;  // tail(lo) >= target or lo == 0
  while (hi - lo > 1) {
    const long mid = lo + (hi - lo) / 2;
    if (tail_beyond_pairs(mid, s, beta) < target) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return 2 * hi + 1;  // pairs 1..hi retained, plus the constant mode
}

ResolventGap resolvent_gap_grid_1d(const SpectralOperator& op_n, double beta,
                                   long j_count, int q_scan) {
  if (op_n.kind != BasisKind::kDiscrete) {
    throw std::invalid_argument("resolvent_gap_grid_1d: discrete op expected");
  }
  const long n = op_n.points();
  const double s = op_n.s;
  const Eigen::VectorXd c =
      (1.0 + op_n.lambda_s.array()).pow(-beta).matrix();
  const Eigen::MatrixXd& psi = op_n.psi;
  const Eigen::MatrixXd psi_c = psi * c.asDiagonal();

  // per-cell constant part of g(x): lifted eigenvectors are orthonormal in
  // L^2 of the torus, so no cross Gram is needed among them
  const Eigen::VectorXd c2 = c.cwiseProduct(c);
  const Eigen::VectorXd cell_term = psi.cwiseProduct(psi) * c2;

  Eigen::VectorXd scan_x(q_scan);
  std::vector<long> scan_cell(q_scan);
  for (int p = 0; p < q_scan; ++p) {
    scan_x[p] = (p + 0.5) / q_scan;
    long l = static_cast<long>(scan_x[p] * n);
    scan_cell[p] = std::min(l, n - 1);
  }
  Eigen::ArrayXd g(q_scan);
  for (int p = 0; p < q_scan; ++p) g[p] = cell_term[scan_cell[p]];

  constexpr double kPi = 3.14159265358979323846;
  constexpr double kSqrt2 = 1.41421356237309504880;
  double sum_a2 = 0.0;
  double hs_cross = 0.0;
  const long block = 4096;
  Eigen::VectorXd a_blk(block);
  for (long j0 = 1; j0 <= j_count; j0 += block) {
    const long j1 = std::min(j0 + block - 1, j_count);
    const long bs = j1 - j0 + 1;
    Eigen::MatrixXd iblk(n, bs);
    for (long l = 0; l < n; ++l) {
      const double lo = static_cast<double>(l) / n;
      const double hi = static_cast<double>(l + 1) / n;
      for (long j = j0; j <= j1; ++j) {
        iblk(l, j - j0) = torus1d::mode_integral(j, lo, hi);
      }
    }
    for (long j = j0; j <= j1; ++j) {
      const double lam = torus1d::continuum_eigenvalue(j);
      const double lam_s =
          (s == 0.0) ? 1.0 : (lam > 0.0 ? std::pow(lam, s) : 0.0);
      a_blk[j - j0] = std::pow(1.0 + lam_s, -beta);
    }
    const auto a = a_blk.head(bs);
    sum_a2 += a.squaredNorm();
    const Eigen::MatrixXd mblk = psi.transpose() * iblk;  // <lift psi_i, mode_j>
    hs_cross += (mblk.cwiseProduct(mblk).transpose() * c).dot(a);
    const Eigen::MatrixXd bblk = psi_c * mblk;  // n x bs cross coefficients
    for (int p = 0; p < q_scan; ++p) {
      const double x = scan_x[p];
      const long l = scan_cell[p];
      const double c1 = std::cos(kPi * x);
      const double s1 = std::sin(kPi * x);
      double sj = std::sin(kPi * (j0 - 1) * x);
      double cj = std::cos(kPi * (j0 - 1) * x);
      double cross = 0.0, diag = 0.0;
      for (long j = j0; j <= j1; ++j) {
        const double sn = sj * c1 + cj * s1;
        const double cn = cj * c1 - sj * s1;
        sj = sn;
        cj = cn;
        double mode;
        if (j == 1) {
          mode = 1.0;
        } else if (j % 2 == 0) {
          mode = kSqrt2 * sj;
        } else {
          // cos((j-1) pi x): running angle is j pi x, step one back
          mode = kSqrt2 * (cj * c1 + sj * s1);
        }
        const double aj = a_blk[j - j0];
        cross += aj * bblk(l, j - j0) * mode;
        diag += aj * aj * mode * mode;
      }
      g[p] += -2.0 * cross + diag;
    }
  }

  ResolventGap out;
  out.j_count = j_count;
  const double sum_c2 = c.squaredNorm();
  out.hs = std::sqrt(std::max(sum_c2 + sum_a2 - 2.0 * hs_cross, 0.0));
  out.two_inf = std::sqrt(std::max(g.maxCoeff(), 0.0));
  // closed-form tail beyond j_count (pairs share eigenvalues)
  if (4.0 * s * beta > 1.0) out.tail = continuum_tail(j_count, s, beta);
  return out;
}

}  // namespace gspde
