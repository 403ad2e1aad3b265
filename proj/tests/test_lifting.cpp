#include <doctest.h>

#include <cmath>
#include <vector>

#include "gspde/lifting.hpp"
#include "gspde/rng.hpp"
#include "gspde/torus_modes.hpp"

using namespace gspde;

namespace {
constexpr double kPi = 3.14159265358979323846;

Eigen::VectorXd random_vector(long n, std::uint64_t seed) {
  const CounterRng rng(seed);
  Eigen::VectorXd u(n);
  for (long i = 0; i < n; ++i) u[i] = rng.normal(0, i);
  return u;
}

TransportPair grid_pair(int k, int q_axis = 0) {
  const TorusGrid g = build_grid(1, k);
  const QuadratureGrid q = build_quadrature(
      1, q_axis > 0 ? q_axis : default_quadrature_axis_grid(k));
  return make_transport_pair(g, q);
}
}  // namespace

TEST_CASE("lift: constants and indicators") {
  const TransportPair pair = grid_pair(4);
  const Eigen::VectorXd c = Eigen::VectorXd::Constant(4, 3.5);
  CHECK((lift(c, pair).array() - 3.5).abs().maxCoeff() == 0.0);

  Eigen::VectorXd e1(4);
  e1 << 1, 0, 0, 0;
  const Eigen::VectorXd ind = lift(e1, pair);
  for (long p = 0; p < pair.quad.size; ++p) {
    const double expect = pair.quad.nodes(p, 0) < 0.25 ? 1.0 : 0.0;
    CHECK(ind[p] == expect);
  }
}

TEST_CASE("pi lambda = id exactly, grid and voronoi") {
  const TransportPair gp = grid_pair(16);
  const PointCloud cloud = sample_point_cloud(1, 20, 13);
  const TransportPair vp =
      make_transport_pair(cloud, build_quadrature(1, 409));
  for (std::uint64_t rep = 0; rep < 100; ++rep) {
    const Eigen::VectorXd u = random_vector(16, rep);
    CHECK((project(lift(u, gp), gp) - u).cwiseAbs().maxCoeff() == 0.0);
    const Eigen::VectorXd v = random_vector(20, 1000 + rep);
    CHECK((project(lift(v, vp), vp) - v).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("grid lifting is an isometry in L^2, L^4 and sup norms") {
  const TransportPair pair = grid_pair(32);
  for (std::uint64_t rep = 0; rep < 20; ++rep) {
    const Eigen::VectorXd u = random_vector(32, rep);
    const Eigen::VectorXd lu = lift(u, pair);
    for (const double q : {2.0, 4.0,
                           std::numeric_limits<double>::infinity()}) {
      CHECK(std::fabs(lq_norm_quadrature(lu, q, pair.quad.weight) -
                      lq_norm_discrete(u, q)) < 1e-10);
    }
  }
}

TEST_CASE("projection: constants, adjointness, contraction") {
  const TransportPair pair = grid_pair(16);
  const long n = 16;
  CHECK((project(Eigen::VectorXd::Ones(pair.quad.size), pair).array() - 1.0)
            .abs()
            .maxCoeff() == 0.0);

  // <lift(u), v>_{L^2(M)} = <u, project(v)>_{L^2(mu_n)} on random pairs
  for (std::uint64_t rep = 0; rep < 100; ++rep) {
    const Eigen::VectorXd u = random_vector(n, rep);
    const Eigen::VectorXd v = random_vector(pair.quad.size, 500 + rep);
    const double lhs = lift(u, pair).dot(v) * pair.quad.weight;
    const double rhs = u.dot(project(v, pair)) / static_cast<double>(n);
    CHECK(std::fabs(lhs - rhs) < 1e-10);
  }

  // projection contracts L^q norms of smooth functions
  for (const double q : {2.0, 4.0, std::numeric_limits<double>::infinity()}) {
    Eigen::VectorXd smooth(pair.quad.size);
    for (long p = 0; p < pair.quad.size; ++p) {
      const double x = pair.quad.nodes(p, 0);
      smooth[p] = std::sin(2.0 * kPi * x) + 0.3 * std::cos(6.0 * kPi * x);
    }
    CHECK(lq_norm_discrete(project(smooth, pair), q) <=
          lq_norm_quadrature(smooth, q, pair.quad.weight) + 1e-8);
  }
}

TEST_CASE("lq norms: constants and the max norm") {
  Eigen::VectorXd u(3);
  u << 1.0, -2.0, 0.0;
  CHECK(lq_norm_discrete(u, std::numeric_limits<double>::infinity()) == 2.0);
  const Eigen::VectorXd c = Eigen::VectorXd::Constant(8, -1.25);
  for (const double q : {1.0, 2.0, 3.5,
                         std::numeric_limits<double>::infinity()}) {
    CHECK(lq_norm_discrete(c, q) == doctest::Approx(1.25));
  }
  CHECK_THROWS_AS(lq_norm_discrete(u, 0.5), std::invalid_argument);
}

TEST_CASE("approximate identity: lift(project(x)) approaches smooth x") {
  double prev = std::numeric_limits<double>::infinity();
  for (const int k : {16, 32, 64, 128}) {
    const TransportPair pair = grid_pair(k, 2048);
    Eigen::VectorXd x(pair.quad.size);
    for (long p = 0; p < pair.quad.size; ++p) {
      x[p] = std::sin(2.0 * kPi * pair.quad.nodes(p, 0));
    }
    const Eigen::VectorXd back = lift(project(x, pair), pair);
    const double err = lq_norm_quadrature(back - x, 2.0, pair.quad.weight);
    CHECK(err < prev);
    prev = err;
  }
}

TEST_CASE("lifted resolvent kernel and its norms") {
  const int k = 8;
  const TorusGrid g = build_grid(1, k);
  const TransportPair pair = grid_pair(k);
  const SpectralOperator op = eigendecompose(assemble_fd_operator(g), 1.0);

  SUBCASE("beta = 0 with all modes acts as lift-project") {
    const LiftedKernel kernel = lifted_resolvent_kernel(op, &pair, 0.0, g.n);
    const Eigen::VectorXd x = random_vector(pair.quad.size, 3);
    const Eigen::VectorXd via_kernel = apply_kernel(kernel, x);
    const Eigen::VectorXd direct = lift(project(x, pair), pair);
    CHECK((via_kernel - direct).cwiseAbs().maxCoeff() < 1e-9);
  }

  SUBCASE("rank-one norms") {
    LiftedKernel one;
    one.weight = pair.quad.weight;
    one.alpha = Eigen::VectorXd::Constant(1, 0.7);
    one.factors = lift(op.psi.col(2), pair);
    LiftedKernel zero;
    zero.weight = pair.quad.weight;
    zero.alpha = Eigen::VectorXd::Zero(1);
    zero.factors = one.factors;
    const double l2 =
        lq_norm_quadrature(one.factors.col(0), 2.0, pair.quad.weight);
    const double sup = one.factors.col(0).cwiseAbs().maxCoeff();
    CHECK(hs_norm_diff(one, zero) == doctest::Approx(0.7 * l2 * l2));
    CHECK(two_to_infty_norm_diff(one, zero) ==
          doctest::Approx(0.7 * sup * l2));
    CHECK(hs_norm_diff(one, one) == 0.0);
    CHECK(two_to_infty_norm_diff(one, one) == 0.0);
  }

  SUBCASE("kernel application matches the dense matrix oracle") {
    const LiftedKernel kn = lifted_resolvent_kernel(op, &pair, 0.5, g.n);
    Eigen::MatrixXd dense =
        Eigen::MatrixXd::Zero(pair.quad.size, pair.quad.size);
    for (long j = 0; j < g.n; ++j) {
      dense += kn.alpha[j] * kn.factors.col(j) * kn.factors.col(j).transpose();
    }
    // applied to a lifted eigenvector: alpha_i psi-tilde_i plus the
    // cross-terms coming from non-orthonormality under quadrature
    const Eigen::VectorXd lifted = lift(op.psi.col(2), pair);
    const Eigen::VectorXd via_kernel = apply_kernel(kn, lifted);
    const Eigen::VectorXd via_dense = dense * lifted * pair.quad.weight;
    CHECK((via_kernel - via_dense).cwiseAbs().maxCoeff() < 1e-9);
    CHECK((via_kernel - kn.alpha[2] * lifted).cwiseAbs().maxCoeff() < 0.05);
  }

  SUBCASE("hs norm agrees with the dense double-sum oracle") {
    const QuadratureGrid quad = pair.quad;
    const SpectralOperator cont = continuum_operator_torus(1, 6, 1.0, quad);
    const LiftedKernel kn = lifted_resolvent_kernel(op, &pair, 0.5, 6);
    const LiftedKernel ki = lifted_resolvent_kernel(cont, nullptr, 0.5, 6);
    // dense kernels on the quadrature grid
    Eigen::MatrixXd dn = Eigen::MatrixXd::Zero(quad.size, quad.size);
    for (long j = 0; j < 6; ++j) {
      dn += kn.alpha[j] * kn.factors.col(j) * kn.factors.col(j).transpose();
      dn -= ki.alpha[j] * ki.factors.col(j) * ki.factors.col(j).transpose();
    }
    const double frob =
        std::sqrt(dn.squaredNorm()) * quad.weight;  // double integral
    CHECK(hs_norm_diff(kn, ki) == doctest::Approx(frob).epsilon(1e-6));
    // sup-row norm oracle
    double sup_row = 0.0;
    for (long p = 0; p < quad.size; ++p) {
      sup_row = std::max(
          sup_row, std::sqrt(dn.row(p).squaredNorm() * quad.weight));
    }
    CHECK(two_to_infty_norm_diff(kn, ki) ==
          doctest::Approx(sup_row).epsilon(1e-6));
  }

  SUBCASE("cauchy-schwarz domination of the 2->infty norm") {
    const LiftedKernel kn = lifted_resolvent_kernel(op, &pair, 0.7, g.n);
    LiftedKernel zero = kn;
    zero.alpha.setZero();
    const double bound =
        kn.factors.cwiseAbs().maxCoeff() * kn.alpha.norm();
    CHECK(two_to_infty_norm_diff(kn, zero) <= bound * (1.0 + 1e-10));
  }

  SUBCASE("continuum kernel with only the zero mode is constant one") {
    const SpectralOperator cont = continuum_operator_torus(1, 1, 1.0, pair.quad);
    const LiftedKernel kz = lifted_resolvent_kernel(cont, nullptr, 3.0, 1);
    CHECK(kz.alpha[0] == doctest::Approx(1.0));
    CHECK((kz.factors.array() - 1.0).abs().maxCoeff() == 0.0);
  }
}

TEST_CASE("analytic grid evaluator agrees with the quadrature route") {
  const int k = 8;
  const TorusGrid g = build_grid(1, k);
  const TransportPair pair = grid_pair(k, 4096);
  const SpectralOperator op = eigendecompose(assemble_fd_operator(g), 1.0);
  const long j_count = 24;
  const SpectralOperator cont =
      continuum_operator_torus(1, j_count, 1.0, pair.quad);
  const LiftedKernel kn = lifted_resolvent_kernel(op, &pair, 0.5, g.n);
  const LiftedKernel ki = lifted_resolvent_kernel(cont, nullptr, 0.5, j_count);
  const double hs_quad = hs_norm_diff(kn, ki);
  const double ti_quad = two_to_infty_norm_diff(kn, ki);
  const ResolventGap gap = resolvent_gap_grid_1d(op, 0.5, j_count, 4096);
  CHECK(gap.hs == doctest::Approx(hs_quad).epsilon(1e-4));
  CHECK(gap.two_inf == doctest::Approx(ti_quad).epsilon(1e-4));
}

TEST_CASE("continuum tail mode count") {
  // s = 1, beta = 0.5: tail ~ 0.1013 / J, so roughly 1.01e5 modes
  const long j = continuum_modes_for_tail(1.0, 0.5, 1e-6);
  CHECK(j > 90000);
  CHECK(j < 120000);
  const long j4 = continuum_modes_for_tail(1.0, 0.5, 4e-6);
  CHECK(j4 < j);
  CHECK_THROWS_AS(continuum_modes_for_tail(1.0, 0.25, 1e-6),
                  std::invalid_argument);
}

TEST_CASE("semigroup convergence gap") {
  const TransportPair pair = grid_pair(16);
  const SpectralOperator op =
      eigendecompose(assemble_fd_operator(build_grid(1, 16)), 1.0);
  const SpectralOperator cont = continuum_operator_torus(1, 8, 1.0, pair.quad);

  SUBCASE("constants are shared eigenvectors with eigenvalue zero") {
    const Eigen::VectorXd ones = Eigen::VectorXd::Ones(pair.quad.size);
    const double gap =
        semigroup_convergence_gap(op, cont, pair, ones, {0.0, 0.5, 1.0});
    CHECK(gap < 1e-10);
  }

  SUBCASE("t = 0 reduces to the pure projection error") {
    Eigen::VectorXd x(pair.quad.size);
    for (long p = 0; p < pair.quad.size; ++p) {
      x[p] = std::sqrt(2.0) * std::sin(2.0 * kPi * pair.quad.nodes(p, 0));
    }
    const double gap = semigroup_convergence_gap(op, cont, pair, x, {0.0});
    const double proj_err = lq_norm_quadrature(
        lift(project(x, pair), pair) - x, 2.0, pair.quad.weight);
    CHECK(gap == doctest::Approx(proj_err).epsilon(1e-10));
  }

  SUBCASE("gap decreases when the grid doubles") {
    double prev = std::numeric_limits<double>::infinity();
    for (const int k : {16, 32, 64}) {
      const TransportPair p2 = grid_pair(k);
      const SpectralOperator opn =
          eigendecompose(assemble_fd_operator(build_grid(1, k)), 1.0);
      const SpectralOperator ci = continuum_operator_torus(1, 8, 1.0, p2.quad);
      Eigen::VectorXd x(p2.quad.size);
      for (long p = 0; p < p2.quad.size; ++p) {
        x[p] = std::sqrt(2.0) * std::sin(2.0 * kPi * p2.quad.nodes(p, 0));
      }
      std::vector<double> ts;
      for (int i = 0; i <= 16; ++i) ts.push_back(i / 16.0);
      const double gap = semigroup_convergence_gap(opn, ci, p2, x, ts);
      CHECK(gap < prev);
      prev = gap;
    }
  }
}

TEST_CASE("kernel norms are norms: triangle inequality on random triples") {
  const TransportPair pair = grid_pair(8);
  const SpectralOperator op =
      eigendecompose(assemble_fd_operator(build_grid(1, 8)), 1.0);
  const CounterRng rng(77);
  for (int rep = 0; rep < 5; ++rep) {
    LiftedKernel a = lifted_resolvent_kernel(op, &pair, 0.5, 8);
    LiftedKernel b = a, c = a, zero = a;
    for (long j = 0; j < 8; ++j) {
      a.alpha[j] = rng.normal(rep, j);
      b.alpha[j] = rng.normal(rep, 100 + j);
      c.alpha[j] = rng.normal(rep, 200 + j);
    }
    zero.alpha.setZero();
    auto dist_hs = [&](const LiftedKernel& x, const LiftedKernel& y) {
      return hs_norm_diff(x, y);
    };
    auto dist_ti = [&](const LiftedKernel& x, const LiftedKernel& y) {
      return two_to_infty_norm_diff(x, y);
    };
    CHECK(dist_hs(a, c) <= dist_hs(a, b) + dist_hs(b, c) + 1e-10);
    CHECK(dist_ti(a, c) <= dist_ti(a, b) + dist_ti(b, c) + 1e-10);
    CHECK(dist_hs(a, a) == 0.0);
    CHECK(dist_hs(a, zero) >= 0.0);
  }
}
