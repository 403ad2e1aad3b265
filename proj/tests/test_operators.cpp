#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "gspde/operators.hpp"
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
}  // namespace

TEST_CASE("kernel weights on four nodes at h = 0.3") {
  const TorusGrid g = build_grid(1, 4);
  const WeightMatrix wm = weight_matrix(g.nodes, 1, 0.3);
  // nu_1 = 2, so the prefactor is 3; value 3 / (4 * 0.027)
  const double expected = 3.0 / (4.0 * 0.027);
  int nonzero_offdiag = 0;
  for (long i = 0; i < 4; ++i) {
    for (long j = 0; j < 4; ++j) {
      if (i == j) continue;
      if (wm.w(i, j) != 0.0) {
        ++nonzero_offdiag;
        CHECK(wm.w(i, j) == doctest::Approx(expected).epsilon(1e-13));
      }
    }
  }
  CHECK(nonzero_offdiag == 8);  // neighbors at distance 1/4 only

  // empty kernel when h is below every pairwise distance
  const WeightMatrix tiny = weight_matrix(g.nodes, 1, 0.1);
  for (long i = 0; i < 4; ++i) {
    for (long j = 0; j < 4; ++j) {
      if (i != j) CHECK(tiny.w(i, j) == 0.0);
    }
  }
  CHECK_THROWS_AS(weight_matrix(g.nodes, 1, 0.6), std::invalid_argument);
}

TEST_CASE("weight matrix is symmetric on random clouds") {
  const PointCloud cloud = sample_point_cloud(2, 40, 9);
  const WeightMatrix wm = weight_matrix(cloud, 0.2);
  CHECK((wm.w - wm.w.transpose()).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("graph operator: constants, mass term, brute-force oracle") {
  const PointCloud cloud = sample_point_cloud(1, 12, 4);
  const WeightMatrix wm = weight_matrix(cloud, 0.3);

  const GraphOperator lap =
      assemble_graph_operator(wm, CoefficientField::laplace(), cloud.nodes);
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(12);
  CHECK((lap.matrix * ones).cwiseAbs().maxCoeff() < 1e-10);

  const GraphOperator mass = assemble_graph_operator(
      wm, CoefficientField::constants(1.0, 0.0), cloud.nodes);
  const Eigen::VectorXd u = random_vector(12, 3);
  CHECK((mass.matrix * u - u).cwiseAbs().maxCoeff() < 1e-12);

  // small cloud against a double-loop evaluation with varying coefficients
  const PointCloud small = sample_point_cloud(1, 3, 8);
  const WeightMatrix ws = weight_matrix(small, 0.45);
  CoefficientField coeff;
  coeff.tau = [](const double* x, int) { return 0.5 + x[0]; };
  coeff.kappa = [](const double* x, int) { return 1.0 + 0.5 * x[0]; };
  const GraphOperator op = assemble_graph_operator(ws, coeff, small.nodes);
  const Eigen::VectorXd v = random_vector(3, 5);
  for (long i = 0; i < 3; ++i) {
    double expect = (0.5 + small.nodes(i, 0)) * v[i];
    for (long j = 0; j < 3; ++j) {
      const double kk = std::sqrt((1.0 + 0.5 * small.nodes(i, 0)) *
                                  (1.0 + 0.5 * small.nodes(j, 0)));
      expect += ws.w(i, j) * kk * (v[i] - v[j]);
    }
    CHECK((op.matrix * v)[i] == doctest::Approx(expect).epsilon(1e-12));
  }
}

TEST_CASE("finite-difference operator stencil and spectrum") {
  const TorusGrid g = build_grid(1, 4);
  const GraphOperator op = assemble_fd_operator(g);
  Eigen::VectorXd e1(4);
  e1 << 1, 0, 0, 0;
  const Eigen::VectorXd lu = op.matrix * e1;
  CHECK(lu[0] == doctest::Approx(32.0));
  CHECK(lu[1] == doctest::Approx(-16.0));
  CHECK(lu[2] == doctest::Approx(0.0));
  CHECK(lu[3] == doctest::Approx(-16.0));
  CHECK((op.matrix * Eigen::VectorXd::Ones(4)).cwiseAbs().maxCoeff() == 0.0);

  const SpectralOperator sp = eigendecompose(op, 1.0);
  CHECK(sp.lambda[0] == doctest::Approx(0.0).epsilon(1e-10));
  CHECK(sp.lambda[1] == doctest::Approx(32.0));
  CHECK(sp.lambda[2] == doctest::Approx(32.0));
  CHECK(sp.lambda[3] == doctest::Approx(64.0));
  // closed form 4 n^2 sin^2(pi j / 2n) at j = 2
  CHECK(torus1d::fd_eigenvalue(2, 4) == doctest::Approx(32.0));
}

TEST_CASE("fd operator in two dimensions matches a stencil oracle") {
  const TorusGrid g = build_grid(2, 3);
  const GraphOperator op = assemble_fd_operator(g);
  const Eigen::VectorXd u = random_vector(g.n, 17);
  const double w = 9.0;  // n^{2/m} = k^2
  for (long a = 0; a < 3; ++a) {
    for (long b = 0; b < 3; ++b) {
      const long i = a * 3 + b;
      const double expect =
          w * (4.0 * u[i] - u[((a + 1) % 3) * 3 + b] -
               u[((a + 2) % 3) * 3 + b] - u[a * 3 + (b + 1) % 3] -
               u[a * 3 + (b + 2) % 3]);
      CHECK((op.matrix * u)[i] == doctest::Approx(expect).epsilon(1e-12));
    }
  }
}

TEST_CASE("kernel weights on the grid at h = 1/n give 3x the fd operator") {
  const TorusGrid g = build_grid(1, 16);
  const WeightMatrix wm = weight_matrix(g.nodes, 1, 1.0 / 16.0 + 1e-12);
  const GraphOperator kernel =
      assemble_graph_operator(wm, CoefficientField::laplace(), g.nodes);
  const GraphOperator fd = assemble_fd_operator(g);
  CHECK((kernel.matrix - 3.0 * fd.matrix).cwiseAbs().maxCoeff() <
        1e-9 * fd.matrix.cwiseAbs().maxCoeff());
}

TEST_CASE("eigendecomposition: normalization, reconstruction, spectrum") {
  const TorusGrid g = build_grid(1, 24);
  const GraphOperator op = assemble_fd_operator(g);
  const SpectralOperator sp = eigendecompose(op, 0.75);

  for (long j = 0; j < sp.modes(); ++j) {
    CHECK(std::fabs(sp.inner(sp.psi.col(j), sp.psi.col(j)) - 1.0) < 1e-10);
  }
  const Eigen::VectorXd u = random_vector(g.n, 2);
  Eigen::VectorXd rec = Eigen::VectorXd::Zero(g.n);
  for (long j = 0; j < sp.modes(); ++j) {
    rec += sp.lambda[j] * sp.inner(u, sp.psi.col(j)) * sp.psi.col(j);
  }
  const double scale = (op.matrix * u).cwiseAbs().maxCoeff();
  CHECK((rec - op.matrix * u).cwiseAbs().maxCoeff() < 1e-8 * scale);

  // full spectrum against the closed form, relative 1e-8
  for (long j = 1; j <= g.n; ++j) {
    const double ref = torus1d::fd_eigenvalue(j, g.n);
    CHECK(std::fabs(sp.lambda[j - 1] - ref) <=
          1e-8 * std::max(1.0, std::fabs(ref)));
  }
}

TEST_CASE("eigendecompose rejects an indefinite matrix") {
  GraphOperator bad;
  bad.n = 2;
  bad.matrix.resize(2, 2);
  bad.matrix << 1.0, 0.0, 0.0, -1.0;
  CHECK_THROWS_AS(eigendecompose(bad, 1.0), std::runtime_error);
}

TEST_CASE("continuum torus operator closed forms") {
  const QuadratureGrid q = build_quadrature(1, 256);
  const SpectralOperator sp = continuum_operator_torus(1, 8, 1.0, q);
  CHECK(sp.lambda[0] == 0.0);
  CHECK((sp.psi.col(0).array() - 1.0).abs().maxCoeff() == 0.0);
  CHECK(sp.lambda[1] == doctest::Approx(4.0 * kPi * kPi));
  for (long p = 0; p < q.size; ++p) {
    CHECK(sp.psi(p, 1) ==
          doctest::Approx(std::sqrt(2.0) * std::sin(2.0 * kPi * q.nodes(p, 0)))
              .epsilon(1e-12));
  }
  // orthonormal under the quadrature inner product
  const Eigen::MatrixXd gram = (sp.psi.transpose() * sp.psi) * sp.weight;
  CHECK((gram - Eigen::MatrixXd::Identity(8, 8)).cwiseAbs().maxCoeff() < 1e-8);

  // m = 2: smallest nonzero eigenvalue 4 pi^2 with multiplicity 4
  const QuadratureGrid q2 = build_quadrature(2, 32);
  const SpectralOperator sp2 = continuum_operator_torus(2, 9, 1.0, q2);
  CHECK(sp2.lambda[0] == 0.0);
  for (int j = 1; j <= 4; ++j) {
    CHECK(sp2.lambda[j] == doctest::Approx(4.0 * kPi * kPi));
  }
  CHECK(sp2.lambda[5] > 4.0 * kPi * kPi + 1.0);
}

TEST_CASE("weyl window for the one-dimensional spectrum") {
  for (long j = 2; j <= 64; ++j) {
    const double ratio =
        torus1d::continuum_eigenvalue(j) / static_cast<double>(j * j);
    CHECK(ratio >= kPi * kPi / 4.0 - 1e-12);
    CHECK(ratio <= kPi * kPi + 1e-12);
  }
}

TEST_CASE("fractional, resolvent and semigroup application") {
  const TorusGrid g = build_grid(1, 8);
  const SpectralOperator sp = eigendecompose(assemble_fd_operator(g), 0.5);
  const Eigen::VectorXd u = random_vector(g.n, 21);

  SUBCASE("eigenvector scaling and s = 1 consistency") {
    const Eigen::VectorXd psi2 = sp.psi.col(1);
    const double lam = sp.lambda[1];
    const Eigen::VectorXd half = fractional_apply(sp, 0.5, psi2);
    CHECK((half - std::sqrt(lam) * psi2).cwiseAbs().maxCoeff() < 1e-9);
    const Eigen::VectorXd full = fractional_apply(sp, 1.0, u);
    const GraphOperator op = assemble_fd_operator(g);
    CHECK((full - op.matrix * u).cwiseAbs().maxCoeff() <
          1e-8 * (op.matrix * u).cwiseAbs().maxCoeff());
    CHECK((fractional_apply(sp, 0.0, u) - u).cwiseAbs().maxCoeff() == 0.0);
    CHECK_THROWS_AS(fractional_apply(sp, -0.5, u), std::invalid_argument);
  }

  SUBCASE("resolvent identities") {
    CHECK((resolvent_apply(sp, 0.0, u) - u).cwiseAbs().maxCoeff() < 1e-12);
    const Eigen::VectorXd twice =
        resolvent_apply(sp, 1.0, resolvent_apply(sp, 1.0, u));
    CHECK((twice - resolvent_apply(sp, 2.0, u)).cwiseAbs().maxCoeff() < 1e-12);
    // scalar case: lambda^s = 3, beta = 1 divides by four
    SpectralOperator scal;
    scal.lambda = Eigen::VectorXd::Constant(1, 9.0);
    scal.psi = Eigen::MatrixXd::Ones(1, 1);
    scal.s = 0.5;
    scal.lambda_s = Eigen::VectorXd::Constant(1, 3.0);
    scal.kind = BasisKind::kDiscrete;
    scal.weight = 1.0;
    Eigen::VectorXd one = Eigen::VectorXd::Ones(1);
    CHECK(resolvent_apply(scal, 1.0, one)[0] == doctest::Approx(0.25));
  }

  SUBCASE("semigroup law, contraction, identities") {
    CHECK((semigroup_apply(sp, 0.0, u) - u).cwiseAbs().maxCoeff() < 1e-12);
    const Eigen::VectorXd ab =
        semigroup_apply(sp, 0.4, semigroup_apply(sp, 0.3, u));
    CHECK((ab - semigroup_apply(sp, 0.7, u)).cwiseAbs().maxCoeff() < 1e-10);
    for (const double t : {0.01, 0.3, 2.0}) {
      const Eigen::VectorXd su = semigroup_apply(sp, t, u);
      CHECK(std::sqrt(sp.inner(su, su)) <=
            std::sqrt(sp.inner(u, u)) * (1.0 + 1e-12));
    }
    CHECK_THROWS_AS(semigroup_apply(sp, -0.1, u), std::invalid_argument);
  }
}

TEST_CASE("fd semigroup is an infinity-norm contraction") {
  const TorusGrid g = build_grid(1, 32);
  for (const double s : {1.0, 0.75}) {
    const SpectralOperator sp = eigendecompose(assemble_fd_operator(g), s);
    for (const double t : {1e-3, 0.05, 1.0}) {
      for (std::uint64_t rep = 0; rep < 5; ++rep) {
        Eigen::VectorXd u = random_vector(g.n, 100 + rep);
        u /= u.cwiseAbs().maxCoeff();
        const Eigen::VectorXd su = semigroup_apply(sp, t, u);
        CHECK(su.cwiseAbs().maxCoeff() <= 1.0 + 1e-8);
      }
    }
  }
}

TEST_CASE("random-cloud spectrum improves with n (report only)") {
  // no hard bound here: the random-graph convergence theorems carry
  // unquantified constants, so only the trend is checked
  auto rel_gap = [](long n) {
    const PointCloud cloud = sample_point_cloud(1, n, 42);
    const WeightMatrix wm = weight_matrix(cloud, 0.08);
    const GraphOperator op =
        assemble_graph_operator(wm, CoefficientField::laplace(), cloud.nodes);
    const SpectralOperator sp = eigendecompose(op, 1.0);
    const double target = torus1d::continuum_eigenvalue(2);
    return std::fabs(sp.lambda[1] - target) / target;
  };
  const double coarse = rel_gap(150);
  const double fine = rel_gap(450);
  CHECK(fine < coarse);
  CHECK(fine < 0.5);
}

TEST_CASE("spectrum csv and eigenvector exports") {
  const SpectralOperator sp =
      eigendecompose(assemble_fd_operator(build_grid(1, 4)), 1.0);
  const std::string csv = spectrum_to_csv(sp);
  CHECK(csv.rfind("j,lambda,lambda_s\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 5);

  const std::string dense = eigenvectors_to_text(sp);
  CHECK(std::count(dense.begin(), dense.end(), '\n') == 4);
  CHECK(std::count(dense.begin(), dense.end(), ' ') == 12);
}
