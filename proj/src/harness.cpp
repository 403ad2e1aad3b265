#include "gspde/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <limits>
#include <mutex>
#include <numeric>
#include <stdexcept>
#include <thread>

#include "gspde/lifting.hpp"
#include "gspde/torus_modes.hpp"

namespace gspde {

namespace {

constexpr double kPi = 3.14159265358979323846;

std::string fmt(const char* pattern, ...) {
  char buf[512];
  va_list args;
  va_start(args, pattern);
  std::vsnprintf(buf, sizeof(buf), pattern, args);
  va_end(args);
  return buf;
}

std::string hex64(std::uint64_t v) {
  char buf[24];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(v));
  return buf;
}

void run_paths(long paths, int threads, const std::function<void(long)>& body) {
  threads = std::max(1, threads);
  if (threads == 1 || paths < 2) {
    for (long p = 0; p < paths; ++p) body(p);
    return;
  }
  std::vector<std::thread> pool;
  std::atomic<long> next{0};
  for (int t = 0; t < threads; ++t) {
    pool.emplace_back([&]() {
      for (;;) {
        const long p = next.fetch_add(1);
        if (p >= paths) return;
        body(p);
      }
    });
  }
  for (auto& th : pool) th.join();
}

McEstimate summarize(const std::vector<double>& values, std::uint64_t seed) {
  McEstimate e;
  e.paths = static_cast<long>(values.size());
  e.seed = seed;
  double mean = 0.0;
  for (const double v : values) mean += v;
  mean /= static_cast<double>(e.paths);
  double var = 0.0;
  for (const double v : values) var += (v - mean) * (v - mean);
  var /= static_cast<double>(e.paths - 1);
  e.mean = mean;
  e.std_error = std::sqrt(var / static_cast<double>(e.paths));
  return e;
}

}  // namespace

double fit_rate(const RateTable& table, double* residual_rms) {
  std::vector<double> xs, ys;
  for (const auto& row : table.rows) {
    if (row.error > 0.0) {
      xs.push_back(std::log(row.n));
      ys.push_back(std::log(row.error));
    }
  }
  if (xs.size() < 3) {
    throw std::invalid_argument(
        "fit_rate: need at least 3 rows with positive errors");
  }
  const double n = static_cast<double>(xs.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sx += xs[i];
    sy += ys[i];
    sxx += xs[i] * xs[i];
    sxy += xs[i] * ys[i];
  }
  const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  if (residual_rms != nullptr) {
    const double intercept = (sy - slope * sx) / n;
    double acc = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      const double r = ys[i] - (intercept + slope * xs[i]);
      acc += r * r;
    }
    *residual_rms = std::sqrt(acc / n);
  }
  return slope;
}

Eigen::MatrixXd align_eigenvectors(const SpectralOperator& op,
                                   const Eigen::MatrixXd& targets,
                                   double cluster_tol) {
  const long jt = targets.cols();
  if (targets.rows() != op.points() || jt > op.modes()) {
    throw std::invalid_argument("align_eigenvectors: shape mismatch");
  }
  Eigen::MatrixXd aligned(op.points(), jt);
  long a = 0;
  while (a < jt) {
    long b = a + 1;
    while (b < op.modes() && b < jt &&
           std::fabs(op.lambda[b] - op.lambda[b - 1]) <=
               cluster_tol * (1.0 + std::fabs(op.lambda[b]))) {
      ++b;
    }
    const long d = b - a;
    const Eigen::MatrixXd u = op.psi.middleCols(a, d);
    const Eigen::MatrixXd g = targets.middleCols(a, d);
    if (d == 1) {
      const double dot = op.inner(u.col(0), g.col(0));
      aligned.col(a) = dot >= 0.0 ? u.col(0) : Eigen::VectorXd(-u.col(0));
    } else {
      const Eigen::MatrixXd cross = (u.transpose() * g) * op.weight;
      Eigen::JacobiSVD<Eigen::MatrixXd> svd(
          cross, Eigen::ComputeFullU | Eigen::ComputeFullV);
      aligned.middleCols(a, d) =
          u * (svd.matrixU() * svd.matrixV().transpose());
    }
    a = b;
  }
  return aligned;
}

ExperimentResult spectral_convergence_experiment(int m,
                                                 const std::vector<int>& k_list,
                                                 int j_max) {
  if (m != 1) {
    throw std::invalid_argument(
        "spectral experiment: closed forms are one-dimensional (m = 1)");
  }
  if (k_list.empty() || j_max < 1) {
    throw std::invalid_argument("spectral experiment: empty inputs");
  }
  const int k_min = *std::min_element(k_list.begin(), k_list.end());
  if (j_max >= k_min - 1) {
    throw std::invalid_argument("spectral experiment: need j_max < min(k) - 1");
  }
  ExperimentResult res;
  res.name = "spectra";
  res.csv.columns = {"n",          "j",         "lambda_n", "lambda_inf",
                     "lambda_err", "lambda_bound", "psi_err", "psi_bound"};
  // complete the sine/cosine pair so cluster rotations are well posed
  const long jt = (j_max % 2 == 0) ? j_max + 1 : j_max;

  std::map<int, RateTable> lam_tables;  // per mode index
  for (const int k : k_list) {
    const TorusGrid grid = build_grid(1, k);
    const SpectralOperator op = eigendecompose(assemble_fd_operator(grid), 1.0);
    const QuadratureGrid quad =
        build_quadrature(1, default_quadrature_axis_grid(k));
    const TransportPair pair = make_transport_pair(grid, quad);

    Eigen::MatrixXd targets(grid.n, jt);
    for (long j = 1; j <= jt; ++j) {
      for (long i = 0; i < grid.n; ++i) {
        targets(i, j - 1) = torus1d::continuum_mode(j, grid.nodes(i, 0));
      }
    }
    const Eigen::MatrixXd aligned = align_eigenvectors(op, targets);
    const Eigen::MatrixXd modes_q =
        torus1d::continuum_modes_at(quad.nodes.col(0), jt);

    const double n = static_cast<double>(grid.n);
    for (int j = 1; j <= j_max; ++j) {
      const double lam_inf = torus1d::continuum_eigenvalue(j);
      const double lam_n = op.lambda[j - 1];
      const double lam_err = lam_inf - lam_n;
      const double lam_bound =
          std::pow(static_cast<double>(j), 4.0) * std::pow(kPi, 4.0) /
          (12.0 * n * n);
      const Eigen::VectorXd lifted = lift(aligned.col(j - 1), pair);
      const double psi_err =
          (modes_q.col(j - 1) - lifted).cwiseAbs().maxCoeff();
      const double psi_bound = 0.5 * std::sqrt(2.0) * j * kPi / n;

      res.csv.rows.push_back({n, static_cast<double>(j), lam_n, lam_inf,
                              lam_err, lam_bound, psi_err, psi_bound});
      res.lines.push_back(fmt(
          "n=%-4ld j=%d lambda_err=%.6g (bound %.6g) psi_err=%.6g (bound %.6g)",
          grid.n, j, lam_err, lam_bound, psi_err, psi_bound));
      lam_tables[j].rows.push_back(
          {n, lam_err, lam_bound, std::nullopt});

      if (lam_err < -1e-9 * (1.0 + lam_inf)) {
        res.note_failure(fmt("n=%ld j=%d: negative eigenvalue error %.3e",
                             grid.n, j, lam_err));
      }
      if (lam_err > lam_bound * (1.0 + 1e-12) + 1e-12) {
        res.note_failure(fmt("n=%ld j=%d: eigenvalue error %.6g above bound %.6g",
                             grid.n, j, lam_err, lam_bound));
      }
      if (psi_err > psi_bound + 1e-6) {
        res.note_failure(fmt("n=%ld j=%d: eigenfunction error %.6g above bound %.6g",
                             grid.n, j, psi_err, psi_bound));
      }
    }
  }
  for (auto& [j, table] : lam_tables) {
    table.label = fmt("lambda_err_j%d", j);
    bool positive = true;
    for (const auto& row : table.rows) positive = positive && row.error > 0.0;
    if (positive && table.rows.size() >= 3) {
      double residual = 0.0;
      table.slope = fit_rate(table, &residual);
      table.meta["residual_rms"] = format_value(residual);
      res.manifest[fmt("slope.lambda_err.j%d", j)] =
          format_value(*table.slope);
      res.manifest[fmt("slope.lambda_err.j%d.residual_rms", j)] =
          format_value(residual);
    }
    res.tables.push_back(table);
  }
  res.manifest["j_max"] = std::to_string(j_max);
  return res;
}

ExperimentResult resolvent_convergence_experiment(
    const std::vector<int>& k_list, double s, double beta, long j_modes) {
  if (!(4.0 * s * beta > 1.0)) {
    throw std::invalid_argument(
        "resolvent experiment: need beta > m / (4 s) = 1 / (4 s)");
  }
  if (j_modes == 0) j_modes = continuum_modes_for_tail(s, beta, 1e-6);
  ExperimentResult res;
  res.name = "resolvent";
  res.csv.columns = {"n", "beta", "J", "hs_norm", "two_inf_norm"};
  res.manifest["s"] = format_value(s);
  res.manifest["beta"] = format_value(beta);
  res.manifest["J"] = std::to_string(j_modes);

  RateTable hs_table{"hs", {}, std::nullopt, {}};
  RateTable ti_table{"two_inf", {}, std::nullopt, {}};
  for (const int k : k_list) {
    const TorusGrid grid = build_grid(1, k);
    const SpectralOperator op = eigendecompose(assemble_fd_operator(grid), s);
    const ResolventGap gap = resolvent_gap_grid_1d(
        op, beta, j_modes, default_quadrature_axis_grid(k));
    res.manifest["tail"] = format_value(gap.tail);
    const double n = static_cast<double>(grid.n);
    res.csv.rows.push_back({n, beta, static_cast<double>(j_modes), gap.hs,
                            gap.two_inf});
    res.lines.push_back(fmt("n=%-4ld hs=%.8g two_inf=%.8g (tail %.3g)", grid.n,
                            gap.hs, gap.two_inf, gap.tail));
    hs_table.rows.push_back({n, gap.hs, std::nullopt, std::nullopt});
    ti_table.rows.push_back({n, gap.two_inf, std::nullopt, std::nullopt});
  }
  // monotone decrease across doublings; one non-strict step of <= 5% allowed
  for (auto* table : {&hs_table, &ti_table}) {
    int slack_steps = 0;
    for (std::size_t i = 1; i < table->rows.size(); ++i) {
      const double prev = table->rows[i - 1].error;
      const double cur = table->rows[i].error;
      table->rows[i].ratio = cur / prev;
      if (cur < prev) continue;
      if (cur <= 1.05 * prev && slack_steps == 0) {
        ++slack_steps;
        continue;
      }
      res.note_failure(fmt("%s norm fails to decrease at n=%g (%.6g -> %.6g)",
                           table->label.c_str(), table->rows[i].n, prev, cur));
    }
    if (table->rows.size() >= 3) {
      double residual = 0.0;
      table->slope = fit_rate(*table, &residual);
      table->meta["residual_rms"] = format_value(residual);
      res.manifest["slope." + table->label] = format_value(*table->slope);
      res.manifest["slope." + table->label + ".residual_rms"] =
          format_value(residual);
    }
    res.tables.push_back(*table);
  }
  return res;
}

ExperimentResult ultracontractivity_experiment(const std::vector<int>& k_list,
                                               double s, double q, double beta,
                                               const std::vector<double>& t_grid) {
  const bool q_inf = std::isinf(q);
  if (!q_inf && !(4.0 * s * beta > 1.0)) {
    throw std::invalid_argument("ultracontractivity: need beta > 1 / (4 s)");
  }
  if (t_grid.empty()) {
    throw std::invalid_argument("ultracontractivity: empty t grid");
  }
  ExperimentResult res;
  res.name = "ultra";
  res.csv.columns = {"n", "q", "beta", "constant"};
  res.manifest["s"] = format_value(s);
  res.manifest["q"] = q_inf ? "inf" : format_value(q);
  res.manifest["beta"] = format_value(beta);

  std::vector<double> constants;
  for (const int k : k_list) {
    const TorusGrid grid = build_grid(1, k);
    const SpectralOperator op = eigendecompose(assemble_fd_operator(grid), s);
    const long n = grid.n;
    const double qconj = q_inf ? 1.0 : q / (q - 1.0);
    double best = 0.0;
    for (const double t : t_grid) {
      // kernel of S_n(t) against the empirical measure
      const Eigen::VectorXd decay = (-t * op.lambda_s.array()).exp();
      const Eigen::MatrixXd kt =
          op.psi * decay.asDiagonal() * op.psi.transpose();
      double norm_t = 0.0;
      for (long i = 0; i < n; ++i) {
        norm_t = std::max(
            norm_t, lq_norm_discrete(kt.row(i).transpose(), qconj));
      }
      if (q_inf && norm_t > 1.0 + 1e-8) {
        res.note_failure(
            fmt("n=%ld t=%.4g: sup-norm bound violated (%.12g)", n, t, norm_t));
      }
      const double weight = q_inf ? 1.0 : std::pow(t, 2.0 * beta / q);
      best = std::max(best, weight * norm_t);
    }
    constants.push_back(best);
    res.csv.rows.push_back(
        {static_cast<double>(n), q_inf ? -1.0 : q, beta, best});
    res.lines.push_back(fmt("n=%-4ld constant=%.8g", n, best));
  }
  const double lo = *std::min_element(constants.begin(), constants.end());
  const double hi = *std::max_element(constants.begin(), constants.end());
  res.manifest["constant_ratio"] = format_value(hi / lo);
  if (hi / lo > 3.0) {
    res.note_failure(
        fmt("constants spread too wide across grids: max/min = %.4g", hi / lo));
  }
  return res;
}

ExperimentResult semigroup_experiment(const std::vector<int>& k_list, double s,
                                      double t_max, int t_count, long j_inf,
                                      double ratio_bound) {
  ExperimentResult res;
  res.name = "semigroup";
  res.csv.columns = {"n", "gap", "ratio"};
  res.manifest["s"] = format_value(s);
  res.manifest["x"] = "sqrt2*sin(2*pi*x)";
  std::vector<double> t_grid(t_count);
  for (int i = 0; i < t_count; ++i) {
    t_grid[i] = t_max * static_cast<double>(i) / (t_count - 1);
  }
  RateTable table{"tk_gap", {}, std::nullopt, {}};
  for (const int k : k_list) {
    const TorusGrid grid = build_grid(1, k);
    const SpectralOperator op = eigendecompose(assemble_fd_operator(grid), s);
    const QuadratureGrid quad =
        build_quadrature(1, default_quadrature_axis_grid(k));
    const TransportPair pair = make_transport_pair(grid, quad);
    const SpectralOperator op_inf = continuum_operator_torus(1, j_inf, s, quad);
    Eigen::VectorXd x(quad.size);
    for (long p = 0; p < quad.size; ++p) {
      x[p] = std::sqrt(2.0) * std::sin(2.0 * kPi * quad.nodes(p, 0));
    }
    const double gap = semigroup_convergence_gap(op, op_inf, pair, x, t_grid);
    double ratio = std::numeric_limits<double>::quiet_NaN();
    if (!table.rows.empty()) {
      ratio = gap / table.rows.back().error;
      if (!(ratio <= ratio_bound)) {
        res.note_failure(fmt("gap ratio %.4g at n=%ld exceeds %.3g", ratio,
                             grid.n, ratio_bound));
      }
    }
    table.rows.push_back({static_cast<double>(grid.n), gap, std::nullopt,
                          table.rows.empty()
                              ? std::optional<double>()
                              : std::optional<double>(ratio)});
    res.csv.rows.push_back({static_cast<double>(grid.n), gap, ratio});
    res.lines.push_back(fmt("n=%-4ld gap=%.8g ratio=%.4g", grid.n, gap, ratio));
  }
  if (table.rows.size() >= 3) {
    double residual = 0.0;
    table.slope = fit_rate(table, &residual);
    table.meta["residual_rms"] = format_value(residual);
    res.manifest["slope." + table.label] = format_value(*table.slope);
    res.manifest["slope." + table.label + ".residual_rms"] =
        format_value(residual);
  }
  res.tables.push_back(table);
  return res;
}

SpectralOperator scalar_mode_operator(double lambda, double s) {
  SpectralOperator op;
  op.lambda = Eigen::VectorXd::Constant(1, lambda);
  op.psi = Eigen::MatrixXd::Ones(1, 1);
  op.s = s;
  op.lambda_s = Eigen::VectorXd::Constant(
      1, lambda > 0.0 ? std::pow(lambda, s) : 0.0);
  op.kind = BasisKind::kDiscrete;
  op.weight = 1.0;
  return op;
}

namespace {

// Shared machinery of the coupled Monte Carlo experiments.
struct CoupledSetup {
  std::vector<SpectralOperator> ops;        // one per grid, reference last
  std::vector<Eigen::MatrixXd> mixing;      // n x J per grid
  std::vector<std::vector<long>> ref_map;   // reference cell -> grid cell
  std::vector<Eigen::VectorXd> initial;     // nodal per grid
  WienerRepresentation noise;
};

CoupledSetup build_coupled_setup(const McExperimentParams& p) {
  if (p.k_list.size() < 2) {
    throw std::invalid_argument("coupled experiment: need at least two grids");
  }
  const int k_ref = p.k_list.back();
  for (const int k : p.k_list) {
    if (k < 2 || k_ref % k != 0) {
      throw std::invalid_argument(
          "coupled experiment: every k must divide the reference k");
    }
  }
  CoupledSetup setup;
  const QuadratureGrid quad =
      build_quadrature(1, default_quadrature_axis_grid(k_ref));
  const SpectralOperator op_inf =
      continuum_operator_torus(1, p.j_modes, p.s, quad);
  Eigen::VectorXd xi_quad(quad.size);
  for (long i = 0; i < quad.size; ++i) {
    xi_quad[i] = p.xi_amplitude * std::sin(2.0 * kPi * quad.nodes(i, 0));
  }
  for (const int k : p.k_list) {
    const TorusGrid grid = build_grid(1, k);
    SpectralOperator op = eigendecompose(assemble_fd_operator(grid), p.s);
    const TransportPair pair = make_transport_pair(grid, quad);
    setup.mixing.push_back(project_noise(op, op_inf, pair, p.j_modes).mixing);
    setup.initial.push_back(project(xi_quad, pair));
    std::vector<long> map(static_cast<std::size_t>(k_ref));
    for (long r = 0; r < k_ref; ++r) map[r] = r * k / k_ref;
    setup.ref_map.push_back(std::move(map));
    setup.ops.push_back(std::move(op));
  }
  setup.noise = generate_noise(p.j_modes, p.horizon, p.steps, p.seed,
                               BasisKind::kContinuum);
  return setup;
}

std::uint64_t noise_fingerprint(const WienerRepresentation& w) {
  return fnv1a64(fmt("seed=%llu;J=%ld;K=%ld;T=%.17g",
                     static_cast<unsigned long long>(w.seed), w.j_modes,
                     w.steps, w.horizon));
}

}  // namespace

ExperimentResult ou_convergence_experiment(const McExperimentParams& params) {
  return allen_cahn_convergence_experiment(params, /*with_drift=*/false);
}

ExperimentResult allen_cahn_convergence_experiment(
    const McExperimentParams& p, bool with_drift) {
  ExperimentResult res;
  res.name = with_drift ? "allen-cahn" : "ou";
  res.csv.columns = with_drift
                        ? std::vector<std::string>{"n", "error", "std_error",
                                                   "blowups"}
                        : std::vector<std::string>{"n", "error", "std_error"};
  const CoupledSetup setup = build_coupled_setup(p);
  const std::size_t n_grids = p.k_list.size();
  const std::size_t ref = n_grids - 1;
  const long n_ref = setup.ops[ref].points();
  const NemytskiiDrift drift = NemytskiiDrift::allen_cahn();

  // per path, per comparison grid: max over time of the spatial error of the
  // lifted difference; L^inf for the semilinear runs, L^2 for the linear ones
  std::vector<std::vector<double>> errors(n_grids - 1,
                                          std::vector<double>(p.paths, 0.0));
  std::vector<long> blowups(n_grids, 0);
  std::mutex blowup_mutex;

  run_paths(p.paths, p.threads, [&](long path) {
    const Eigen::MatrixXd db = setup.noise.increments(
        static_cast<std::uint64_t>(path));
    std::vector<PathSolution> sols(n_grids);
    for (std::size_t g = 0; g < n_grids; ++g) {
      const Eigen::MatrixXd inc = setup.mixing[g] * db;
      SpdeProblem problem;
      problem.op = &setup.ops[g];
      problem.drift = with_drift ? &drift : nullptr;
      problem.initial = setup.initial[g];
      problem.horizon = p.horizon;
      problem.steps = p.steps;
      problem.blowup_threshold = p.blowup_threshold;
      sols[g] = simulate_semilinear(problem, inc, NoiseScheme::kLeftPoint);
      if (sols[g].blown_up) {
        std::lock_guard<std::mutex> lock(blowup_mutex);
        ++blowups[g];
      }
    }
    for (std::size_t g = 0; g + 1 < n_grids; ++g) {
      if (sols[g].blown_up || sols[ref].blown_up) {
        errors[g][path] = std::numeric_limits<double>::quiet_NaN();
        continue;
      }
      double worst = 0.0;
      for (long k = 0; k <= p.steps; ++k) {
        if (with_drift) {
          double sup = 0.0;
          for (long r = 0; r < n_ref; ++r) {
            sup = std::max(sup,
                           std::fabs(sols[g].states(k, setup.ref_map[g][r]) -
                                     sols[ref].states(k, r)));
          }
          worst = std::max(worst, sup);
        } else {
          double acc = 0.0;
          for (long r = 0; r < n_ref; ++r) {
            const double d = sols[g].states(k, setup.ref_map[g][r]) -
                             sols[ref].states(k, r);
            acc += d * d;
          }
          worst = std::max(worst, std::sqrt(acc / static_cast<double>(n_ref)));
        }
      }
      errors[g][path] = worst;
    }
  });

  const long total_blowups =
      std::accumulate(blowups.begin(), blowups.end(), 0l);
  if (total_blowups > 0) {
    res.note_failure(fmt("%ld blown-up paths; rate fit aborted", total_blowups));
    for (std::size_t g = 0; g < n_grids; ++g) {
      if (blowups[g] > 0) {
        res.lines.push_back(fmt("n=%-4ld blowups=%ld", setup.ops[g].points(),
                                blowups[g]));
      }
    }
    return res;
  }

  RateTable table{"coupled_error", {}, std::nullopt, {}};
  std::vector<McEstimate> estimates;
  for (std::size_t g = 0; g + 1 < n_grids; ++g) {
    std::vector<double> vals = errors[g];
    if (p.p_minus != 1.0) {
      for (double& v : vals) v = std::pow(v, p.p_minus);
    }
    McEstimate e = summarize(vals, p.seed);
    if (p.p_minus != 1.0) {
      // delta method back to the p-minus root
      const double root = std::pow(e.mean, 1.0 / p.p_minus);
      e.std_error = e.std_error * root / (p.p_minus * e.mean);
      e.mean = root;
    }
    estimates.push_back(e);
    const double n = static_cast<double>(setup.ops[g].points());
    table.rows.push_back({n, e.mean, std::nullopt, std::nullopt});
    if (with_drift) {
      res.csv.rows.push_back({n, e.mean, e.std_error, 0.0});
    } else {
      res.csv.rows.push_back({n, e.mean, e.std_error});
    }
    res.lines.push_back(
        fmt("n=%-4ld error=%.6g +- %.2g", setup.ops[g].points(), e.mean,
            e.std_error));
  }
  for (std::size_t g = 0; g + 1 < estimates.size(); ++g) {
    const auto& a = estimates[g];
    const auto& b = estimates[g + 1];
    const double pooled =
        std::sqrt(a.std_error * a.std_error + b.std_error * b.std_error);
    if (!(b.mean < a.mean)) {
      res.note_failure(fmt("error does not decrease from n=%g to n=%g",
                           table.rows[g].n, table.rows[g + 1].n));
    } else if (a.mean - b.mean < 2.0 * pooled) {
      res.note_failure(
          fmt("decrease from n=%g to n=%g below 2 pooled standard errors",
              table.rows[g].n, table.rows[g + 1].n));
    }
    table.rows[g + 1].ratio = b.mean / a.mean;
  }
  if (table.rows.size() >= 3) {
    double residual = 0.0;
    table.slope = fit_rate(table, &residual);
    table.meta["residual_rms"] = format_value(residual);
    res.manifest["slope." + table.label] = format_value(*table.slope);
    res.manifest["slope." + table.label + ".residual_rms"] =
        format_value(residual);
  }
  res.tables.push_back(table);

  res.manifest["scheme"] = "A";
  res.manifest["J"] = std::to_string(p.j_modes);
  res.manifest["K"] = std::to_string(p.steps);
  res.manifest["dt"] = format_value(p.horizon / static_cast<double>(p.steps));
  res.manifest["T"] = format_value(p.horizon);
  res.manifest["paths"] = std::to_string(p.paths);
  res.manifest["seed"] = std::to_string(p.seed);
  res.manifest["p_minus"] = format_value(p.p_minus);
  res.manifest["noise.fingerprint"] = hex64(noise_fingerprint(setup.noise));
  // truncation bias of the J-mode noise, reported at a reference smoothing
  // exponent just above the trace threshold m / (4s)
  {
    const double beta_ref = std::min(0.5, 1.0 / (4.0 * p.s) + 0.05);
    res.manifest["noise.tail_beta"] = format_value(beta_ref);
    res.manifest["noise.tail"] =
        format_value(continuum_tail(p.j_modes, p.s, beta_ref));
  }
  for (std::size_t g = 0; g < n_grids; ++g) {
    res.manifest[fmt("operator.n%ld.fingerprint", setup.ops[g].points())] =
        hex64(setup.ops[g].fingerprint());
    // every grid consumed the identical Wiener representation
    res.manifest[fmt("noise.n%ld.fingerprint", setup.ops[g].points())] =
        hex64(noise_fingerprint(setup.noise));
  }
  res.manifest["blowups"] = std::to_string(total_blowups);
  return res;
}

std::vector<double> factorization_errors(double lambda_s, double beta_prime,
                                         const std::vector<long>& k_values,
                                         double horizon, std::uint64_t seed) {
  if (k_values.empty()) throw std::invalid_argument("factorization: no K");
  const long k_fine = *std::max_element(k_values.begin(), k_values.end());
  const SpectralOperator op = scalar_mode_operator(lambda_s, 1.0);
  const WienerRepresentation noise =
      generate_noise(1, horizon, k_fine, seed, BasisKind::kDiscrete);
  const Eigen::MatrixXd fine = noise.increments(0);
  std::vector<double> out;
  for (const long k_steps : k_values) {
    if (k_fine % k_steps != 0) {
      throw std::invalid_argument("factorization: K values must nest");
    }
    const long group = k_fine / k_steps;
    Eigen::MatrixXd inc = Eigen::MatrixXd::Zero(1, k_steps);
    for (long k = 0; k < k_steps; ++k) {
      inc(0, k) = fine.row(0).segment(k * group, group).sum();
    }
    const PathSolution wa =
        stochastic_convolution(op, inc, horizon, NoiseScheme::kLeftPoint);
    const PathSolution aux =
        auxiliary_process(op, 0.5 + beta_prime, inc, horizon);
    const Eigen::MatrixXd composed =
        fractional_integrate(op, 0.5 - beta_prime, aux.states, horizon);
    out.push_back((composed - wa.states).cwiseAbs().maxCoeff());
  }
  return out;
}

McEstimate ou_variance_estimate(double lambda_s, double horizon, long steps,
                                long paths, std::uint64_t seed) {
  const SpectralOperator op = scalar_mode_operator(lambda_s, 1.0);
  const WienerRepresentation noise =
      generate_noise(1, horizon, steps, seed, BasisKind::kDiscrete);
  std::vector<double> finals(paths);
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(1);
  for (long p = 0; p < paths; ++p) {
    const PathSolution sol = simulate_ou(
        op, zero, horizon, steps, noise.increments(static_cast<std::uint64_t>(p)));
    finals[p] = sol.states(steps, 0);
  }
  double mean = 0.0;
  for (const double v : finals) mean += v;
  mean /= static_cast<double>(paths);
  double var = 0.0;
  for (const double v : finals) var += (v - mean) * (v - mean);
  var /= static_cast<double>(paths - 1);
  McEstimate e;
  e.mean = var;  // the quantity under test is the variance itself
  e.std_error = var * std::sqrt(2.0 / static_cast<double>(paths - 1));
  e.paths = paths;
  e.seed = seed;
  return e;
}

}  // namespace gspde
