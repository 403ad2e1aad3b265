// Command-line front end: one subcommand per experiment family, flat
// key = value configs with command-line overrides, CSV + manifest outputs.
//
// Exit codes: 0 all assertions passed, 1 assertion failure, 2 bad
// configuration, 3 I/O failure.

#include <CLI11.hpp>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <string>
#include <thread>
#include <vector>

#include "gspde/harness.hpp"
#include "gspde/io.hpp"
#include "gspde/lifting.hpp"
#include "gspde/rng.hpp"
#include "gspde/spde.hpp"
#include "gspde/torus_modes.hpp"

namespace {

using namespace gspde;

struct CommonArgs {
  std::string config_path;
  std::string out_dir = ".";
  std::vector<std::string> overrides;
  std::uint64_t seed = 0;
  bool seed_set = false;
  int threads = 0;
};

Config merge_config(const CommonArgs& args) {
  std::map<std::string, std::string> kv;
  if (!args.config_path.empty()) kv = read_config_file(args.config_path);
  for (const auto& item : args.overrides) {
    const auto eq = item.find('=');
    if (eq == std::string::npos) {
      throw ConfigError{item, "override must look like key=value"};
    }
    kv[item.substr(0, eq)] = item.substr(eq + 1);
  }
  if (args.seed_set) kv["seed"] = std::to_string(args.seed);
  if (args.threads > 0) kv["threads"] = std::to_string(args.threads);
  return Config(kv);
}

int write_outputs(const std::string& out_dir, const Config& cfg,
                  ExperimentResult& result) {
  namespace fs = std::filesystem;
  try {
    fs::create_directories(out_dir);
    const std::string csv_path = out_dir + "/" + result.name + ".csv";
    const std::string csv = result.csv.to_string();
    write_file(csv_path, csv);

    std::string manifest = "experiment = " + result.name + "\n";
    manifest += "schema = 1\n";
    for (const auto& [k, v] : cfg.entries()) {
      manifest += "config." + k + " = " + v + "\n";
    }
    for (const auto& [k, v] : result.manifest) {
      manifest += k + " = " + v + "\n";
    }
    char hash[32];
    std::snprintf(hash, sizeof(hash), "%016llx",
                  static_cast<unsigned long long>(fnv1a64(csv)));
    manifest += "output." + result.name + ".csv = " + hash + "\n";
    manifest += std::string("status = ") + (result.passed ? "pass" : "fail") +
                "\n";
    write_file(out_dir + "/" + result.name + "_manifest.txt", manifest);
  } catch (const std::exception& e) {
    std::cerr << "i/o failure: " << e.what() << "\n";
    return 3;
  }
  for (const auto& line : result.lines) std::cout << line << "\n";
  for (const auto& f : result.failures) std::cout << "FAIL " << f << "\n";
  std::cout << (result.passed ? "status: pass" : "status: fail") << "\n";
  return result.passed ? 0 : 1;
}

std::vector<double> log_spaced(double lo, double hi, int count) {
  std::vector<double> out(count);
  for (int i = 0; i < count; ++i) {
    const double f = count == 1 ? 0.0 : static_cast<double>(i) / (count - 1);
    out[i] = lo * std::pow(hi / lo, f);
  }
  return out;
}

int run_spectra(const Config& cfg, const std::string& out) {
  cfg.reject_unknown({"m", "k_list", "j_max", "seed", "threads"});
  auto result = spectral_convergence_experiment(
      static_cast<int>(cfg.get_long("m", 1)),
      cfg.get_int_list("k_list", {16, 32, 64, 128}),
      static_cast<int>(cfg.get_long("j_max", 8)));
  return write_outputs(out, cfg, result);
}

int run_resolvent(const Config& cfg, const std::string& out) {
  cfg.reject_unknown({"k_list", "s", "beta", "J", "seed", "threads"});
  auto result = resolvent_convergence_experiment(
      cfg.get_int_list("k_list", {16, 32, 64}), cfg.get_double("s", 1.0),
      cfg.get_double("beta", 0.5), cfg.get_long("J", 0));
  return write_outputs(out, cfg, result);
}

int run_ultra(const Config& cfg, const std::string& out) {
  cfg.reject_unknown(
      {"k_list", "s", "q", "beta", "t_min", "t_max", "t_count", "seed",
       "threads"});
  const std::string q_text = cfg.get_string("q", "2");
  const double q = (q_text == "inf") ? std::numeric_limits<double>::infinity()
                                     : Config({{"q", q_text}}).get_double("q");
  auto result = ultracontractivity_experiment(
      cfg.get_int_list("k_list", {16, 32, 64, 128}), cfg.get_double("s", 1.0),
      q, cfg.get_double("beta", 0.3),
      log_spaced(cfg.get_double("t_min", 1e-3), cfg.get_double("t_max", 1.0),
                 static_cast<int>(cfg.get_long("t_count", 25))));
  return write_outputs(out, cfg, result);
}

int run_semigroup(const Config& cfg, const std::string& out) {
  cfg.reject_unknown(
      {"k_list", "s", "t_max", "t_count", "j_inf", "ratio_bound", "seed",
       "threads"});
  auto result = semigroup_experiment(
      cfg.get_int_list("k_list", {16, 32, 64, 128}), cfg.get_double("s", 1.0),
      cfg.get_double("t_max", 1.0), static_cast<int>(cfg.get_long("t_count", 33)),
      cfg.get_long("j_inf", 64), cfg.get_double("ratio_bound", 0.6));
  return write_outputs(out, cfg, result);
}

McExperimentParams mc_params(const Config& cfg) {
  McExperimentParams p;
  p.k_list = cfg.get_int_list("k_list", {16, 32, 64, 128});
  p.s = cfg.get_double("s", 1.0);
  p.horizon = cfg.get_double("T", 0.5);
  p.steps = cfg.get_long("K", 512);
  p.j_modes = cfg.get_long("J", 128);
  p.paths = cfg.get_long("paths", 100);
  p.seed = cfg.get_u64("seed", 0);
  p.p_minus = cfg.get_double("p_minus", 1.0);
  p.xi_amplitude = cfg.get_double("xi_amplitude", 0.1);
  p.blowup_threshold = cfg.get_double("r_max", 1e6);
  p.threads = static_cast<int>(
      cfg.get_long("threads", std::thread::hardware_concurrency()));
  return p;
}

int run_ou(const Config& cfg, const std::string& out) {
  cfg.reject_unknown(
      {"k_list", "s", "T", "K", "J", "paths", "seed", "threads", "r_max",
       "xi_amplitude"});
  auto result = ou_convergence_experiment(mc_params(cfg));
  return write_outputs(out, cfg, result);
}

int run_allen_cahn(const Config& cfg, const std::string& out) {
  cfg.reject_unknown({"k_list", "s", "T", "K", "J", "paths", "seed", "threads",
                      "r_max", "xi_amplitude", "p_minus"});
  const double s = cfg.get_double("s", 1.0);
  if (!(s > 0.5 && s <= 1.0)) {
    throw ConfigError{"s", "the semilinear experiment needs s in (1/2, 1]"};
  }
  auto result = allen_cahn_convergence_experiment(mc_params(cfg));
  return write_outputs(out, cfg, result);
}

int run_simulate(const Config& cfg, const std::string& out) {
  cfg.reject_unknown({"m", "k", "s", "T", "K", "J", "drift", "xi", "noise",
                      "scheme", "seed", "threads", "r_max"});
  const int m = static_cast<int>(cfg.get_long("m", 1));
  const int k = static_cast<int>(cfg.get_long("k"));
  const double s = cfg.get_double("s");
  const double horizon = cfg.get_double("T");
  const long steps = cfg.get_long("K");
  const std::uint64_t seed = cfg.get_u64("seed", 0);
  const std::string noise_kind = cfg.get_string("noise", "independent");
  const std::string drift_kind = cfg.get_string("drift", "none");
  const std::string xi_spec = cfg.get_string("xi", "zero");

  const TorusGrid grid = build_grid(m, k);
  const SpectralOperator op = eigendecompose(assemble_fd_operator(grid), s);
  const QuadratureGrid quad =
      build_quadrature(m, default_quadrature_axis_grid(k));
  const TransportPair pair = make_transport_pair(grid, quad);

  Eigen::VectorXd xi = Eigen::VectorXd::Zero(grid.n);
  if (xi_spec.rfind("sin:", 0) == 0) {
    const double amp = Config({{"a", xi_spec.substr(4)}}).get_double("a");
    Eigen::VectorXd xq(quad.size);
    for (long i = 0; i < quad.size; ++i) {
      xq[i] = amp * std::sin(2.0 * 3.14159265358979323846 * quad.nodes(i, 0));
    }
    xi = project(xq, pair);
  } else if (xi_spec.rfind("const:", 0) == 0) {
    xi.setConstant(Config({{"a", xi_spec.substr(6)}}).get_double("a"));
  } else if (xi_spec != "zero") {
    throw ConfigError{"xi", "expected zero, sin:<amp> or const:<value>"};
  }

  NemytskiiDrift drift = NemytskiiDrift::allen_cahn();
  SpdeProblem problem;
  problem.op = &op;
  problem.drift = nullptr;
  if (drift_kind == "allen-cahn") {
    problem.drift = &drift;
  } else if (drift_kind != "none") {
    throw ConfigError{"drift", "expected none or allen-cahn"};
  }
  problem.initial = xi;
  problem.horizon = horizon;
  problem.steps = steps;
  problem.blowup_threshold = cfg.get_double("r_max", 1e6);

  Eigen::MatrixXd increments;
  NoiseScheme scheme = NoiseScheme::kExactVariance;
  long j_modes = cfg.get_long("J", grid.n);
  if (noise_kind == "independent") {
    j_modes = grid.n;
    increments = generate_noise(j_modes, horizon, steps, seed,
                                BasisKind::kDiscrete)
                     .increments(0);
  } else if (noise_kind == "coupled") {
    scheme = NoiseScheme::kLeftPoint;
    const SpectralOperator op_inf =
        continuum_operator_torus(m, j_modes, s, quad);
    const NoiseCoupling coupling = project_noise(op, op_inf, pair, j_modes);
    increments =
        coupling.transform(generate_noise(j_modes, horizon, steps, seed,
                                          BasisKind::kContinuum)
                               .increments(0));
  } else if (noise_kind == "zero") {
    increments = Eigen::MatrixXd::Zero(grid.n, steps);
    scheme = NoiseScheme::kLeftPoint;
  } else {
    throw ConfigError{"noise", "expected independent, coupled or zero"};
  }
  const std::string scheme_text = cfg.get_string("scheme", "");
  if (scheme_text == "A") scheme = NoiseScheme::kLeftPoint;
  if (scheme_text == "B") scheme = NoiseScheme::kExactVariance;

  const PathSolution sol = simulate_semilinear(problem, increments, scheme);

  ExperimentResult result;
  result.name = "simulate";
  result.csv.columns = {"t"};
  for (long i = 1; i <= grid.n; ++i) {
    result.csv.columns.push_back("node_" + std::to_string(i));
  }
  const double dt = horizon / static_cast<double>(steps);
  for (long r = 0; r < sol.states.rows(); ++r) {
    std::vector<double> row{r * dt};
    for (long i = 0; i < grid.n; ++i) row.push_back(sol.states(r, i));
    result.csv.rows.push_back(std::move(row));
  }
  result.manifest["J"] = std::to_string(j_modes);
  result.manifest["K"] = std::to_string(steps);
  result.manifest["dt"] = format_value(dt);
  result.manifest["scheme"] = std::string(1, sol.scheme);
  result.manifest["blowup"] = sol.blown_up ? "1" : "0";
  if (sol.blown_up) {
    result.manifest["first_exceedance"] =
        std::to_string(sol.first_exceedance);
  }
  char buf[24];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(op.fingerprint()));
  result.manifest["operator.fingerprint"] = buf;
  result.lines.push_back("steps written: " +
                         std::to_string(result.csv.rows.size()));
  return write_outputs(out, cfg, result);
}

bool check_line(std::vector<std::string>& lines, bool& ok, bool cond,
                const std::string& label) {
  lines.push_back(std::string(cond ? "ok   " : "FAIL ") + label);
  ok = ok && cond;
  return cond;
}

int run_check(const Config& cfg, const std::string& out) {
  cfg.reject_unknown({"seed", "threads"});
  const std::uint64_t seed = cfg.get_u64("seed", 0);
  std::vector<std::string> lines;
  bool ok = true;

  // grid + transport basics
  const TorusGrid g4 = build_grid(1, 4);
  check_line(lines, ok, std::fabs(g4.nodes(0, 0) - 0.125) < 1e-15,
             "grid nodes at (j - 1/2) / k");
  const QuadratureGrid q4 = build_quadrature(1, 64);
  const TransportPair pair4 = make_transport_pair(g4, q4);
  check_line(lines, ok, std::fabs(pair4.map.epsilon - 0.125) < 1e-15,
             "grid epsilon = (1/2) sqrt(m) n^{-1/m}");

  // projection / lifting algebra
  const CounterRng rng(seed);
  bool id_exact = true, iso_ok = true, adj_ok = true;
  for (int rep = 0; rep < 20; ++rep) {
    Eigen::VectorXd u(g4.n), v(q4.size);
    for (long i = 0; i < g4.n; ++i) u[i] = rng.normal(rep, i);
    for (long i = 0; i < q4.size; ++i) v[i] = rng.normal(1000 + rep, i);
    id_exact = id_exact && (project(lift(u, pair4), pair4) - u).norm() == 0.0;
    iso_ok = iso_ok && std::fabs(lq_norm_quadrature(lift(u, pair4), 2.0,
                                                    q4.weight) -
                                 lq_norm_discrete(u, 2.0)) < 1e-10;
    const double lhs = (lift(u, pair4).cwiseProduct(v)).sum() * q4.weight;
    const double rhs = u.dot(project(v, pair4)) / static_cast<double>(g4.n);
    adj_ok = adj_ok && std::fabs(lhs - rhs) < 1e-10;
  }
  check_line(lines, ok, id_exact, "Pi Lambda = id exactly");
  check_line(lines, ok, iso_ok, "grid lifting is an L^2 isometry");
  check_line(lines, ok, adj_ok, "lifting/projection adjointness");

  // closed-form spectrum at n = 64
  const SpectralOperator op64 =
      eigendecompose(assemble_fd_operator(build_grid(1, 64)), 1.0);
  double worst = 0.0;
  for (long j = 1; j <= 64; ++j) {
    const double ref = torus1d::fd_eigenvalue(j, 64);
    worst = std::max(worst,
                     std::fabs(op64.lambda[j - 1] - ref) / std::max(1.0, ref));
  }
  check_line(lines, ok, worst < 1e-8, "finite-difference spectrum closed form");

  // semigroup law and contraction
  Eigen::VectorXd u64(64);
  for (long i = 0; i < 64; ++i) u64[i] = rng.normal(7, i);
  const Eigen::VectorXd two_step =
      semigroup_apply(op64, 0.3, semigroup_apply(op64, 0.2, u64));
  const Eigen::VectorXd one_step = semigroup_apply(op64, 0.5, u64);
  check_line(lines, ok, (two_step - one_step).cwiseAbs().maxCoeff() < 1e-10,
             "semigroup law S(t)S(r) = S(t+r)");
  check_line(lines, ok,
             lq_norm_discrete(one_step, 2.0) <= lq_norm_discrete(u64, 2.0),
             "semigroup L^2 contraction");

  // quick OU stationary variance
  const McEstimate var = ou_variance_estimate(2.0, 5.0, 64, 2000, seed);
  check_line(lines, ok, std::fabs(var.mean - 0.25) < 5.0 * var.std_error,
             "OU stationary variance 1/(2 lambda)");

  ExperimentResult result;
  result.name = "check";
  result.csv.columns = {"checks", "failures"};
  long failures = 0;
  for (const auto& l : lines) failures += (l.rfind("FAIL", 0) == 0) ? 1 : 0;
  result.csv.rows.push_back(
      {static_cast<double>(lines.size()), static_cast<double>(failures)});
  result.lines = lines;
  result.passed = ok;
  if (!ok) result.failures.push_back("invariant checks failed");
  return write_outputs(out, cfg, result);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Graph-discretized Whittle-Matern SPDE experiments"};
  app.require_subcommand(1);

  CommonArgs args;
  std::string subcommand;
  for (const auto& name :
       {"spectra", "resolvent", "ultra", "semigroup", "ou", "allen-cahn",
        "simulate", "check"}) {
    auto* sub = app.add_subcommand(name);
    sub->add_option("--config", args.config_path, "key = value config file");
    sub->add_option("--out", args.out_dir, "output directory");
    sub->add_option("--threads", args.threads, "worker thread cap");
    auto* seed_opt = sub->add_option("--seed", args.seed, "master seed");
    sub->add_option("overrides", args.overrides, "key=value overrides");
    sub->callback([&, name, seed_opt]() {
      subcommand = name;
      args.seed_set = seed_opt->count() > 0;
    });
  }
  CLI11_PARSE(app, argc, argv);

  try {
    const Config cfg = merge_config(args);
    if (subcommand == "spectra") return run_spectra(cfg, args.out_dir);
    if (subcommand == "resolvent") return run_resolvent(cfg, args.out_dir);
    if (subcommand == "ultra") return run_ultra(cfg, args.out_dir);
    if (subcommand == "semigroup") return run_semigroup(cfg, args.out_dir);
    if (subcommand == "ou") return run_ou(cfg, args.out_dir);
    if (subcommand == "allen-cahn") return run_allen_cahn(cfg, args.out_dir);
    if (subcommand == "simulate") return run_simulate(cfg, args.out_dir);
    if (subcommand == "check") return run_check(cfg, args.out_dir);
    std::cerr << "unknown subcommand\n";
    return 2;
  } catch (const ConfigError& e) {
    std::cerr << "config error: key '" << e.key << "': " << e.message << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
