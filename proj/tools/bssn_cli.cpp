// Command-line front end: problem synthesis, solver runs, parameter
// sweeps and table/image emission.
//
// Exit codes: 0 success, 1 configuration error, 2 convergence failure,
// 3 internal invariant violation.

#include <CLI11.hpp>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <optional>

#include "bssn/experiments.hpp"
#include "bssn/io.hpp"
#include "bssn/newton.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace bssn;

namespace {

struct CommonOptions {
  std::string config_path;
  std::string out_dir = ".";
  std::uint64_t seed = 1;
  double w = 0.1;
  std::string variant = "modbssn";
  SolverConfig solver;
};

// Flags override config-file values: the config is loaded first and
// each flag that was actually passed is applied on top.
void add_common(CLI::App* cmd, CommonOptions& opt) {
  cmd->add_option("--config", opt.config_path, "JSON config file");
  cmd->add_option("--out", opt.out_dir, "output directory");
  cmd->add_option("--seed", opt.seed, "master RNG seed");
  cmd->add_option("--w", opt.w, "regularization weight");
  cmd->add_option("--gamma", opt.solver.gamma, "residual scaling gamma > 0");
  cmd->add_option("--tol", opt.solver.tol, "residual-norm stopping tolerance");
  cmd->add_option("--sigma", opt.solver.armijo_sigma, "Armijo sigma in (0, 1/2)");
  cmd->add_option("--beta", opt.solver.armijo_beta, "Armijo beta in (0, 1)");
  cmd->add_option("--jmax", opt.solver.j_max, "hybrid switch step threshold");
  cmd->add_option("--tmin", opt.solver.t_min, "hybrid switch stepsize threshold");
  cmd->add_option("--max-outer", opt.solver.max_outer, "outer iteration cap");
  cmd->add_option("--variant", opt.variant, "bssn | modbssn | hybrid");
}

void load_config_file(const CLI::App* cmd, CommonOptions& opt) {
  if (opt.config_path.empty()) return;
  std::ifstream is(opt.config_path);
  if (!is) throw InvalidArgument("cannot read config: " + opt.config_path);
  json cfg = json::parse(is);
  auto maybe = [&](const char* key, auto& target, const char* flag) {
    // a flag passed on the command line wins over the file value
    if (cfg.contains(key) && cmd->count(flag) == 0) {
      target = cfg.at(key).get<std::decay_t<decltype(target)>>();
    }
  };
  maybe("seed", opt.seed, "--seed");
  maybe("w", opt.w, "--w");
  maybe("gamma", opt.solver.gamma, "--gamma");
  maybe("tol", opt.solver.tol, "--tol");
  maybe("sigma", opt.solver.armijo_sigma, "--sigma");
  maybe("beta", opt.solver.armijo_beta, "--beta");
  maybe("jmax", opt.solver.j_max, "--jmax");
  maybe("tmin", opt.solver.t_min, "--tmin");
  maybe("max_outer", opt.solver.max_outer, "--max-outer");
  maybe("variant", opt.variant, "--variant");
}

void finalize(CommonOptions& opt) {
  opt.solver.variant = variant_from_string(opt.variant);
  opt.solver.validate();
  fs::create_directories(opt.out_dir);
}

json common_manifest(const CommonOptions& opt) {
  return {{"seed", opt.seed},
          {"w", opt.w},
          {"gamma", opt.solver.gamma},
          {"tol", opt.solver.tol},
          {"sigma", opt.solver.armijo_sigma},
          {"beta", opt.solver.armijo_beta},
          {"jmax", opt.solver.j_max},
          {"tmin", opt.solver.t_min},
          {"max_outer", opt.solver.max_outer},
          {"variant", to_string(opt.solver.variant)}};
}

void write_json(const fs::path& path, const json& j) {
  std::ofstream os(path);
  os << j.dump(2) << "\n";
}

json run_summary(const SolveResult& res) {
  int unit_steps = 0;
  for (size_t j = 1; j < res.records.size(); ++j) {
    if (res.records[j].step == 1.0) ++unit_steps;
  }
  json s = {{"converged", res.converged},
            {"iterations", static_cast<int>(res.records.size()) - 1},
            {"unit_steps", unit_steps},
            {"final_residual", res.records.back().residual_norm},
            {"final_objective", res.records.back().objective},
            {"nonzeros", static_cast<int>((res.u_star.array() != 0.0).count())}};
  if (res.switch_step) s["switch_step"] = *res.switch_step;
  return s;
}

void emit_history(const fs::path& dir, const SolveResult& res) {
  write_history_csv(dir / "history.csv", res.records);
  write_history_dat(dir / "history.dat", res.records);
}

// ---------------------------------------------------------------- solve

int cmd_solve(CommonOptions& opt, const std::string& k_path,
              const std::string& f_path, int n_synth, int m_synth) {
  finalize(opt);
  std::shared_ptr<const Objective> objective;
  json source;
  if (!k_path.empty()) {
    if (f_path.empty()) {
      throw InvalidArgument("solve: --f is required with --k");
    }
    objective = quadratic_objective(read_matrix_csv(k_path),
                                    read_vector_csv(f_path));
    source = {{"k", k_path}, {"f", f_path}};
  } else {
    // synthesized least-squares instance for smoke runs
    if (m_synth < n_synth) throw InvalidArgument("solve: need m >= n");
    Rng rng = Rng::stream(opt.seed, 1);
    Mat k(m_synth, n_synth);
    for (int i = 0; i < m_synth; ++i) {
      for (int j = 0; j < n_synth; ++j) {
        k(i, j) = rng.normal() / std::sqrt(m_synth);
      }
    }
    k.topRows(n_synth) += 0.3 * Mat::Identity(n_synth, n_synth);
    Rng noise = Rng::stream(opt.seed, 2);
    objective = quadratic_objective(k, noise.normal_vector(m_synth));
    source = {{"synthetic_n", n_synth}, {"synthetic_m", m_synth}};
  }

  WeightedL1Problem problem(
      objective, WeightVector::constant(objective->dimension(), opt.w),
      opt.solver.gamma);
  SolveResult res = solve(problem, Vec::Zero(problem.dimension()), opt.solver);

  const fs::path dir(opt.out_dir);
  emit_history(dir, res);
  write_vector_csv(dir / "solution.csv", res.u_star);
  json manifest = common_manifest(opt);
  manifest["command"] = "solve";
  manifest["problem"] = source;
  write_json(dir / "manifest.json", manifest);
  write_json(dir / "summary.json", run_summary(res));
  std::cout << (res.converged ? "converged" : "NOT converged") << " in "
            << res.records.size() - 1 << " steps, final residual "
            << format_sci(res.records.back().residual_norm) << "\n";
  return res.converged ? 0 : 2;
}

// --------------------------------------------------------------- deblur

int cmd_deblur(CommonOptions& opt, int n_side, double blur_len, double delta,
               bool use_discrepancy, double tau, double tikhonov) {
  finalize(opt);
  if (n_side < 2) throw InvalidArgument("deblur: need N >= 2");
  if (delta < 0.0) throw InvalidArgument("deblur: need delta >= 0");

  const Vec u_true = make_sparse_test_image(n_side, 0.05, opt.seed);
  const Vec f_exact = forward_blur_simpson(n_side, blur_len, u_true);
  const Vec f_delta =
      delta > 0.0 ? add_relative_noise(f_exact, delta, opt.seed) : f_exact;

  auto blur = std::make_shared<BlurObjective>(n_side, blur_len, f_delta,
                                              tikhonov);
  auto factory = [&](double w) {
    return WeightedL1Problem(
        blur, WeightVector::constant(n_side * n_side, w), opt.solver.gamma);
  };

  // the model operator can be singular and the data comes from a
  // different forward map, so the reachable mismatch is bounded below by
  // the distance of the data from the model range; target the total
  // effective noise, not just the measurement noise
  const double total_noise = (f_delta - blur->apply_operator(u_true)).norm();

  double w_used = opt.w;
  int discrepancy_solves = 0;
  if (use_discrepancy) {
    auto mismatch = [&](const Vec& u) {
      return (blur->apply_operator(u) - f_delta).norm();
    };
    DiscrepancyConfig dconf;
    dconf.tau = tau;
    auto picked = discrepancy_principle(factory, mismatch, dconf,
                                        tau * total_noise, opt.solver);
    w_used = picked.w;
    discrepancy_solves = picked.solves;
  }

  WeightedL1Problem problem = factory(w_used);
  SolveResult res = solve(problem, Vec::Zero(problem.dimension()), opt.solver);

  const fs::path dir(opt.out_dir);
  write_pgm(dir / "original.pgm", u_true, n_side);
  write_pgm(dir / "blurred.pgm", f_delta, n_side);
  write_pgm(dir / "reconstruction.pgm", res.u_star, n_side);
  write_vector_csv(dir / "reconstruction.csv", res.u_star);
  emit_history(dir, res);

  json manifest = common_manifest(opt);
  manifest["command"] = "deblur";
  manifest["N"] = n_side;
  manifest["L"] = blur_len;
  manifest["delta"] = delta;
  manifest["discrepancy"] = use_discrepancy;
  manifest["tau"] = tau;
  manifest["tikhonov"] = tikhonov;
  manifest["w_used"] = w_used;
  write_json(dir / "manifest.json", manifest);

  json summary = run_summary(res);
  summary["w_used"] = w_used;
  summary["discrepancy_solves"] = discrepancy_solves;
  summary["reconstruction_error"] = (res.u_star - u_true).norm();
  write_json(dir / "summary.json", summary);
  std::cout << (res.converged ? "converged" : "NOT converged") << " in "
            << res.records.size() - 1 << " steps at w = " << w_used << "\n";
  return res.converged ? 0 : 2;
}

// ------------------------------------------------------- regress / path

RegressionProblem synthesize_regression(int m, int n,
                                        const std::vector<double>& weights,
                                        double outliers, std::uint64_t seed) {
  // regenerate with the next sub-seed if the design is rank-deficient
  for (int attempt = 0; attempt < 3; ++attempt) {
    RegressionProblem reg =
        make_regression_instance(m, n, weights, outliers, seed + attempt);
    Eigen::ColPivHouseholderQR<Mat> qr(reg.a_rows);
    if (qr.rank() == n) return reg;
  }
  throw NumericalError("regress: synthesized design stayed rank-deficient");
}

void write_path_csv(const fs::path& path, const std::vector<PathPoint>& pts) {
  std::ofstream os(path);
  os << "w,support_size,std_error,r_squared,converged";
  const Eigen::Index n = pts.empty() ? 0 : pts.front().u_w.size();
  for (Eigen::Index k = 0; k < n; ++k) os << ",u" << k;
  os << "\n";
  for (const auto& pt : pts) {
    os << format_sci(pt.w) << "," << pt.metrics.support_size << ","
       << format_sci(pt.metrics.std_error) << ","
       << format_sci(pt.metrics.r_squared) << "," << (pt.converged ? 1 : 0);
    for (Eigen::Index k = 0; k < n; ++k) os << "," << format_sci(pt.u_w(k));
    os << "\n";
  }
}

int cmd_regress(CommonOptions& opt, int m, int n,
                std::vector<double> support_weights, double outliers,
                const std::vector<double>& w_grid) {
  finalize(opt);
  if (support_weights.empty()) {
    support_weights = {-33, -7, -0.1, 1, 2, 13, 20, 50};
  }
  RegressionProblem reg =
      synthesize_regression(m, n, support_weights, outliers, opt.seed);
  auto factory = [&](double w) {
    return WeightedL1Problem(robust_objective(reg),
                             WeightVector::constant(n, w), opt.solver.gamma);
  };

  const fs::path dir(opt.out_dir);
  json manifest = common_manifest(opt);
  manifest["m"] = m;
  manifest["n"] = n;
  manifest["support_weights"] = support_weights;
  manifest["outlier_fraction"] = outliers;

  if (!w_grid.empty()) {
    auto path = regularization_path(factory, w_grid, reg, opt.solver);
    write_path_csv(dir / "path.csv", path);
    manifest["command"] = "path";
    manifest["w_grid"] = w_grid;
    write_json(dir / "manifest.json", manifest);
    int failures = 0;
    for (const auto& pt : path) {
      if (!pt.converged) ++failures;
    }
    json summary = {{"points", static_cast<int>(path.size())},
                    {"failures", failures}};
    write_json(dir / "summary.json", summary);
    std::cout << path.size() << " path points, " << failures << " failures\n";
    return failures == 0 ? 0 : 2;
  }

  WeightedL1Problem problem = factory(opt.w);
  SolveResult res = solve(problem, Vec::Zero(n), opt.solver);
  emit_history(dir, res);
  write_vector_csv(dir / "coefficients.csv", res.u_star);
  write_vector_csv(dir / "true_coefficients.csv", reg.u_true);
  manifest["command"] = "regress";
  write_json(dir / "manifest.json", manifest);
  json summary = run_summary(res);
  const auto metrics = regression_metrics(reg, res.u_star);
  summary["support_size"] = metrics.support_size;
  summary["std_error"] = metrics.std_error;
  summary["r_squared"] = metrics.r_squared;
  write_json(dir / "summary.json", summary);
  std::cout << (res.converged ? "converged" : "NOT converged") << " in "
            << res.records.size() - 1 << " steps, support "
            << metrics.support_size << "\n";
  return res.converged ? 0 : 2;
}

// ------------------------------------------------------------- lcp-test

int cmd_lcp_test(std::uint64_t seed, int size, int reps) {
  if (size < 1 || size > 20) {
    throw InvalidArgument("lcp-test: size must lie in [1, 20]");
  }
  Rng rng(seed);
  int failures = 0;
  for (int rep = 0; rep < reps; ++rep) {
    const int m = 1 + static_cast<int>(rng.uniform() * size);
    Mat a(m, m);
    for (int i = 0; i < m; ++i) {
      for (int j = 0; j < m; ++j) a(i, j) = rng.normal();
    }
    LcpInstance inst;
    inst.n_mat = a.transpose() * a + 0.1 * Mat::Identity(m, m);
    inst.z_vec = 2.0 * rng.normal_vector(m);
    for (int k = 0; k < m; ++k) {
      inst.back_map.push_back({k, LcpInstance::Sign::plus});
    }
    try {
      const auto ref = brute_force_lcp(inst);
      const auto prod = solve_lcp(inst);
      const auto lk = lemke(inst, 1e-9);
      const bool ok =
          (prod.x - ref.x).lpNorm<Eigen::Infinity>() <= 1e-8 &&
          (lk.x - ref.x).lpNorm<Eigen::Infinity>() <= 1e-8 &&
          lcp_min_map(inst, prod.x).lpNorm<Eigen::Infinity>() <=
              1e-10 * (1.0 + inst.z_vec.lpNorm<Eigen::Infinity>());
      if (!ok) ++failures;
    } catch (const NumericalError&) {
      ++failures;
    }
  }
  std::cout << "lcp-test: " << reps - failures << " passed, " << failures
            << " failed\n";
  return failures == 0 ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"B-semismooth Newton solver for weighted-l1 penalized problems"};
  app.require_subcommand(1);

  CommonOptions opt;

  auto* solve_cmd = app.add_subcommand(
      "solve", "solve a weighted-l1 least-squares problem from CSV files");
  std::string k_path, f_path;
  int n_synth = 50, m_synth = 75;
  add_common(solve_cmd, opt);
  solve_cmd->add_option("--k", k_path, "design matrix CSV");
  solve_cmd->add_option("--f", f_path, "data vector CSV");
  solve_cmd->add_option("--n", n_synth, "synthetic problem dimension");
  solve_cmd->add_option("--m", m_synth, "synthetic row count");

  auto* deblur_cmd =
      app.add_subcommand("deblur", "sparse image deblurring experiment");
  int n_side = 64;
  double blur_len = 0.1, delta = 0.05, tau = 2.0, tikhonov = 1e-4;
  bool use_discrepancy = false;
  add_common(deblur_cmd, opt);
  deblur_cmd->add_option("--N", n_side, "image side length");
  deblur_cmd->add_option("--L", blur_len, "blur length fraction");
  deblur_cmd->add_option("--delta", delta, "relative noise level");
  deblur_cmd->add_flag("--discrepancy", use_discrepancy,
                       "select w by the discrepancy principle");
  deblur_cmd->add_option("--tau", tau, "discrepancy safety factor");
  deblur_cmd->add_option("--tikhonov", tikhonov,
                         "strict-convexity Tikhonov term on the objective");

  auto* regress_cmd =
      app.add_subcommand("regress", "robust sparse regression, single weight");
  auto* path_cmd =
      app.add_subcommand("path", "robust regression over a weight grid");
  int m_reg = 2000, n_reg = 50;
  double outliers = 0.1;
  std::vector<double> support_weights;
  std::vector<double> w_grid;
  for (auto* cmd : {regress_cmd, path_cmd}) {
    add_common(cmd, opt);
    cmd->add_option("--m", m_reg, "observations");
    cmd->add_option("--n", n_reg, "coefficients");
    cmd->add_option("--outliers", outliers, "outlier fraction");
    cmd->add_option("--support", support_weights,
                    "nonzero true coefficients (default: the 8 benchmarks)");
  }
  path_cmd->add_option("--wgrid", w_grid, "increasing weight grid")
      ->required();

  auto* lcp_cmd = app.add_subcommand(
      "lcp-test", "cross-validate the LCP solvers on random SPD instances");
  int lcp_size = 10, lcp_reps = 200;
  std::uint64_t lcp_seed = 1;
  lcp_cmd->add_option("--size", lcp_size, "maximum instance size (<= 20)");
  lcp_cmd->add_option("--reps", lcp_reps, "number of instances");
  lcp_cmd->add_option("--seed", lcp_seed, "RNG seed");

  CLI11_PARSE(app, argc, argv);

  try {
    auto* active = app.get_subcommands().front();
    if (active != lcp_cmd) load_config_file(active, opt);
    if (active == solve_cmd) {
      return cmd_solve(opt, k_path, f_path, n_synth, m_synth);
    }
    if (active == deblur_cmd) {
      return cmd_deblur(opt, n_side, blur_len, delta, use_discrepancy, tau,
                        tikhonov);
    }
    if (active == regress_cmd) {
      return cmd_regress(opt, m_reg, n_reg, support_weights, outliers, {});
    }
    if (active == path_cmd) {
      return cmd_regress(opt, m_reg, n_reg, support_weights, outliers, w_grid);
    }
    return cmd_lcp_test(lcp_seed, lcp_size, lcp_reps);
  } catch (const InvalidArgument& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return 1;
  } catch (const CLI::Error& e) {
    std::cerr << "configuration error: " << e.get_name() << "\n";
    return 1;
  } catch (const NumericalError& e) {
    std::cerr << "convergence failure: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 3;
  }
}
