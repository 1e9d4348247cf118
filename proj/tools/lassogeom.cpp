// lassogeom command line: distance, calibrate, bound, solve, simulate, figures, prove.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "lassogeom/lassogeom.hpp"

namespace lg = lassogeom;
namespace lh = lassogeom::harness;

namespace {

void kv(const std::string& key, double v) { std::cout << key << ',' << lh::fmt_double(v) << '\n'; }
void kv(const std::string& key, const std::string& v) { std::cout << key << ',' << v << '\n'; }

struct SignalArgs {
  std::string reg = "l1";
  long n = 0, k = 0, d = 0, r = 0;
  std::uint64_t seed = 1;

  void attach(CLI::App* app) {
    app->add_option("--reg", reg, "l1 | nuclear")->check(CLI::IsMember({"l1", "nuclear"}));
    app->add_option("--n", n, "ambient dimension (l1)");
    app->add_option("--k", k, "sparsity (l1)");
    app->add_option("--d", d, "matrix side (nuclear)");
    app->add_option("--r", r, "rank (nuclear)");
    app->add_option("--seed", seed, "master seed");
  }

  lg::SignalModel signal() const {
    if (reg == "l1") return lg::generate_sparse_signal(n, k, lg::SeedSpec{seed, 0x5eed});
    return lg::generate_low_rank_signal(d, r, lg::SeedSpec{seed, 0x5eed});
  }
  lg::Regularizer regularizer() const { return reg == "l1" ? lg::Regularizer::l1() : lg::Regularizer::nuclear(d); }
};

lg::DeltaMethod method_from(const std::string& name, long samples, std::uint64_t seed) {
  if (name == "closed_form") return lg::DeltaMethod::closed_form();
  if (name == "bound") return lg::DeltaMethod::analytic_bound();
  return lg::DeltaMethod::monte_carlo(samples, lg::SeedSpec{seed, 0xde17a});
}

void apply_threads(lh::ExperimentConfig& cfg, unsigned threads) {
  if (threads > 0) cfg.workers = threads;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Error bounds for the square-root lasso via Gaussian squared distance"};
  app.require_subcommand(1);

  // distance
  auto* distance = app.add_subcommand("distance", "Gaussian squared distance to the scaled subdifferential");
  SignalArgs dsig;
  dsig.attach(distance);
  double d_lambda = 0.0;
  std::string d_method = "closed_form";
  long d_samples = 100000;
  unsigned d_threads = 0;
  distance->add_option("--lambda", d_lambda, "scale")->required()->check(CLI::NonNegativeNumber);
  distance->add_option("--method", d_method, "closed_form | monte_carlo | bound")
      ->check(CLI::IsMember({"closed_form", "monte_carlo", "bound"}));
  distance->add_option("--samples", d_samples, "Monte Carlo samples");
  distance->add_option("--threads", d_threads, "worker threads");

  // calibrate
  auto* cal = app.add_subcommand("calibrate", "lambda_min, lambda_best, lambda_max for m measurements");
  SignalArgs csig;
  csig.attach(cal);
  long c_m = 0;
  std::string c_method = "closed_form";
  long c_samples = 20000;
  unsigned c_threads = 0;
  cal->add_option("--m", c_m, "measurements")->required();
  cal->add_option("--method", c_method, "closed_form | monte_carlo")
      ->check(CLI::IsMember({"closed_form", "monte_carlo"}));
  cal->add_option("--samples", c_samples, "Monte Carlo samples (common random numbers)");
  cal->add_option("--threads", c_threads, "worker threads");

  // bound
  auto* bound = app.add_subcommand("bound", "Error bound from (m, delta, t, ||z||)");
  long b_m = 0;
  double b_delta = 0.0, b_t = 0.0, b_z = 1.0;
  std::string b_flavor = "regularized";
  bound->add_option("--m", b_m, "measurements")->required();
  bound->add_option("--delta", b_delta, "Gaussian squared distance")->required();
  bound->add_option("--t", b_t, "deviation parameter");
  bound->add_option("--znorm", b_z, "noise norm");
  bound->add_option("--flavor", b_flavor, "regularized | constrained | sharp")
      ->check(CLI::IsMember({"regularized", "constrained", "sharp"}));

  // solve
  auto* solve = app.add_subcommand("solve", "Solve a lasso instance read from CSV");
  std::vector<std::string> s_input;
  double s_lambda = 0.0;
  std::string s_reg = "l1", s_estimator = "l2", s_output;
  long s_side = 0;
  solve->add_option("--input", s_input, "A.csv y.csv")->required()->expected(2);
  solve->add_option("--lambda", s_lambda, "lambda (l2), tau (l22) or budget (constrained)")->required();
  solve->add_option("--reg", s_reg, "l1 | nuclear")->check(CLI::IsMember({"l1", "nuclear"}));
  solve->add_option("--d", s_side, "matrix side for nuclear (default sqrt(n))");
  solve->add_option("--estimator", s_estimator, "l2 | l22 | constrained")
      ->check(CLI::IsMember({"l2", "l22", "constrained"}));
  solve->add_option("--output", s_output, "write x to this CSV instead of stdout");

  // simulate / figures / prove
  auto* simulate = app.add_subcommand("simulate", "Run the trial sweep of a config and write the trial CSV");
  std::string cfg_path, out_path, out_dir, t_override;
  unsigned threads = 0;
  simulate->add_option("--config", cfg_path, "config file")->required();
  simulate->add_option("--out", out_path, "CSV path (default: out_csv from the config, else stdout)");
  simulate->add_option("--threads", threads, "worker threads");

  auto* figures = app.add_subcommand("figures", "Emit figure tables and SVG plots");
  figures->add_option("--config", cfg_path, "config file")->required();
  figures->add_option("--out-dir", out_dir, "output directory (default: out_dir from the config)");
  figures->add_option("--t", t_override, "t policy override: prob:<p> | gap:<f> | fixed:<t>");
  figures->add_option("--threads", threads, "worker threads");

  auto* prove = app.add_subcommand("prove", "Numerical checks of the proof chain");
  prove->add_option("--config", cfg_path, "config file")->required();
  prove->add_option("--threads", threads, "worker threads");

  CLI11_PARSE(app, argc, argv);

  try {
    if (distance->parsed()) {
      const auto sig = dsig.signal();
      lg::SubdiffGeometry g(dsig.regularizer(), sig);
      const auto est = lg::resolve_delta({&g, d_lambda, method_from(d_method, d_samples, dsig.seed)}, d_threads);
      kv("method", d_method);
      kv("lambda", d_lambda);
      kv("delta", est.estimate);
      kv("std_error", est.std_error);
      kv("samples", static_cast<double>(est.samples));
    } else if (cal->parsed()) {
      const auto sig = csig.signal();
      lg::SubdiffGeometry g(csig.regularizer(), sig);
      const auto rep = lg::calibrate(g, c_m, method_from(c_method, c_samples, csig.seed), {}, c_threads);
      kv("m", static_cast<double>(rep.m));
      kv("feasible", lh::fmt_bool(rep.feasible));
      kv("lambda_min", rep.lambda_min.value_or(NAN));
      kv("lambda_best", rep.lambda_best);
      kv("lambda_max", rep.lambda_max.value_or(NAN));
      kv("delta_at_min", rep.delta_at_min.value_or(NAN));
      kv("delta_at_best", rep.delta_at_best);
      kv("delta_at_max", rep.delta_at_max.value_or(NAN));
    } else if (bound->parsed()) {
      if (b_flavor == "sharp") {
        kv("sharp_estimate", lg::sharp_estimate(b_m, b_delta, b_z));
      } else {
        const auto rep = b_flavor == "regularized" ? lg::regularized_bound({b_m, b_delta, b_t, b_z})
                                                   : lg::constrained_bound(b_m, b_delta, b_t, b_z);
        kv("flavor", lg::flavor_name(rep.flavor));
        kv("bound", rep.value);
        kv("probability", rep.probability);
        kv("formally_valid", lh::fmt_bool(rep.formally_valid));
        kv("probabilistically_meaningful", lh::fmt_bool(rep.probabilistically_meaningful));
      }
    } else if (solve->parsed()) {
      const lg::Matrix A = lh::read_matrix_csv(s_input[0]);
      const lg::Vector y = lh::read_vector_csv(s_input[1]);
      if (y.size() != A.rows()) throw lg::InvalidArgument("solve: y length does not match the rows of A");
      lg::ProblemInstance inst = lg::make_instance(A, lg::Vector::Zero(A.cols()), y);
      long side = s_side;
      if (s_reg == "nuclear" && side == 0) side = std::lround(std::sqrt(static_cast<double>(A.cols())));
      const auto f = s_reg == "l1" ? lg::Regularizer::l1() : lg::Regularizer::nuclear(side);
      lg::Solution sol;
      if (s_estimator == "l2") sol = lg::solve_l2_lasso(inst, f, s_lambda);
      else if (s_estimator == "l22") sol = lg::solve_l22_lasso(inst, f, s_lambda);
      else sol = lg::solve_constrained(inst, f, s_lambda);
      std::cerr << "objective," << lh::fmt_double(sol.objective) << "\niterations," << sol.iterations
                << "\noptimality_residual," << lh::fmt_double(sol.optimality_residual) << "\nconverged,"
                << lh::fmt_bool(sol.converged) << "\nnon_unique," << lh::fmt_bool(sol.non_unique) << '\n';
      if (s_output.empty()) {
        lh::write_vector_csv(std::cout, sol.x);
      } else {
        std::ofstream os(s_output, std::ios::binary);
        if (!os) throw lg::InvalidArgument("cannot write '" + s_output + "'");
        lh::write_vector_csv(os, sol.x);
      }
    } else if (simulate->parsed()) {
      auto cfg = lh::load_config(cfg_path);
      apply_threads(cfg, threads);
      const lh::ExperimentSetup setup(cfg);
      if (!setup.calibration().feasible)
        std::cerr << "warning: m - 1 <= min delta; the bound is vacuous for every lambda\n";
      const auto records = lh::run_sweep(setup);
      const std::string path = out_path.empty() ? cfg.out_csv : out_path;
      if (path.empty()) lh::write_records_csv(std::cout, records, cfg);
      else lh::write_records_csv(path, records, cfg);
    } else if (figures->parsed()) {
      auto cfg = lh::load_config(cfg_path);
      apply_threads(cfg, threads);
      if (!t_override.empty()) cfg.t_policy = lg::TPolicy::parse(t_override);
      const std::string dir = out_dir.empty() ? (cfg.out_dir.empty() ? "." : cfg.out_dir) : out_dir;
      std::filesystem::create_directories(dir);
      const lh::ExperimentSetup setup(cfg);
      lh::write_figure1(lh::figure1_data(setup), setup, dir + "/figure1.csv", dir + "/figure1.svg");
      const auto records = lh::run_sweep(setup);
      lh::write_records_csv(dir + "/trials.csv", records, cfg);
      lh::write_figure2(records, setup, dir + "/figure2.csv", dir + "/figure2.svg");
      std::cout << "wrote " << dir << "/{figure1,figure2}.{csv,svg} and " << dir << "/trials.csv\n";
    } else if (prove->parsed()) {
      auto cfg = lh::load_config(cfg_path);
      apply_threads(cfg, threads);
      const lh::ExperimentSetup setup(cfg);
      const auto rep = lh::run_prove(setup);
      lh::write_prove_csv(std::cout, rep);
      return rep.all_pass() ? 0 : 2;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
