#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <memory>
#include <ostream>
#include <string>
#include <vector>

#include "lassogeom/bounds.hpp"
#include "lassogeom/geometry.hpp"
#include "lassogeom/harness/config.hpp"
#include "lassogeom/harness/format.hpp"
#include "lassogeom/model.hpp"
#include "lassogeom/parallel.hpp"
#include "lassogeom/proofcheck.hpp"
#include "lassogeom/regularizers.hpp"
#include "lassogeom/solvers.hpp"

namespace lassogeom::harness {

inline constexpr const char* kTrialSchemaVersion = "lassogeom-trials/1";
inline constexpr const char* kTrialColumns =
    "trial_id,seed,lambda,noise_family,noise_param,z_norm,err,err_normalized,bound_l_t,t,sharp_est,violated,"
    "degenerate,iterations,converged";

/// Geometry, δ(λ) and calibration shared by every trial of a config.
/// δ depends on x0 only through (n, k) or (d, r), so a reference signal suffices.
class ExperimentSetup {
 public:
  explicit ExperimentSetup(const ExperimentConfig& cfg)
      : cfg_(cfg),
        f_(cfg.is_l1() ? Regularizer::l1() : Regularizer::nuclear(cfg.d)),
        reference_(reference_signal(cfg)),
        geometry_(std::make_unique<SubdiffGeometry>(f_, reference_)),
        delta_(std::make_unique<DeltaCurve>(*geometry_, cfg.delta_method, cfg.workers)),
        calibration_(calibrate(*delta_, cfg.m)) {}

  const ExperimentConfig& config() const { return cfg_; }
  const Regularizer& regularizer() const { return f_; }
  const SubdiffGeometry& geometry() const { return *geometry_; }
  const DeltaCurve& delta() const { return *delta_; }
  const CalibrationReport& calibration() const { return calibration_; }

  SignalModel signal_for(SeedSpec seed) const {
    return cfg_.is_l1() ? generate_sparse_signal(cfg_.n, cfg_.k, seed) : generate_low_rank_signal(cfg_.d, cfg_.r, seed);
  }

  std::vector<double> lambda_grid() const { return resolve_lambda_grid(cfg_.lambda_grid, calibration_); }

  /// λ values for a grid spec given the calibration.
  static std::vector<double> resolve_lambda_grid(const LambdaGridSpec& spec, const CalibrationReport& cal) {
    std::vector<double> out;
    switch (spec.kind) {
      case LambdaGridSpec::Kind::List: return spec.values;
      case LambdaGridSpec::Kind::LogSpace: {
        for (int i = 0; i < spec.count; ++i) {
          const double s = spec.count == 1 ? 0.0 : static_cast<double>(i) / (spec.count - 1);
          out.push_back(std::exp(std::log(spec.lo) + s * (std::log(spec.hi) - std::log(spec.lo))));
        }
        return out;
      }
      case LambdaGridSpec::Kind::Auto: {
        double lo = 0.1 * cal.lambda_best;
        double hi = 3.0 * cal.lambda_best;
        if (cal.feasible) {
          lo = 0.5 * cal.lambda_min.value_or(0.1 * cal.lambda_best);
          hi = 1.2 * *cal.lambda_max;
        }
        LambdaGridSpec ls{LambdaGridSpec::Kind::LogSpace, spec.count, lo, hi, {}};
        return resolve_lambda_grid(ls, cal);
      }
      case LambdaGridSpec::Kind::Inside: {
        if (!cal.feasible) throw BoundVacuous("lambda_grid inside: (lambda_min, lambda_max) is empty for this m");
        const double lo = cal.lambda_min.value_or(0.0);
        const double hi = *cal.lambda_max;
        for (int i = 0; i < spec.count; ++i) out.push_back(lo + (hi - lo) * (i + 1) / (spec.count + 1));
        return out;
      }
    }
    return out;
  }

  SolveConfig solve_config() const {
    SolveConfig sc;
    sc.max_iterations = cfg_.max_iterations;
    sc.optimality_tol = cfg_.optimality_tol;
    return sc;
  }

 private:
  static SignalModel reference_signal(const ExperimentConfig& cfg) {
    const SeedSpec s{cfg.seed, 0x5eed};
    return cfg.is_l1() ? generate_sparse_signal(cfg.n, cfg.k, s) : generate_low_rank_signal(cfg.d, cfg.r, s);
  }

  ExperimentConfig cfg_;
  Regularizer f_;
  SignalModel reference_;
  std::unique_ptr<SubdiffGeometry> geometry_;
  std::unique_ptr<DeltaCurve> delta_;
  CalibrationReport calibration_;
};

/// One record per (λ, noise, trial), ordered λ-major then noise then trial.
/// Trial i uses seed {master, 0}.child(i): child(0) signal, child(1) instance,
/// child(2) sphere probes. Solver failures become rows with converged = 0.
inline std::vector<TrialRecord> run_sweep(const ExperimentSetup& setup, unsigned workers = 0) {
  const auto& cfg = setup.config();
  const auto lambdas = setup.lambda_grid();
  const std::size_t per_lambda = cfg.noise.size() * static_cast<std::size_t>(cfg.trials);
  const std::size_t total = lambdas.size() * per_lambda;
  std::vector<double> deltas(lambdas.size());
  for (std::size_t i = 0; i < lambdas.size(); ++i) deltas[i] = setup.delta()(lambdas[i]);

  std::vector<TrialRecord> out(total);
  const SeedSpec root{cfg.seed, 0};
  const SolveConfig solve_cfg = setup.solve_config();
  parallel_for(total, resolve_workers(workers ? workers : cfg.workers), [&](std::size_t id) {
    const std::size_t li = id / per_lambda;
    const std::size_t ni = (id % per_lambda) / static_cast<std::size_t>(cfg.trials);
    const SeedSpec trial_seed = root.child(id);
    const auto& choice = cfg.noise[ni];
    const SignalModel x0 = setup.signal_for(trial_seed.child(0));
    const NoiseSpec noise = choice.make(cfg.m);
    const ProblemInstance inst = generate_instance(x0, cfg.m, noise, trial_seed.child(1));
    const double t = cfg.t_policy.resolve(cfg.m, deltas[li]);
    EndToEndOptions opt;
    opt.probe_seed = trial_seed.child(2);
    TrialRecord rec = end_to_end_bound_check(inst, setup.regularizer(), lambdas[li], deltas[li], t, solve_cfg, opt);
    rec.trial_id = static_cast<std::int64_t>(id);
    rec.seed = trial_seed;
    rec.noise_family = choice.family;
    rec.noise_param = choice.params.empty() ? 0.0 : choice.params.front();
    out[id] = std::move(rec);
  });
  return out;
}

inline std::vector<TrialRecord> run_sweep(const ExperimentConfig& cfg, unsigned workers = 0) {
  return run_sweep(ExperimentSetup(cfg), workers);
}

inline void write_records_csv(std::ostream& os, const std::vector<TrialRecord>& records, const ExperimentConfig& cfg) {
  os << "# " << kTrialSchemaVersion << " regularizer=" << cfg.regularizer << " m=" << cfg.m
     << " t_policy=" << cfg.t_policy.describe() << " seed=" << cfg.seed << "\n";
  os << kTrialColumns << "\n";
  for (const auto& r : records) {
    // Non-finite ℓ(t) (vacuous λ, inadmissible t, failed solve) is written as inf.
    const double bound = std::isnan(r.bound_l_t) ? INFINITY : r.bound_l_t;
    os << fmt_int(r.trial_id) << ',' << fmt_uint(r.seed.stream) << ',' << fmt_double(r.lambda) << ','
       << r.noise_family << ',' << fmt_double(r.noise_param) << ',' << fmt_double(r.z_norm) << ','
       << fmt_double(r.converged ? r.err : NAN) << ',' << fmt_double(r.converged ? r.err_normalized : NAN) << ','
       << fmt_double(bound) << ',' << fmt_double(r.t) << ',' << fmt_double(r.sharp_est) << ','
       << fmt_bool(r.violated) << ',' << fmt_bool(r.degenerate) << ',' << r.iterations << ','
       << fmt_bool(r.converged) << '\n';
  }
}

inline void write_records_csv(const std::string& path, const std::vector<TrialRecord>& records,
                              const ExperimentConfig& cfg) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw InvalidArgument("cannot write '" + path + "'");
  write_records_csv(os, records, cfg);
}

}  // namespace lassogeom::harness
