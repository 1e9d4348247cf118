#pragma once

// Numerical checks of the proof chain for one configuration: γ_m identities,
// event-condition frequencies, the phi lower bound on conforming scenarios and Lipschitz
// tails of ‖g‖ and dist(h, λ∂f(x0)). Emits a table of check,value,bound,margin,pass.

#include <cmath>
#include <ostream>
#include <string>
#include <vector>

#include "lassogeom/bounds.hpp"
#include "lassogeom/harness/config.hpp"
#include "lassogeom/harness/format.hpp"
#include "lassogeom/harness/sweep.hpp"
#include "lassogeom/parallel.hpp"
#include "lassogeom/proofcheck.hpp"

namespace lassogeom::harness {

struct ProveRow {
  std::string check;
  double value = 0.0;
  double bound = 0.0;
  double margin = 0.0;  // ≥ 0 when the check passes
  bool pass = false;
};

struct ProveReport {
  double lambda = 0.0;
  double delta = 0.0;
  double t = 0.0;
  std::vector<ProveRow> rows;

  bool all_pass() const {
    for (const auto& r : rows)
      if (!r.pass) return false;
    return true;
  }
};

inline double prove_lambda(const ExperimentSetup& setup) {
  const auto& v = setup.config().prove_lambda;
  if (v == "best") return setup.calibration().lambda_best;
  double out = 0.0;
  if (!parse_double(v, out) || out < 0.0) throw InvalidArgument("config: prove_lambda must be 'best' or a number >= 0");
  return out;
}

inline ProveReport run_prove(const ExperimentSetup& setup, unsigned workers = 0) {
  const auto& cfg = setup.config();
  ProveReport rep;
  rep.lambda = prove_lambda(setup);
  rep.delta = setup.delta()(rep.lambda);
  const double gap = admissible_t_max(cfg.m, rep.delta);
  rep.t = cfg.prove_t > 0.0 ? cfg.prove_t : 0.8 * std::max(gap, 0.0);
  auto add = [&](std::string name, double value, double bound, double margin) {
    rep.rows.push_back({std::move(name), value, bound, margin, margin >= 0.0});
  };

  const double gm = gamma_m(cfg.m);
  const double md = static_cast<double>(cfg.m);
  add("gamma_m_le_sqrt_m", gm, std::sqrt(md), std::sqrt(md) - gm);
  add("gamma_m_sq_gt_sqrt_m_m1", gm * gm, std::sqrt(md * (md - 1.0)), gm * gm - std::sqrt(md * (md - 1.0)));
  add("bound_denominator", gap, 0.0, gap);

  // z̄ = √m z for one draw of the first configured noise family.
  StreamRng zrng(SeedSpec{cfg.seed, 0x2b});
  const Vector z = cfg.noise.front().make(cfg.m).sample(cfg.m, zrng);
  ScenarioSpec spec{&setup.geometry(), rep.lambda, rep.delta, rep.t, cfg.m, std::sqrt(md) * z};
  if (rep.t <= 0.0) return rep;
  const unsigned w = resolve_workers(workers ? workers : cfg.workers);
  const SeedSpec cond_seed{cfg.seed, 0xc0d};

  const auto fr = condition_frequencies(spec, cfg.prove_samples, cond_seed, w);
  for (int j = 0; j < 3; ++j) {
    const double lb = fr.lower_bound[j] - 3.0 * fr.std_error[j];
    add("event_condition_" + std::to_string(j + 1) + "_frequency", fr.frequency[j], lb, fr.frequency[j] - lb);
  }
  const double jlb = fr.joint_lower_bound - 3.0 * fr.joint_std_error;
  add("event_joint_frequency", fr.joint, jlb, fr.joint - jlb);

  // Lipschitz tails of ‖g‖ (mean γ_m) and dist(h, λ∂f) (sample mean).
  std::vector<double> gnorm(static_cast<std::size_t>(cfg.prove_samples));
  std::vector<double> dist(gnorm.size());
  parallel_for(gnorm.size(), w, [&](std::size_t i) {
    const auto sc = draw_scenario(spec, cond_seed, i, 1.0);
    gnorm[i] = sc.g.norm();
    dist[i] = sc.dist();
  });
  double dmean = 0.0;
  for (double d : dist) dmean += d;
  dmean /= static_cast<double>(dist.size());
  const std::vector<double> us{0.5, 1.0, 1.5, 2.0, 2.5, 3.0};
  for (const auto* tails : {&gnorm, &dist}) {
    const bool is_g = tails == &gnorm;
    for (const auto& c : lipschitz_tails(is_g ? "norm_g" : "dist_h", *tails, is_g ? gm : dmean, us)) {
      const double worst = std::max(c.upper_frequency - 3.0 * c.upper_std_error,
                                    c.lower_frequency - 3.0 * c.lower_std_error);
      add("lipschitz_tail_" + c.quantity + "_u" + fmt_double(c.deviation), std::max(c.upper_frequency, c.lower_frequency),
          c.bound, c.bound - worst);
    }
  }

  if (rep.t > gap) {
    add("lemma3_t_admissible", rep.t, gap, gap - rep.t);
    return rep;
  }
  const auto sw = lemma3_sweep(spec, cfg.prove_conforming, 50 * cfg.prove_conforming, SeedSpec{cfg.seed, 0x1e3}, 512, w);
  add("lemma3_conforming_scenarios", static_cast<double>(sw.conforming), static_cast<double>(cfg.prove_conforming),
      static_cast<double>(sw.conforming - cfg.prove_conforming));
  add("lemma3_failures", static_cast<double>(sw.failures), 0.0, static_cast<double>(-sw.failures));
  add("lemma3_threshold_failures", static_cast<double>(sw.threshold_failures), 0.0,
      static_cast<double>(-sw.threshold_failures));
  add("lemma3_min_margin", sw.min_margin, 0.0, sw.min_margin);
  return rep;
}

inline void write_prove_csv(std::ostream& os, const ProveReport& rep) {
  os << "# lassogeom-prove/1 lambda=" << fmt_double(rep.lambda) << " delta=" << fmt_double(rep.delta)
     << " t=" << fmt_double(rep.t) << "\n";
  os << "check,value,bound,margin,pass\n";
  for (const auto& r : rep.rows)
    os << r.check << ',' << fmt_double(r.value) << ',' << fmt_double(r.bound) << ',' << fmt_double(r.margin) << ','
       << fmt_bool(r.pass) << '\n';
}

}  // namespace lassogeom::harness
