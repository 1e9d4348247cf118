#pragma once

// Numerical checks of the argument behind the regularized-lasso error bound.
//
// With z̄ = √m z and g ~ N(0, I_m), h ~ N(0, I_n), the comparison problem
// reduces to the scalar program
//   L(t; g, h) = min_{α ≥ ℓ(t)} √(α²‖g‖² + ‖z̄‖² − 2α gᵀz̄) − α dist(h, λ∂f(x0)),
// and the bound follows once L > ‖z̄‖ on the event
//   (1) ‖g‖ ≥ γ_m − t/4,  (2) dist(h, λ∂f(x0)) ≤ √δ + t/4,  (3) gᵀz̄ ≤ (t/4)‖z̄‖.
// On that event L is bounded below by
//   φ(α) = √(α²(γ_m − t/4)² + ‖z̄‖² − ½α‖z̄‖t) − α(√δ + t/4),
// and φ(α) > ‖z̄‖ ⇔ α > 2‖z̄‖(√δ + t/2) / (γ_m² − δ − (t/2)(γ_m + √δ)).

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "lassogeom/bounds.hpp"
#include "lassogeom/errors.hpp"
#include "lassogeom/geometry.hpp"
#include "lassogeom/parallel.hpp"
#include "lassogeom/regularizers.hpp"
#include "lassogeom/rng.hpp"
#include "lassogeom/solvers.hpp"

namespace lassogeom {

struct ProofScenario {
  const SubdiffGeometry* geometry = nullptr;
  double lambda = 0.0;
  double delta = 0.0;  // δ(λ∂f(x0)), resolved by the caller
  double t = 0.0;
  std::int64_t m = 0;
  Vector zbar;  // √m z
  Vector g;     // length m
  Vector h;     // length n
  double ell = 0.0;  // ℓ(t) evaluated at ‖z‖ = ‖z̄‖/√m

  double zbar_norm() const { return zbar.norm(); }
  double dist() const { return geometry->dist(lambda, h); }
};

/// Builds a scenario and evaluates ℓ(t) from the regularized bound. Pass
/// `ell_override` to study synthetic radii.
inline ProofScenario make_scenario(const SubdiffGeometry& geometry, double lambda, double delta, double t,
                                   std::int64_t m, Vector zbar, Vector g, Vector h,
                                   std::optional<double> ell_override = std::nullopt) {
  detail::require(m >= 2, "scenario: m must be >= 2");
  detail::require(zbar.size() == m && g.size() == m, "scenario: z̄ and g must have length m");
  detail::require(h.size() == geometry.dimension(), "scenario: h must have length n");
  ProofScenario sc{&geometry, lambda, delta, t, m, std::move(zbar), std::move(g), std::move(h), 0.0};
  if (ell_override) {
    detail::require(*ell_override >= 0.0, "scenario: ell must be >= 0");
    sc.ell = *ell_override;
  } else {
    const double z_norm = sc.zbar.norm() / std::sqrt(static_cast<double>(m));
    sc.ell = regularized_bound({m, delta, t, z_norm}).value;
  }
  return sc;
}

/// L(t; g, h) by 1-D convex minimization over α ≥ ℓ(t). Returns −∞ when ‖g‖ < dist.
inline double L_value(const ProofScenario& sc) {
  const double gn2 = sc.g.squaredNorm();
  const double gn = std::sqrt(gn2);
  const double gz = sc.g.dot(sc.zbar);
  const double zn2 = sc.zbar.squaredNorm();
  const double d = sc.dist();
  auto radial = [&](double a) { return std::sqrt(std::max(a * a * gn2 + zn2 - 2.0 * a * gz, 0.0)); };
  auto psi = [&](double a) { return radial(a) - a * d; };
  auto dpsi = [&](double a) {
    const double r = radial(a);
    if (r == 0.0) return gn - d;  // one-sided; only reachable when αg = z̄
    return (a * gn2 - gz) / r - d;
  };
  const double lo = sc.ell;
  if (dpsi(lo) >= 0.0) return psi(lo);
  if (gn < d) return -std::numeric_limits<double>::infinity();
  if (gn == d) return -gz / gn;  // limit as α → ∞
  double hi = std::max(2.0 * lo, 1.0);
  int grow = 0;
  while (dpsi(hi) < 0.0) {
    hi *= 2.0;
    if (++grow > 2000) throw NumericalError("L_value: could not bracket the minimizer");
  }
  double a = lo;
  double b = hi;
  for (int it = 0; it < 300 && b - a > 1e-15 * std::max(1.0, b); ++it) {
    const double mid = 0.5 * (a + b);
    if (dpsi(mid) < 0.0) a = mid;
    else b = mid;
  }
  return std::min(psi(a), psi(b));
}

struct EventCheck {
  int index = 0;  // 1, 2, 3
  bool holds = false;
  double margin = 0.0;  // ≥ 0 exactly when the condition holds
};

inline std::array<EventCheck, 3> check_conditions(const ProofScenario& sc) {
  const double gm = gamma_m(sc.m);
  const double q = sc.t / 4.0;
  std::array<EventCheck, 3> out{};
  out[0] = {1, false, sc.g.norm() - (gm - q)};
  out[1] = {2, false, (std::sqrt(sc.delta) + q) - sc.dist()};
  out[2] = {3, false, q * sc.zbar.norm() - sc.g.dot(sc.zbar)};
  for (auto& e : out) e.holds = e.margin >= 0.0;
  return out;
}

inline bool all_conditions_hold(const std::array<EventCheck, 3>& c) {
  return c[0].holds && c[1].holds && c[2].holds;
}

/// Lower bound φ(α) valid on the event.
inline double phi_lower_bound(const ProofScenario& sc, double alpha) {
  const double gm = gamma_m(sc.m);
  const double zn = sc.zbar.norm();
  const double a = gm - sc.t / 4.0;
  const double inner = alpha * alpha * a * a + zn * zn - 0.5 * alpha * zn * sc.t;
  return std::sqrt(std::max(inner, 0.0)) - alpha * (std::sqrt(sc.delta) + sc.t / 4.0);
}

/// 2‖z̄‖(√δ + t/2) / (γ_m² − δ − (t/2)(γ_m + √δ)).
inline double lemma3_alpha_threshold(std::int64_t m, double delta, double t, double zbar_norm) {
  const double gm = gamma_m(m);
  const double sd = std::sqrt(delta);
  const double denom = gm * gm - delta - 0.5 * t * (gm + sd);
  if (!(denom > 0.0)) throw OutOfRange("lemma3_alpha_threshold: nonpositive denominator");
  return 2.0 * zbar_norm * (sd + 0.5 * t) / denom;
}

struct Lemma3Result {
  bool holds = false;
  double min_margin = 0.0;        // smallest of the three margins below
  double phi_margin = 0.0;        // min over the α grid of φ(α) − ‖z̄‖
  double L_margin = 0.0;          // L(t; g, h) − ‖z̄‖
  double threshold_margin = 0.0;  // ℓ(t) − lemma3_alpha_threshold
};

/// Verifies φ(α) > ‖z̄‖ on a log grid over [ℓ, 10³ℓ], L > ‖z̄‖, and ℓ above the α threshold.
inline Lemma3Result lemma3_check(const ProofScenario& sc, int alpha_samples = 512) {
  detail::require(alpha_samples >= 2, "lemma3_check: need at least 2 alpha samples");
  if (!all_conditions_hold(check_conditions(sc)))
    throw InvalidArgument("lemma3_check: scenario violates the event conditions");
  if (!(sc.ell > 0.0)) throw InvalidArgument("lemma3_check: requires ell(t) > 0");
  const double zn = sc.zbar.norm();
  Lemma3Result r;
  r.phi_margin = std::numeric_limits<double>::infinity();
  const double log_lo = std::log(sc.ell);
  const double log_hi = std::log(1e3 * sc.ell);
  for (int i = 0; i < alpha_samples; ++i) {
    const double a = std::exp(log_lo + (log_hi - log_lo) * i / (alpha_samples - 1));
    r.phi_margin = std::min(r.phi_margin, phi_lower_bound(sc, a) - zn);
  }
  r.L_margin = L_value(sc) - zn;
  r.threshold_margin = sc.ell - lemma3_alpha_threshold(sc.m, sc.delta, sc.t, zn);
  r.min_margin = std::min({r.phi_margin, r.L_margin, r.threshold_margin});
  r.holds = r.phi_margin > 0.0 && r.L_margin > 0.0 && r.threshold_margin > 0.0;
  return r;
}

// ---------------------------------------------------------------------------
// Monte Carlo over (g, h)

struct ScenarioSpec {
  const SubdiffGeometry* geometry = nullptr;
  double lambda = 0.0;
  double delta = 0.0;
  double t = 0.0;
  std::int64_t m = 0;
  Vector zbar;
};

/// Scenario i draws g then h from seed.child(i).
inline ProofScenario draw_scenario(const ScenarioSpec& spec, SeedSpec seed, std::uint64_t i,
                                   std::optional<double> ell_override = std::nullopt) {
  StreamRng rng(seed.child(i));
  Vector g(spec.m);
  Vector h(spec.geometry->dimension());
  fill_normal(rng, g);
  fill_normal(rng, h);
  return make_scenario(*spec.geometry, spec.lambda, spec.delta, spec.t, spec.m, spec.zbar, std::move(g),
                       std::move(h), ell_override);
}

struct ConditionFrequencies {
  std::int64_t samples = 0;
  std::array<double, 3> frequency{};
  std::array<double, 3> std_error{};
  std::array<double, 3> lower_bound{};  // 1 − e, 1 − e, 1 − e/2 with e = exp(−t²/32)
  double joint = 0.0;
  double joint_std_error = 0.0;
  double joint_lower_bound = 0.0;  // 1 − (5/2) e
};

inline ConditionFrequencies condition_frequencies(const ScenarioSpec& spec, std::int64_t samples, SeedSpec seed,
                                                  unsigned workers = 0) {
  detail::require(samples >= 2, "condition_frequencies: samples must be >= 2");
  std::vector<unsigned char> flags(static_cast<std::size_t>(samples));
  // ℓ(t) plays no role in the conditions; skip its admissibility check.
  parallel_for(static_cast<std::size_t>(samples), resolve_workers(workers), [&](std::size_t i) {
    const auto sc = draw_scenario(spec, seed, i, 1.0);
    const auto c = check_conditions(sc);
    flags[i] = static_cast<unsigned char>((c[0].holds ? 1 : 0) | (c[1].holds ? 2 : 0) | (c[2].holds ? 4 : 0));
  });
  ConditionFrequencies out;
  out.samples = samples;
  std::array<std::int64_t, 3> counts{};
  std::int64_t joint = 0;
  for (auto f : flags) {
    for (int j = 0; j < 3; ++j) counts[j] += (f >> j) & 1;
    joint += f == 7;
  }
  const auto N = static_cast<double>(samples);
  auto se = [N](double p) { return std::sqrt(std::max(p * (1.0 - p), 0.0) / N); };
  const double e = std::exp(-spec.t * spec.t / 32.0);
  for (int j = 0; j < 3; ++j) {
    out.frequency[j] = counts[j] / N;
    out.std_error[j] = se(out.frequency[j]);
  }
  out.lower_bound = {1.0 - e, 1.0 - e, 1.0 - 0.5 * e};
  out.joint = joint / N;
  out.joint_std_error = se(out.joint);
  out.joint_lower_bound = 1.0 - 2.5 * e;
  return out;
}

struct Lemma3Sweep {
  std::int64_t drawn = 0;
  std::int64_t conforming = 0;
  std::int64_t failures = 0;            // lemma3_check.holds == false
  std::int64_t threshold_failures = 0;  // ℓ(t) ≤ α threshold
  double min_margin = std::numeric_limits<double>::infinity();
};

/// Draws scenarios until `target_conforming` satisfy the event (or `max_draws`), checking each.
inline Lemma3Sweep lemma3_sweep(const ScenarioSpec& spec, std::int64_t target_conforming, std::int64_t max_draws,
                                SeedSpec seed, int alpha_samples = 512, unsigned workers = 0) {
  Lemma3Sweep out;
  const std::int64_t batch = 4096;
  while (out.conforming < target_conforming && out.drawn < max_draws) {
    const std::int64_t count = std::min(batch, max_draws - out.drawn);
    std::vector<std::optional<Lemma3Result>> results(static_cast<std::size_t>(count));
    const std::int64_t base = out.drawn;
    parallel_for(static_cast<std::size_t>(count), resolve_workers(workers), [&](std::size_t i) {
      const auto sc = draw_scenario(spec, seed, static_cast<std::uint64_t>(base) + i);
      if (all_conditions_hold(check_conditions(sc))) results[i] = lemma3_check(sc, alpha_samples);
    });
    for (const auto& r : results) {
      ++out.drawn;
      if (!r) continue;
      ++out.conforming;
      if (!r->holds) ++out.failures;
      if (!(r->threshold_margin > 0.0)) ++out.threshold_failures;
      out.min_margin = std::min(out.min_margin, r->min_margin);
      if (out.conforming >= target_conforming) break;
    }
  }
  return out;
}

struct TailCheck {
  std::string quantity;
  double deviation = 0.0;
  double upper_frequency = 0.0;  // P(ψ − Eψ ≥ u)
  double lower_frequency = 0.0;  // P(ψ − Eψ ≤ −u)
  double upper_std_error = 0.0;
  double lower_std_error = 0.0;
  double bound = 0.0;  // exp(−u²/2)
  bool holds = false;  // both frequencies ≤ bound + 3·stderr
};

/// Empirical tails of a 1-Lipschitz statistic around `mean` against exp(−u²/2).
inline std::vector<TailCheck> lipschitz_tails(const std::string& quantity, const std::vector<double>& values,
                                              double mean, const std::vector<double>& deviations) {
  std::vector<TailCheck> out;
  const auto N = static_cast<double>(values.size());
  for (double u : deviations) {
    TailCheck c;
    c.quantity = quantity;
    c.deviation = u;
    std::int64_t up = 0;
    std::int64_t down = 0;
    for (double v : values) {
      up += (v - mean >= u);
      down += (v - mean <= -u);
    }
    c.upper_frequency = up / N;
    c.lower_frequency = down / N;
    c.upper_std_error = std::sqrt(c.upper_frequency * (1 - c.upper_frequency) / N);
    c.lower_std_error = std::sqrt(c.lower_frequency * (1 - c.lower_frequency) / N);
    c.bound = std::exp(-u * u / 2.0);
    c.holds = c.upper_frequency <= c.bound + 3 * c.upper_std_error &&
              c.lower_frequency <= c.bound + 3 * c.lower_std_error;
    out.push_back(c);
  }
  return out;
}

// ---------------------------------------------------------------------------
// End-to-end

struct TrialRecord {
  std::int64_t trial_id = 0;
  SeedSpec seed{};
  double lambda = 0.0;
  std::string noise_family;
  double noise_param = 0.0;
  double z_norm = 0.0;
  double err = 0.0;             // ‖x̂ − x0‖
  double err_normalized = 0.0;  // ‖x̂ − x0‖/‖z‖
  double bound_l_t = std::numeric_limits<double>::quiet_NaN();  // ℓ(t); NaN when not valid
  double t = 0.0;
  double sharp_est = std::numeric_limits<double>::quiet_NaN();
  bool violated = false;
  bool degenerate = false;  // ‖z‖ = 0
  long iterations = 0;
  bool converged = false;
  std::string status = "ok";  // ok | vacuous | t_out_of_range | solver_failed
  std::optional<double> lemma2_probe_margin;  // min over probes of objective − ‖z‖
};

struct EndToEndOptions {
  int probe_directions = 64;
  double probe_inflation = 1e-6;
  SeedSpec probe_seed{};
};

/// Solves the ℓ₂-lasso, compares ‖x̂ − x0‖ to ℓ(t), and probes the error-vector
/// objective on the sphere of radius ℓ(t)(1 + ε).
inline TrialRecord end_to_end_bound_check(const ProblemInstance& inst, const Regularizer& f, double lambda,
                                          double delta, double t, const SolveConfig& cfg = {},
                                          const EndToEndOptions& opt = {}) {
  TrialRecord rec;
  rec.lambda = lambda;
  rec.t = t;
  rec.z_norm = inst.z.norm();
  rec.degenerate = rec.z_norm == 0.0;
  if (delta < static_cast<double>(inst.m) && !rec.degenerate) rec.sharp_est = sharp_estimate(inst.m, delta, rec.z_norm);

  const double gap = admissible_t_max(inst.m, delta);
  if (gap <= 0.0) rec.status = "vacuous";
  else if (!(t > 0.0) || t > gap) rec.status = "t_out_of_range";
  else rec.bound_l_t = regularized_bound({inst.m, delta, t, rec.z_norm}).value;

  Solution sol;
  try {
    sol = solve_l2_lasso(inst, f, lambda, cfg);
  } catch (const NonConvergence& e) {
    rec.status = "solver_failed";
    rec.iterations = e.iterations();
    rec.converged = false;
    return rec;
  }
  rec.iterations = sol.iterations;
  rec.converged = sol.converged;
  rec.err = (sol.x - inst.x0).norm();
  rec.err_normalized = rec.degenerate ? std::numeric_limits<double>::quiet_NaN() : rec.err / rec.z_norm;
  if (rec.status == "ok" && !rec.degenerate) {
    rec.violated = rec.err > rec.bound_l_t;
    StreamRng rng(opt.probe_seed);
    const double radius = rec.bound_l_t * (1.0 + opt.probe_inflation);
    double worst = std::numeric_limits<double>::infinity();
    Vector w(inst.n);
    for (int p = 0; p < opt.probe_directions; ++p) {
      fill_normal(rng, w);
      w *= radius / w.norm();
      worst = std::min(worst, error_vector_objective(inst, f, lambda, w) - rec.z_norm);
    }
    rec.lemma2_probe_margin = worst;
  }
  return rec;
}

}  // namespace lassogeom
