#pragma once

// Error bounds for the regularized (square-root) lasso, the constrained
// lasso comparison bound, the asymptotic sharp estimate, and γ_m = E‖g‖.

#include <charconv>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "lassogeom/errors.hpp"
#include "lassogeom/geometry.hpp"

namespace lassogeom {

/// E‖g‖ for g ~ N(0, I_m): √2 Γ((m+1)/2) / Γ(m/2).
inline double gamma_m(std::int64_t m) {
  detail::require(m >= 1, "gamma_m: m must be >= 1");
  const double x = 0.5 * static_cast<double>(m);
  if (m < 100) return std::numbers::sqrt2 * std::tgamma(x + 0.5) / std::tgamma(x);
  // Γ(x + ½)/Γ(x) = √x (1 − 1/(8x) + 1/(128x²) + ...), relative error < 2e-15 for x ≥ 50.
  const double u = 1.0 / x;
  const double series =
      1.0 + u * (-1.0 / 8 + u * (1.0 / 128 + u * (5.0 / 1024 + u * (-21.0 / 32768 + u * (-399.0 / 262144 +
                                                                                       u * (869.0 / 4194304))))));
  return std::numbers::sqrt2 * std::sqrt(x) * series;
}

struct BoundInput {
  std::int64_t m = 0;
  double delta = 0.0;
  double t = 0.0;
  double z_norm = 0.0;
};

struct BoundReport {
  enum class Flavor { Regularized, Constrained, SharpEstimate };
  Flavor flavor = Flavor::Regularized;
  double value = 0.0;
  /// 1 − 5exp(−t²/32) (regularized) or 1 − 6exp(−t²/26) (constrained); NaN for the sharp estimate.
  double probability = std::numeric_limits<double>::quiet_NaN();
  bool formally_valid = true;
  /// probability > 0; otherwise the statement holds formally but guarantees nothing.
  bool probabilistically_meaningful = false;
};

inline std::string flavor_name(BoundReport::Flavor f) {
  switch (f) {
    case BoundReport::Flavor::Regularized: return "regularized";
    case BoundReport::Flavor::Constrained: return "constrained";
    case BoundReport::Flavor::SharpEstimate: return "sharp_estimate";
  }
  return "unknown";
}

/// Largest admissible t: √(m−1) − √δ.
inline double admissible_t_max(std::int64_t m, double delta) {
  return std::sqrt(static_cast<double>(m - 1)) - std::sqrt(delta);
}

/// Smallest t at which 1 − 5exp(−t²/32) is positive: √(32 ln 5).
inline double meaningful_t_threshold() { return std::sqrt(32.0 * std::log(5.0)); }

/// t with 5exp(−t²/32) = failure.
inline double t_for_failure_probability(double failure) {
  detail::require(failure > 0.0 && failure < 5.0, "t_for_failure_probability: failure must lie in (0, 5)");
  return std::sqrt(32.0 * std::log(5.0 / failure));
}

namespace detail {

inline void check_bound_input(const BoundInput& in, const char* who) {
  require(in.m >= 2, std::string(who) + ": m must be >= 2");
  require(in.delta >= 0.0 && std::isfinite(in.delta), std::string(who) + ": delta must be >= 0");
  require(in.z_norm >= 0.0 && std::isfinite(in.z_norm), std::string(who) + ": ||z|| must be >= 0");
  const double gap = admissible_t_max(in.m, in.delta);
  if (gap <= 0.0) {
    std::ostringstream os;
    os.precision(17);
    os << who << ": sqrt(delta) = " << std::sqrt(in.delta) << " >= sqrt(m-1) = " << std::sqrt(double(in.m - 1))
       << "; lambda lies outside (lambda_min, lambda_max)";
    throw BoundVacuous(os.str());
  }
  if (!(in.t > 0.0) || in.t > gap) {
    std::ostringstream os;
    os.precision(17);
    os << who << ": t = " << in.t << " outside (0, " << gap << "]";
    throw OutOfRange(os.str());
  }
}

}  // namespace detail

/// ℓ(t) = 2‖z‖(√δ + t)/(√(m−1) − √δ − t), holding with probability 1 − 5exp(−t²/32).
inline BoundReport regularized_bound(const BoundInput& in) {
  detail::check_bound_input(in, "regularized_bound");
  const double sd = std::sqrt(in.delta);
  const double denom = std::sqrt(static_cast<double>(in.m - 1)) - sd - in.t;
  BoundReport r;
  r.flavor = BoundReport::Flavor::Regularized;
  r.value = denom > 0.0 ? 2.0 * in.z_norm * (sd + in.t) / denom : std::numeric_limits<double>::infinity();
  r.probability = 1.0 - 5.0 * std::exp(-in.t * in.t / 32.0);
  r.probabilistically_meaningful = r.probability > 0.0;
  return r;
}

/// Constrained-lasso bound ‖z‖ √m/√(m−1) (√δ_cone + t)/(√(m−1) − √δ_cone − t), probability 1 − 6exp(−t²/26).
inline BoundReport constrained_bound(std::int64_t m, double delta_cone, double t, double z_norm) {
  const BoundInput in{m, delta_cone, t, z_norm};
  detail::check_bound_input(in, "constrained_bound");
  const double sd = std::sqrt(delta_cone);
  const double sm1 = std::sqrt(static_cast<double>(m - 1));
  const double denom = sm1 - sd - t;
  if (!(denom > 0.0)) throw OutOfRange("constrained_bound: t at the admissible boundary makes the bound infinite");
  BoundReport r;
  r.flavor = BoundReport::Flavor::Constrained;
  r.value = z_norm * (std::sqrt(static_cast<double>(m)) / sm1) * (sd + t) / denom;
  r.probability = 1.0 - 6.0 * std::exp(-t * t / 26.0);
  r.probabilistically_meaningful = r.probability > 0.0;
  return r;
}

/// Asymptotic estimate ‖z‖√δ/√(m − δ) for Gaussian noise.
inline double sharp_estimate(std::int64_t m, double delta, double z_norm) {
  detail::require(delta >= 0.0 && z_norm >= 0.0, "sharp_estimate: delta and ||z|| must be >= 0");
  if (!(delta < static_cast<double>(m))) throw InvalidArgument("sharp_estimate: requires delta < m");
  return z_norm * std::sqrt(delta) / std::sqrt(static_cast<double>(m) - delta);
}

// ---------------------------------------------------------------------------
// t selection

/// How t is chosen at each λ: a fixed value, the value giving a target
/// failure probability 5exp(−t²/32), or a fraction of the admissible range.
struct TPolicy {
  enum class Kind { Fixed, FailureProbability, GapFraction };
  Kind kind = Kind::FailureProbability;
  double parameter = 0.05;

  static TPolicy fixed(double t) { return {Kind::Fixed, t}; }
  static TPolicy failure_probability(double p) { return {Kind::FailureProbability, p}; }
  static TPolicy gap_fraction(double f) { return {Kind::GapFraction, f}; }

  /// Parses "fixed:<t>", "prob:<p>" or "gap:<fraction>".
  static TPolicy parse(const std::string& text) {
    const auto colon = text.find(':');
    detail::require(colon != std::string::npos, "t policy: expected <kind>:<value>, got '" + text + "'");
    const std::string kind = text.substr(0, colon);
    double v = 0.0;
    try {
      v = std::stod(text.substr(colon + 1));
    } catch (...) {
      throw InvalidArgument("t policy: bad number in '" + text + "'");
    }
    if (kind == "fixed") {
      detail::require(v > 0.0, "t policy: fixed t must be > 0");
      return fixed(v);
    }
    if (kind == "prob") {
      detail::require(v > 0.0 && v < 5.0, "t policy: failure probability must lie in (0, 5)");
      return failure_probability(v);
    }
    if (kind == "gap") {
      detail::require(v > 0.0 && v < 1.0, "t policy: gap fraction must lie in (0, 1)");
      return gap_fraction(v);
    }
    throw InvalidArgument("t policy: unknown kind '" + kind + "'");
  }

  std::string describe() const {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, parameter);
    const std::string v(buf, res.ptr);
    switch (kind) {
      case Kind::Fixed: return "fixed:" + v;
      case Kind::FailureProbability: return "prob:" + v;
      case Kind::GapFraction: return "gap:" + v;
    }
    return v;
  }

  /// t at a given (m, δ). May exceed the admissible range; callers check.
  double resolve(std::int64_t m, double delta) const {
    switch (kind) {
      case Kind::Fixed: return parameter;
      case Kind::FailureProbability: return t_for_failure_probability(parameter);
      case Kind::GapFraction: return parameter * std::max(admissible_t_max(m, delta), 0.0);
    }
    return parameter;
  }
};

// ---------------------------------------------------------------------------
// Curves over λ

struct BoundCurvePoint {
  enum class Status { Ok, Vacuous, TOutOfRange };
  double lambda = 0.0;
  double delta = 0.0;
  double t = 0.0;
  double denominator = 0.0;  // √(m−1) − √δ
  Status status = Status::Ok;
  std::optional<double> bound;  // ℓ(t)
  std::optional<double> sharp;  // ‖z‖√δ/√(m−δ) when δ < m
};

inline const char* status_name(BoundCurvePoint::Status s) {
  switch (s) {
    case BoundCurvePoint::Status::Ok: return "ok";
    case BoundCurvePoint::Status::Vacuous: return "vacuous";
    case BoundCurvePoint::Status::TOutOfRange: return "t_out_of_range";
  }
  return "unknown";
}

/// ℓ(t) across a λ grid. Entries outside (λ_min, λ_max), or whose t is not
/// admissible, are kept and tagged rather than dropped.
inline std::vector<BoundCurvePoint> bound_curve(const DeltaCurve& delta, std::int64_t m, double z_norm,
                                                const TPolicy& t_policy, const std::vector<double>& lambda_grid) {
  detail::require(!lambda_grid.empty(), "bound_curve: empty lambda grid");
  std::vector<BoundCurvePoint> out;
  out.reserve(lambda_grid.size());
  for (double lambda : lambda_grid) {
    BoundCurvePoint p;
    p.lambda = lambda;
    p.delta = delta(lambda);
    p.denominator = admissible_t_max(m, p.delta);
    p.t = t_policy.resolve(m, p.delta);
    if (p.delta < static_cast<double>(m)) p.sharp = sharp_estimate(m, p.delta, z_norm);
    if (p.denominator <= 0.0) {
      p.status = BoundCurvePoint::Status::Vacuous;
    } else if (!(p.t > 0.0) || p.t > p.denominator) {
      p.status = BoundCurvePoint::Status::TOutOfRange;
    } else {
      p.bound = regularized_bound({m, p.delta, p.t, z_norm}).value;
    }
    out.push_back(p);
  }
  return out;
}

inline std::vector<BoundCurvePoint> bound_curve(const DeltaCurve& delta, std::int64_t m, double z_norm, double t,
                                                const std::vector<double>& lambda_grid) {
  detail::require(t > 0.0, "bound_curve: t must be > 0");
  return bound_curve(delta, m, z_norm, TPolicy::fixed(t), lambda_grid);
}

}  // namespace lassogeom
