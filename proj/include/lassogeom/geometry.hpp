#pragma once

// Gaussian squared distance δ(λ∂f(x0)) = E‖h − Π_{λ∂f(x0)}(h)‖², h ~ N(0, I_n):
// closed form for l1, tabulated upper bounds, Monte Carlo for any geometry,
// the conic-hull version, and calibration of λ_min < λ_best < λ_max.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "lassogeom/errors.hpp"
#include "lassogeom/parallel.hpp"
#include "lassogeom/regularizers.hpp"
#include "lassogeom/rng.hpp"

namespace lassogeom {

struct MonteCarloEstimate {
  double estimate = 0.0;
  double std_error = 0.0;
  std::int64_t samples = 0;
};

/// δ(λ∂‖x0‖₁) for a k-sparse x0 in R^n.
inline double delta_l1_closed_form(std::int64_t n, std::int64_t k, double lambda) {
  detail::require(k >= 1 && k <= n, "delta_l1_closed_form: need 1 <= k <= n");
  detail::require(lambda >= 0.0 && std::isfinite(lambda), "delta_l1_closed_form: lambda must be >= 0");
  const double l2 = lambda * lambda;
  const double off = (1.0 + l2) * std::erfc(lambda / std::numbers::sqrt2) -
                     std::sqrt(2.0 / std::numbers::pi) * lambda * std::exp(-0.5 * l2);
  return static_cast<double>(k) * (1.0 + l2) + static_cast<double>(n - k) * off;
}

/// Smallest λ at which delta_upper_bound applies.
inline double delta_upper_bound_threshold(const SubdiffGeometry& g) {
  const auto n = static_cast<double>(g.dimension());
  if (g.regularizer().is_l1()) return std::sqrt(2.0 * std::log(n / static_cast<double>(g.structure_size())));
  return 2.0 * std::pow(n, 0.25);
}

/// (λ² + 3)k for l1 above √(2 log(n/k)); λ²r + 2√n(r + 1) for nuclear above 2n^{1/4}.
inline double delta_upper_bound(const SubdiffGeometry& g, double lambda) {
  detail::require(lambda >= 0.0, "delta_upper_bound: lambda must be >= 0");
  const double threshold = delta_upper_bound_threshold(g);
  // Relative slack so that evaluating exactly at a computed threshold is accepted.
  if (lambda < threshold * (1.0 - 1e-14)) {
    std::ostringstream os;
    os.precision(17);
    os << "delta_upper_bound: lambda " << lambda << " below validity threshold " << threshold;
    throw OutOfRange(os.str());
  }
  const auto s = static_cast<double>(g.structure_size());
  const double l2 = lambda * lambda;
  if (g.regularizer().is_l1()) return (l2 + 3.0) * s;
  return l2 * s + 2.0 * std::sqrt(static_cast<double>(g.dimension())) * (s + 1.0);
}

namespace detail {

inline constexpr std::int64_t kMonteCarloChunk = 2048;

/// Runs per_sample(h) over `samples` standard-normal draws of dimension n.
/// Chunk c draws from seed.child(c); chunk sums are reduced by chunk index,
/// so the result is identical for every worker count.
template <class PerSample>
MonteCarloEstimate monte_carlo_mean(Eigen::Index n, std::int64_t samples, SeedSpec seed, unsigned workers,
                                    PerSample&& per_sample) {
  require(samples >= 2, "monte carlo: samples must be >= 2");
  const std::int64_t chunks = (samples + kMonteCarloChunk - 1) / kMonteCarloChunk;
  std::vector<double> sums(static_cast<std::size_t>(chunks)), sq(static_cast<std::size_t>(chunks));
  parallel_for(static_cast<std::size_t>(chunks), resolve_workers(workers), [&](std::size_t c) {
    StreamRng rng(seed.child(c));
    Vector h(n);
    const std::int64_t begin = static_cast<std::int64_t>(c) * kMonteCarloChunk;
    const std::int64_t end = std::min(samples, begin + kMonteCarloChunk);
    double s = 0.0;
    double s2 = 0.0;
    for (std::int64_t j = begin; j < end; ++j) {
      fill_normal(rng, h);
      const double v = per_sample(h);
      s += v;
      s2 += v * v;
    }
    sums[c] = s;
    sq[c] = s2;
  });
  double total = 0.0;
  double total2 = 0.0;
  for (std::int64_t c = 0; c < chunks; ++c) {
    total += sums[c];
    total2 += sq[c];
  }
  const auto N = static_cast<double>(samples);
  const double mean = total / N;
  const double var = std::max(0.0, (total2 - N * mean * mean) / (N - 1.0));
  return {mean, std::sqrt(var / N), samples};
}

/// Golden-section minimization of a convex function on [lo, hi].
template <class F>
std::pair<double, double> golden_section(F&& f, double lo, double hi, double tol) {
  constexpr double kInvPhi = 0.6180339887498949;
  double a = lo;
  double b = hi;
  double c = b - kInvPhi * (b - a);
  double d = a + kInvPhi * (b - a);
  double fc = f(c);
  double fd = f(d);
  while (b - a > tol) {
    if (fc <= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - kInvPhi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + kInvPhi * (b - a);
      fd = f(d);
    }
  }
  double x = c;
  double fx = fc;
  if (fd < fx) {
    x = d;
    fx = fd;
  }
  for (double e : {lo, hi, 0.5 * (a + b)}) {
    const double fe = f(e);
    if (fe < fx) {
      x = e;
      fx = fe;
    }
  }
  return {x, fx};
}

}  // namespace detail

/// Sample mean and standard error of dist²(h, λ∂f(x0)) over h ~ N(0, I_n).
inline MonteCarloEstimate delta_monte_carlo(const SubdiffGeometry& g, double lambda, std::int64_t samples,
                                            SeedSpec seed, unsigned workers = 0) {
  detail::require(lambda >= 0.0, "delta_monte_carlo: lambda must be >= 0");
  if (g.regularizer().is_l1())
    return detail::monte_carlo_mean(g.dimension(), samples, seed, workers,
                                    [&](const Vector& h) { return g.dist2_l1(lambda, h.data()); });
  return detail::monte_carlo_mean(g.dimension(), samples, seed, workers,
                                  [&](const Vector& h) { return g.dist2(lambda, h); });
}

/// min_{λ ≥ 0} dist²(h, λ∂f(x0)) = dist²(h, cone(∂f(x0))).
inline double dist2_to_cone(const SubdiffGeometry& g, const Vector& h) {
  const double hn = h.norm();
  if (hn == 0.0) return 0.0;
  // Every s in ∂f(x0) has ‖s‖ ≥ √(structure), so beyond this λ the distance exceeds ‖h‖.
  const double lambda_hi = 2.0 * hn / std::sqrt(static_cast<double>(g.structure_size())) + 1.0;
  auto phi = [&](double lambda) { return g.dist2(lambda, h); };
  const auto [arg, best] = detail::golden_section(phi, 0.0, lambda_hi, 1e-10 * lambda_hi);
  if (!std::isfinite(best) || arg >= lambda_hi) {
    std::ostringstream os;
    os.precision(17);
    os << "dist2_to_cone: inner minimization did not converge (argmin " << arg << ", bracket end " << lambda_hi
       << ", value " << best << ")";
    throw NumericalError(os.str());
  }
  return best;
}

/// Monte Carlo δ(cone(∂f(x0))); shares draws with delta_monte_carlo for the same seed.
inline MonteCarloEstimate delta_cone_monte_carlo(const SubdiffGeometry& g, std::int64_t samples, SeedSpec seed,
                                                 unsigned workers = 0) {
  return detail::monte_carlo_mean(g.dimension(), samples, seed, workers,
                                  [&](const Vector& h) { return dist2_to_cone(g, h); });
}

// ---------------------------------------------------------------------------
// Resolving δ(λ) by a chosen method

struct DeltaMethod {
  enum class Kind { ClosedForm, AnalyticBound, MonteCarlo };
  Kind kind = Kind::ClosedForm;
  std::int64_t samples = 0;
  SeedSpec seed{};

  static DeltaMethod closed_form() { return {}; }
  static DeltaMethod analytic_bound() { return {Kind::AnalyticBound, 0, {}}; }
  static DeltaMethod monte_carlo(std::int64_t samples, SeedSpec seed) { return {Kind::MonteCarlo, samples, seed}; }
};

struct DistanceQuery {
  const SubdiffGeometry* geometry = nullptr;
  double lambda = 0.0;
  DeltaMethod method;
};

/// δ for a query; stderr is zero for the deterministic methods.
inline MonteCarloEstimate resolve_delta(const DistanceQuery& q, unsigned workers = 0) {
  detail::require(q.geometry != nullptr, "resolve_delta: missing geometry");
  const auto& g = *q.geometry;
  switch (q.method.kind) {
    case DeltaMethod::Kind::ClosedForm:
      if (!g.regularizer().is_l1()) throw InvalidArgument("closed-form delta exists only for the l1 norm");
      return {delta_l1_closed_form(g.dimension(), g.structure_size(), q.lambda), 0.0, 0};
    case DeltaMethod::Kind::AnalyticBound:
      return {delta_upper_bound(g, q.lambda), 0.0, 0};
    case DeltaMethod::Kind::MonteCarlo:
      return delta_monte_carlo(g, q.lambda, q.method.samples, q.method.seed, workers);
  }
  throw InvalidArgument("resolve_delta: unknown method");
}

/// δ(λ) as a deterministic function of λ: the l1 closed form, or a Monte
/// Carlo average over a fixed set of draws (common random numbers), which is
/// smooth and convex in λ.
class DeltaCurve {
 public:
  DeltaCurve(const SubdiffGeometry& g, DeltaMethod method, unsigned workers = 0)
      : g_(&g), method_(method), workers_(resolve_workers(workers)) {
    if (method.kind == DeltaMethod::Kind::ClosedForm && !g.regularizer().is_l1())
      throw InvalidArgument("closed-form delta exists only for the l1 norm");
    if (method.kind == DeltaMethod::Kind::AnalyticBound)
      throw InvalidArgument("calibration needs delta itself, not an upper bound");
    if (method.kind == DeltaMethod::Kind::MonteCarlo) {
      detail::require(method.samples >= 2, "monte carlo: samples must be >= 2");
      draws_.resize(g.dimension(), method.samples);
      const std::int64_t chunks = (method.samples + detail::kMonteCarloChunk - 1) / detail::kMonteCarloChunk;
      parallel_for(static_cast<std::size_t>(chunks), workers_, [&](std::size_t c) {
        StreamRng rng(method.seed.child(c));
        const std::int64_t begin = static_cast<std::int64_t>(c) * detail::kMonteCarloChunk;
        const std::int64_t end = std::min<std::int64_t>(method.samples, begin + detail::kMonteCarloChunk);
        for (std::int64_t j = begin; j < end; ++j) fill_normal(rng, draws_.col(j));
      });
    }
  }

  const SubdiffGeometry& geometry() const noexcept { return *g_; }
  const DeltaMethod& method() const noexcept { return method_; }

  double operator()(double lambda) const {
    if (method_.kind == DeltaMethod::Kind::ClosedForm)
      return delta_l1_closed_form(g_->dimension(), g_->structure_size(), lambda);
    const auto N = draws_.cols();
    const std::int64_t chunks = (N + detail::kMonteCarloChunk - 1) / detail::kMonteCarloChunk;
    std::vector<double> sums(static_cast<std::size_t>(chunks));
    parallel_for(static_cast<std::size_t>(chunks), workers_, [&](std::size_t c) {
      const std::int64_t begin = static_cast<std::int64_t>(c) * detail::kMonteCarloChunk;
      const std::int64_t end = std::min<std::int64_t>(N, begin + detail::kMonteCarloChunk);
      double s = 0.0;
      Vector h(g_->dimension());
      for (std::int64_t j = begin; j < end; ++j) {
        if (g_->regularizer().is_l1()) {
          s += lambda == 0.0 ? draws_.col(j).squaredNorm() : g_->dist2_l1(lambda, draws_.col(j).data());
        } else {
          h = draws_.col(j);
          s += g_->dist2(lambda, h);
        }
      }
      sums[c] = s;
    });
    double total = 0.0;
    for (double s : sums) total += s;
    return total / static_cast<double>(N);
  }

 private:
  const SubdiffGeometry* g_;
  DeltaMethod method_;
  unsigned workers_;
  Matrix draws_;
};

// ---------------------------------------------------------------------------
// Calibration

struct CalibrationTolerances {
  double golden_section = 1e-8;  // in λ
  double bisection = 1e-10;      // in √δ − √(m − 1)
};

struct CalibrationReport {
  std::int64_t m = 0;
  bool feasible = false;  // m − 1 > min_λ δ(λ∂f(x0))
  std::optional<double> lambda_min;
  double lambda_best = 0.0;
  std::optional<double> lambda_max;
  std::optional<double> delta_at_min;
  double delta_at_best = 0.0;
  std::optional<double> delta_at_max;
  CalibrationTolerances tolerances;
};

namespace detail {

/// Root of √δ(λ) − √(m−1) on [lo, hi] given opposite signs at the ends.
template <class F>
double bisect_root(F&& excess, double lo, double hi, double tol) {
  double flo = excess(lo);
  for (int it = 0; it < 400; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double fm = excess(mid);
    if (std::fabs(fm) <= tol || mid == lo || mid == hi) return mid;
    if ((fm > 0.0) == (flo > 0.0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace detail

inline CalibrationReport calibrate(const DeltaCurve& delta, std::int64_t m, CalibrationTolerances tol = {}) {
  detail::require(m >= 2, "calibrate: m must be >= 2");
  const auto& g = delta.geometry();
  CalibrationReport rep;
  rep.m = m;
  rep.tolerances = tol;
  const double target = std::sqrt(static_cast<double>(m - 1));
  auto excess = [&](double lambda) { return std::sqrt(delta(lambda)) - target; };

  // δ(λ) ≥ structure·λ² and δ(0) = n, so the minimizer lies below √(n / structure).
  const double hi = std::sqrt(static_cast<double>(g.dimension()) / static_cast<double>(g.structure_size())) + 1.0;
  const auto [best, dbest] = detail::golden_section(delta, 0.0, hi, tol.golden_section);
  rep.lambda_best = best;
  rep.delta_at_best = dbest;
  rep.feasible = std::sqrt(dbest) < target;
  if (!rep.feasible) return rep;

  if (excess(0.0) > 0.0) {
    const double root = detail::bisect_root(excess, 0.0, best, tol.bisection);
    rep.lambda_min = root;
    rep.delta_at_min = delta(root);
  }
  double upper = std::max(2.0 * best, 1.0);
  while (excess(upper) <= 0.0) upper *= 2.0;
  const double root = detail::bisect_root(excess, best, upper, tol.bisection);
  rep.lambda_max = root;
  rep.delta_at_max = delta(root);
  return rep;
}

inline CalibrationReport calibrate(const SubdiffGeometry& g, std::int64_t m, DeltaMethod method,
                                   CalibrationTolerances tol = {}, unsigned workers = 0) {
  return calibrate(DeltaCurve(g, method, workers), m, tol);
}

}  // namespace lassogeom
