#pragma once

// Solvers for the three lasso estimators:
//   ℓ₂-lasso     min ‖y − Ax‖ + (λ/√m) f(x)           primal-dual (Chambolle–Pock)
//   ℓ₂²-lasso    min ½‖y − Ax‖² + (τ/√m) f(x)         monotone FISTA
//   constrained  min ‖y − Ax‖  s.t. f(x) ≤ budget      monotone projected FISTA
// For the l1 norm, iterates are finished by an active-set polish on the
// identified support, after which the optimality certificate is checked on
// the returned point by a routine that does not depend on the solver loop.

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "lassogeom/errors.hpp"
#include "lassogeom/model.hpp"
#include "lassogeom/regularizers.hpp"

namespace lassogeom {

struct SolveConfig {
  long max_iterations = 200000;
  double objective_rel_tol = 1e-10;  // relative change over `window` iterations
  long window = 50;
  double optimality_tol = 1e-7;
  double step_safety = 0.95;  // τσ‖A‖² = step_safety²
  long polish_every = 100;
  bool record_trace = false;
};

struct Solution {
  Vector x;
  double objective = 0.0;
  long iterations = 0;
  double optimality_residual = std::numeric_limits<double>::infinity();
  Vector residual;  // A x − y
  bool converged = false;
  bool non_unique = false;     // λ = 0 with rank(A) < n
  bool zero_residual = false;  // ‖Ax − y‖ = 0: certificate not available
  std::vector<double> objective_trace;
};

// ---------------------------------------------------------------------------
// Objectives

inline double l2_lasso_objective(const ProblemInstance& inst, const Regularizer& f, double lambda, const Vector& x) {
  return (inst.y - inst.A * x).norm() + lambda / std::sqrt(static_cast<double>(inst.m)) * value(f, x);
}

inline double l22_lasso_objective(const ProblemInstance& inst, const Regularizer& f, double tau, const Vector& x) {
  return 0.5 * (inst.y - inst.A * x).squaredNorm() + tau / std::sqrt(static_cast<double>(inst.m)) * value(f, x);
}

/// ‖Aw − z‖ + (λ/√m)(f(x0 + w) − f(x0)): the ℓ₂-lasso objective in terms of the error vector w = x − x0.
inline double error_vector_objective(const ProblemInstance& inst, const Regularizer& f, double lambda,
                                     const Vector& w) {
  const double c = lambda / std::sqrt(static_cast<double>(inst.m));
  return (inst.A * w - inst.z).norm() + c * (value(f, inst.x0 + w) - value(f, inst.x0));
}

// ---------------------------------------------------------------------------
// Certificates

namespace detail {

inline double certificate_zero_tol(const Regularizer& f, const Vector& x) {
  // Prox steps produce exact zeros for l1; singular values need a floor.
  if (f.is_l1()) return 0.0;
  return 1e-10 * std::max(1.0, x.cwiseAbs().maxCoeff());
}

inline constexpr double kZeroResidual = 1e-13;

}  // namespace detail

/// dist(−(√m/λ)Aᵀu, ∂f(x)) with u = r/‖r‖; ‖Aᵀu‖ when λ = 0. Empty when r = 0.
inline std::optional<double> certify_l2_lasso(const ProblemInstance& inst, const Regularizer& f, double lambda,
                                              const Vector& x) {
  const Vector r = inst.A * x - inst.y;
  const double rn = r.norm();
  if (rn <= detail::kZeroResidual * std::max(1.0, inst.y.norm())) return std::nullopt;
  const Vector g = inst.A.transpose() * (r / rn);
  if (lambda == 0.0) return g.norm();
  const double c = lambda / std::sqrt(static_cast<double>(inst.m));
  return subdiff_distance(f, x, -g / c, detail::certificate_zero_tol(f, x));
}

/// dist(−(√m/τ)Aᵀr, ∂f(x)); ‖Aᵀr‖ when τ = 0.
inline double certify_l22_lasso(const ProblemInstance& inst, const Regularizer& f, double tau, const Vector& x) {
  const Vector g = inst.A.transpose() * (inst.A * x - inst.y);
  if (tau == 0.0) return g.norm();
  const double c = tau / std::sqrt(static_cast<double>(inst.m));
  return subdiff_distance(f, x, -g / c, detail::certificate_zero_tol(f, x));
}

/// Squared Lipschitz constant of x ↦ Ax, i.e. ‖A‖².
inline double operator_norm_squared(const Matrix& A) {
  const Matrix G = A.rows() <= A.cols() ? Matrix(A * A.transpose()) : Matrix(A.transpose() * A);
  Eigen::SelfAdjointEigenSolver<Matrix> es(G, Eigen::EigenvaluesOnly);
  return std::max(es.eigenvalues().maxCoeff(), 0.0);
}

/// Gradient-mapping norm L‖x − P(x − ∇/L)‖ for ½‖Ax − y‖² over {f ≤ budget}.
inline double certify_constrained(const ProblemInstance& inst, const Regularizer& f, double budget, const Vector& x,
                                  double lipschitz) {
  const Vector grad = inst.A.transpose() * (inst.A * x - inst.y);
  return lipschitz * (x - project_to_level_set(f, budget, x - grad / lipschitz)).norm();
}

namespace detail {

inline void check_instance(const ProblemInstance& inst, const Regularizer& f) {
  require(inst.A.rows() == inst.m && inst.A.cols() == inst.n && inst.y.size() == inst.m,
          "solver: instance dimensions inconsistent");
  f.check_dimension(inst.n);
  if (!inst.A.allFinite() || !inst.y.allFinite()) throw InvalidArgument("solver: NaN/Inf in A or y");
}

/// Minimum-norm least squares; flags rank deficiency.
inline Solution least_squares_solution(const ProblemInstance& inst) {
  Eigen::CompleteOrthogonalDecomposition<Matrix> cod(inst.A);
  Solution s;
  s.x = cod.solve(inst.y);
  s.non_unique = cod.rank() < inst.n;
  s.residual = inst.A * s.x - inst.y;
  return s;
}

struct Support {
  std::vector<Eigen::Index> idx;
  Vector signs;
};

inline Support support_of(const Vector& x) {
  Support s;
  const double floor = 1e-12 * std::max(1.0, x.cwiseAbs().maxCoeff());
  for (Eigen::Index i = 0; i < x.size(); ++i)
    if (std::fabs(x[i]) > floor) s.idx.push_back(i);
  s.signs.resize(static_cast<Eigen::Index>(s.idx.size()));
  for (std::size_t j = 0; j < s.idx.size(); ++j) s.signs[j] = x[s.idx[j]] > 0.0 ? 1.0 : -1.0;
  return s;
}

inline Matrix columns(const Matrix& A, const std::vector<Eigen::Index>& idx) {
  Matrix As(A.rows(), static_cast<Eigen::Index>(idx.size()));
  for (std::size_t j = 0; j < idx.size(); ++j) As.col(j) = A.col(idx[j]);
  return As;
}

inline std::optional<Vector> scatter_if_signs_hold(const Support& s, const Vector& xs, Eigen::Index n) {
  Vector x = Vector::Zero(n);
  for (std::size_t j = 0; j < s.idx.size(); ++j) {
    if (!(xs[j] * s.signs[j] > 0.0)) return std::nullopt;
    x[s.idx[j]] = xs[j];
  }
  return x;
}

/// ℓ₂-lasso restricted to a sign pattern: min ‖y − A_S x‖ + c sᵀx by damped Newton.
inline std::optional<Vector> polish_l2_lasso_l1(const ProblemInstance& inst, double c, const Vector& x) {
  const Support s = support_of(x);
  const auto k = static_cast<Eigen::Index>(s.idx.size());
  if (k == 0) return Vector::Zero(inst.n);
  if (k >= inst.m) return std::nullopt;
  const Matrix As = columns(inst.A, s.idx);
  Vector xs(k);
  for (Eigen::Index j = 0; j < k; ++j) xs[j] = x[s.idx[j]];
  auto phi = [&](const Vector& v) { return (inst.y - As * v).norm() + c * s.signs.dot(v); };
  double fx = phi(xs);
  for (int it = 0; it < 60; ++it) {
    const Vector r = inst.y - As * xs;
    const double rn = r.norm();
    if (rn <= kZeroResidual) return std::nullopt;
    const Vector u = r / rn;
    const Vector Atu = As.transpose() * u;
    const Vector grad = -Atu + c * s.signs;
    if (grad.norm() <= 1e-15 * std::max(1.0, c)) break;
    const Matrix H = (As.transpose() * As - Atu * Atu.transpose()) / rn +
                     1e-14 * Matrix::Identity(k, k);
    const Vector step = H.ldlt().solve(-grad);
    double a = 1.0;
    bool moved = false;
    for (int ls = 0; ls < 60; ++ls) {
      const Vector cand = xs + a * step;
      const double fc = phi(cand);
      if (fc <= fx - 1e-4 * a * std::fabs(grad.dot(step)) || fc < fx) {
        xs = cand;
        moved = fc < fx;
        fx = fc;
        break;
      }
      a *= 0.5;
    }
    if (!moved) break;
  }
  return scatter_if_signs_hold(s, xs, inst.n);
}

/// Interpolating ℓ₂-lasso optimum (Ax = y) on the m largest entries of x: solves A_S x_S = y and
/// the dual A_Sᵀu = −c s. Returns x and the dual infeasibility max(‖u‖ − 1, ‖Aᵀu‖∞/c − 1, 0).
inline std::optional<std::pair<Vector, double>> polish_interpolating_l1(const ProblemInstance& inst, double c,
                                                                        const Vector& x) {
  const Eigen::Index m = inst.m;
  if (inst.n < m) return std::nullopt;
  std::vector<Eigen::Index> order(static_cast<std::size_t>(inst.n));
  for (Eigen::Index i = 0; i < inst.n; ++i) order[static_cast<std::size_t>(i)] = i;
  std::partial_sort(order.begin(), order.begin() + m, order.end(),
                    [&](Eigen::Index i, Eigen::Index j) { return std::fabs(x[i]) > std::fabs(x[j]); });
  Support s;
  s.idx.assign(order.begin(), order.begin() + m);
  std::sort(s.idx.begin(), s.idx.end());
  s.signs.resize(m);
  for (Eigen::Index j = 0; j < m; ++j) {
    const double v = x[s.idx[static_cast<std::size_t>(j)]];
    if (v == 0.0) return std::nullopt;
    s.signs[j] = v > 0.0 ? 1.0 : -1.0;
  }
  const Matrix As = columns(inst.A, s.idx);
  Eigen::PartialPivLU<Matrix> lu(As);
  const Vector xs = lu.solve(inst.y);
  const Vector u = lu.transpose().solve(Vector(-c * s.signs));
  if (!xs.allFinite() || !u.allFinite()) return std::nullopt;
  auto full = scatter_if_signs_hold(s, xs, inst.n);
  if (!full) return std::nullopt;
  const double excess = std::max({u.norm() - 1.0, (inst.A.transpose() * u).cwiseAbs().maxCoeff() / c - 1.0, 0.0});
  return std::make_pair(std::move(*full), excess);
}

/// ℓ₂²-lasso restricted to a sign pattern: A_SᵀA_S x = A_Sᵀy − c s.
inline std::optional<Vector> polish_l22_lasso_l1(const ProblemInstance& inst, double c, const Vector& x) {
  const Support s = support_of(x);
  const auto k = static_cast<Eigen::Index>(s.idx.size());
  if (k == 0) return Vector::Zero(inst.n);
  const Matrix As = columns(inst.A, s.idx);
  Eigen::LDLT<Matrix> ldlt(As.transpose() * As);
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) return std::nullopt;
  const Vector xs = ldlt.solve(As.transpose() * inst.y - c * s.signs);
  if (!xs.allFinite()) return std::nullopt;
  return scatter_if_signs_hold(s, xs, inst.n);
}

/// Constrained least squares on a sign pattern with the l1 budget active:
/// [A_SᵀA_S s; sᵀ 0][x; μ] = [A_Sᵀy; b], μ ≥ 0.
inline std::optional<Vector> polish_constrained_l1(const ProblemInstance& inst, double budget, const Vector& x) {
  const Support s = support_of(x);
  const auto k = static_cast<Eigen::Index>(s.idx.size());
  if (k == 0) return Vector::Zero(inst.n);
  const Matrix As = columns(inst.A, s.idx);
  const bool active = std::fabs(x.lpNorm<1>() - budget) <= 1e-8 * std::max(1.0, budget);
  Vector xs;
  if (active) {
    Matrix K = Matrix::Zero(k + 1, k + 1);
    K.topLeftCorner(k, k) = As.transpose() * As;
    K.topRightCorner(k, 1) = s.signs;
    K.bottomLeftCorner(1, k) = s.signs.transpose();
    Vector rhs(k + 1);
    rhs.head(k) = As.transpose() * inst.y;
    rhs[k] = budget;
    const Vector sol = K.fullPivLu().solve(rhs);
    if (!sol.allFinite() || sol[k] < 0.0) return std::nullopt;
    xs = sol.head(k);
  } else {
    Eigen::LDLT<Matrix> ldlt(As.transpose() * As);
    if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) return std::nullopt;
    xs = ldlt.solve(As.transpose() * inst.y);
  }
  if (!xs.allFinite()) return std::nullopt;
  auto full = scatter_if_signs_hold(s, xs, inst.n);
  if (full && full->lpNorm<1>() > budget + 1e-9) return std::nullopt;
  return full;
}

inline void finish(Solution& s, const ProblemInstance& inst) { s.residual = inst.A * s.x - inst.y; }

inline std::string describe_failure(const char* who, long it, double obj, double res) {
  std::ostringstream os;
  os.precision(17);
  os << who << ": no convergence after " << it << " iterations (objective " << obj << ", optimality residual " << res
     << ")";
  return os.str();
}

}  // namespace detail

// ---------------------------------------------------------------------------
// ℓ₂-lasso

inline Solution solve_l2_lasso(const ProblemInstance& inst, const Regularizer& f, double lambda,
                               const SolveConfig& cfg = {}) {
  detail::require(lambda >= 0.0 && std::isfinite(lambda), "solve_l2_lasso: lambda must be >= 0");
  detail::check_instance(inst, f);
  const double c = lambda / std::sqrt(static_cast<double>(inst.m));
  auto objective = [&](const Vector& x) { return l2_lasso_objective(inst, f, lambda, x); };

  if (lambda == 0.0) {
    Solution s = detail::least_squares_solution(inst);
    s.objective = objective(s.x);
    const auto cert = certify_l2_lasso(inst, f, lambda, s.x);
    s.zero_residual = !cert.has_value();
    s.optimality_residual = cert.value_or(0.0);
    s.converged = true;
    return s;
  }

  const double norm_a = std::sqrt(operator_norm_squared(inst.A));
  const double step = cfg.step_safety / std::max(norm_a, 1e-300);
  Vector x = Vector::Zero(inst.n);
  Vector x_bar = x;
  Vector a = Vector::Zero(inst.m);
  Solution best;
  best.x = x;
  best.objective = objective(x);
  std::vector<double> window_objectives;

  auto try_accept = [&](const Vector& cand, long it) -> bool {
    const double obj = objective(cand);
    const auto cert = certify_l2_lasso(inst, f, lambda, cand);
    if (cert && *cert <= cfg.optimality_tol) {
      best.x = cand;
      best.objective = obj;
      best.optimality_residual = *cert;
      best.iterations = it;
      best.converged = true;
      return true;
    }
    return false;
  };

  long it = 0;
  for (it = 1; it <= cfg.max_iterations; ++it) {
    const Vector x_prev = x;
    Vector p = a + step * (inst.A * x_bar - inst.y);
    const double pn = p.norm();
    if (pn > 1.0) p /= pn;
    a = p;
    x = prox(f, step * c, x - step * (inst.A.transpose() * a));
    x_bar = 2.0 * x - x_prev;

    const bool checkpoint = it % cfg.polish_every == 0;
    if (cfg.record_trace || checkpoint || it % cfg.window == 0) {
      const double obj = objective(x);
      if (cfg.record_trace) best.objective_trace.push_back(obj);
      if (obj < best.objective) {
        best.objective = obj;
        best.x = x;
      }
      if (it % cfg.window == 0) window_objectives.push_back(obj);
    }
    if (!checkpoint) continue;

    if (try_accept(x, it)) break;
    if (f.is_l1()) {
      if (auto polished = detail::polish_l2_lasso_l1(inst, c, x); polished && try_accept(*polished, it)) break;
      if (a.norm() < 1.0) {
        if (auto interp = detail::polish_interpolating_l1(inst, c, x); interp && interp->second <= cfg.optimality_tol) {
          best.x = interp->first;
          best.objective = objective(best.x);
          best.iterations = it;
          best.zero_residual = true;
          best.optimality_residual = interp->second;
          best.converged = true;
          break;
        }
      }
    }
    // Duality gap with the dual iterate rescaled into {‖u‖ ≤ 1, ‖Aᵀu‖_* ≤ c}. This is the
    // only certificate available when the optimum interpolates (Ax = y).
    {
      const double dn = dual_norm(f, inst.A.transpose() * a);
      const Vector u = dn > c ? Vector(a * (c / dn)) : a;
      const double obj = objective(x);
      const double gap = obj + u.dot(inst.y);
      if (gap <= cfg.optimality_tol * std::max(1.0, obj)) {
        const double rn = (inst.A * x - inst.y).norm();
        best.x = x;
        best.objective = obj;
        best.iterations = it;
        best.zero_residual = rn <= 1e-9 * std::max(1.0, inst.y.norm());
        best.optimality_residual = gap;
        best.converged = true;
        break;
      }
    }
    // Zero-residual optimum: no certificate exists, fall back to objective stagnation.
    const Vector r = inst.A * x - inst.y;
    if (r.norm() <= 1e-9 * std::max(1.0, inst.y.norm()) && window_objectives.size() >= 2) {
      const double prev = window_objectives[window_objectives.size() - 2];
      const double cur = window_objectives.back();
      if (std::fabs(prev - cur) <= cfg.objective_rel_tol * std::max(1.0, std::fabs(cur))) {
        best.x = x;
        best.objective = cur;
        best.iterations = it;
        best.zero_residual = true;
        best.optimality_residual = std::numeric_limits<double>::quiet_NaN();
        best.converged = true;
        break;
      }
    }
  }
  if (!best.converged) {
    const auto cert = certify_l2_lasso(inst, f, lambda, best.x);
    throw NonConvergence(detail::describe_failure("solve_l2_lasso", cfg.max_iterations, best.objective,
                                                  cert.value_or(std::numeric_limits<double>::quiet_NaN())),
                         best.objective, cert.value_or(std::numeric_limits<double>::quiet_NaN()),
                         cfg.max_iterations);
  }
  detail::finish(best, inst);
  return best;
}

// ---------------------------------------------------------------------------
// ℓ₂²-lasso and constrained lasso share a monotone FISTA loop.

namespace detail {

template <class Prox, class Objective, class Certify, class Polish>
Solution monotone_fista(const ProblemInstance& inst, const SolveConfig& cfg, double lipschitz, Prox&& prox_step,
                        Objective&& objective, Certify&& certify, Polish&& polish, const char* who) {
  Vector x = Vector::Zero(inst.n);
  Vector x_prev = x;
  Vector yk = x;
  double fx = objective(x);
  double tk = 1.0;
  Solution s;
  s.x = x;
  s.objective = fx;
  std::vector<double> window;
  long it = 0;
  for (it = 1; it <= cfg.max_iterations; ++it) {
    const Vector grad = inst.A.transpose() * (inst.A * yk - inst.y);
    const Vector z = prox_step(yk - grad / lipschitz, 1.0 / lipschitz);
    const double fz = objective(z);
    x_prev = x;
    if (fz <= fx) {
      x = z;
      fx = fz;
    }
    const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * tk * tk));
    yk = x + (tk / t_next) * (z - x) + ((tk - 1.0) / t_next) * (x - x_prev);
    tk = t_next;
    if (cfg.record_trace) s.objective_trace.push_back(fx);
    if (it % cfg.window == 0) window.push_back(fx);

    if (it % cfg.polish_every != 0) continue;
    const double res = certify(x);
    if (res <= cfg.optimality_tol) {
      s.x = x;
      s.objective = fx;
      s.optimality_residual = res;
      s.iterations = it;
      s.converged = true;
      return s;
    }
    if (auto p = polish(x)) {
      const double pres = certify(*p);
      const double pobj = objective(*p);
      if (pres <= cfg.optimality_tol && pobj <= fx + 1e-12 * std::max(1.0, std::fabs(fx))) {
        s.x = *p;
        s.objective = pobj;
        s.optimality_residual = pres;
        s.iterations = it;
        s.converged = true;
        if (cfg.record_trace) s.objective_trace.push_back(pobj);
        return s;
      }
    }
  }
  const double res = certify(x);
  throw NonConvergence(describe_failure(who, cfg.max_iterations, fx, res), fx, res, cfg.max_iterations);
}

}  // namespace detail

inline Solution solve_l22_lasso(const ProblemInstance& inst, const Regularizer& f, double tau,
                                const SolveConfig& cfg = {}) {
  detail::require(tau >= 0.0 && std::isfinite(tau), "solve_l22_lasso: tau must be >= 0");
  detail::check_instance(inst, f);
  if (tau == 0.0) {
    Solution s = detail::least_squares_solution(inst);
    s.objective = l22_lasso_objective(inst, f, 0.0, s.x);
    s.optimality_residual = certify_l22_lasso(inst, f, 0.0, s.x);
    s.converged = true;
    return s;
  }
  const double c = tau / std::sqrt(static_cast<double>(inst.m));
  const double L = std::max(operator_norm_squared(inst.A), 1e-300);
  Solution s = detail::monotone_fista(
      inst, cfg, L, [&](const Vector& v, double step) { return prox(f, step * c, v); },
      [&](const Vector& x) { return l22_lasso_objective(inst, f, tau, x); },
      [&](const Vector& x) { return certify_l22_lasso(inst, f, tau, x); },
      [&](const Vector& x) -> std::optional<Vector> {
        if (!f.is_l1()) return std::nullopt;
        return detail::polish_l22_lasso_l1(inst, c, x);
      },
      "solve_l22_lasso");
  detail::finish(s, inst);
  return s;
}

inline Solution solve_constrained(const ProblemInstance& inst, const Regularizer& f, double budget,
                                  const SolveConfig& cfg = {}) {
  detail::require(budget >= 0.0 && std::isfinite(budget), "solve_constrained: budget must be >= 0");
  detail::check_instance(inst, f);
  const double L = std::max(operator_norm_squared(inst.A), 1e-300);
  if (budget == 0.0) {
    Solution s;
    s.x = Vector::Zero(inst.n);
    s.objective = inst.y.norm();
    s.optimality_residual = 0.0;
    s.converged = true;
    detail::finish(s, inst);
    return s;
  }
  Solution s = detail::monotone_fista(
      inst, cfg, L, [&](const Vector& v, double) { return project_to_level_set(f, budget, v); },
      [&](const Vector& x) { return 0.5 * (inst.y - inst.A * x).squaredNorm(); },
      [&](const Vector& x) { return certify_constrained(inst, f, budget, x, L); },
      [&](const Vector& x) -> std::optional<Vector> {
        if (!f.is_l1()) return std::nullopt;
        return detail::polish_constrained_l1(inst, budget, x);
      },
      "solve_constrained");
  // The loop minimizes ½‖r‖²; report ‖r‖.
  s.objective = (inst.y - inst.A * s.x).norm();
  for (auto& v : s.objective_trace) v = std::sqrt(2.0 * v);
  detail::finish(s, inst);
  return s;
}

/// prox(f, λσ, y): the proximal denoiser, exact.
inline Vector proximal_denoise(const Regularizer& f, double lambda, double sigma, const Vector& y) {
  detail::require(sigma > 0.0, "proximal_denoise: sigma must be > 0");
  detail::require(lambda >= 0.0, "proximal_denoise: lambda must be >= 0");
  return prox(f, lambda * sigma, y);
}

}  // namespace lassogeom
