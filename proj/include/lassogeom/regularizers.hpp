#pragma once

// Regularizers f (l1 norm, nuclear norm) and the geometry of the scaled
// subdifferential λ∂f(x0): distance, projection and proximal maps.
//
// Nuclear-norm vectors are d*d column-major reshapes of d x d matrices.
// The nuclear subdifferential at X0 = U Σ Vᵀ is
//   { U Vᵀ + W : Uᵀ W = 0, W V = 0, ‖W‖_op ≤ 1 },
// so projecting H onto λ∂f(X0) keeps P_T(H) ↦ λ U Vᵀ and clips the singular
// values of P_T⊥(H) = (I − U Uᵀ) H (I − V Vᵀ) at λ.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SVD>

#include "lassogeom/errors.hpp"
#include "lassogeom/model.hpp"

namespace lassogeom {

class Regularizer {
 public:
  enum class Kind { L1, Nuclear };

  static Regularizer l1() { return Regularizer(Kind::L1, 0); }
  static Regularizer nuclear(Eigen::Index side) {
    detail::require(side >= 1, "nuclear regularizer: side must be >= 1");
    return Regularizer(Kind::Nuclear, side);
  }
  /// The natural regularizer for a signal model.
  static Regularizer for_signal(const SignalModel& s) {
    return s.is_sparse() ? l1() : nuclear(s.as_low_rank().side);
  }

  Kind kind() const noexcept { return kind_; }
  bool is_l1() const noexcept { return kind_ == Kind::L1; }
  Eigen::Index side() const noexcept { return side_; }
  std::string name() const { return is_l1() ? "l1" : "nuclear"; }

  void check_dimension(Eigen::Index n) const {
    if (kind_ == Kind::Nuclear && n != side_ * side_)
      throw InvalidArgument("nuclear regularizer: vector length " + std::to_string(n) + " != d^2 = " +
                            std::to_string(side_ * side_));
  }

 private:
  Regularizer(Kind k, Eigen::Index side) : kind_(k), side_(side) {}
  Kind kind_;
  Eigen::Index side_;
};

namespace detail {

inline Eigen::Map<const Matrix> as_square(const Vector& v, Eigen::Index d) { return {v.data(), d, d}; }

inline Vector flatten(const Matrix& M) { return Eigen::Map<const Vector>(M.data(), M.size()); }

inline Vector singular_values(const Matrix& M) {
  return Eigen::JacobiSVD<Matrix>(M).singularValues();
}

}  // namespace detail

/// Soft threshold.
inline double shrink(double chi, double lambda) {
  if (lambda < 0.0) throw InvalidArgument("shrink: lambda must be >= 0");
  if (chi > lambda) return chi - lambda;
  if (chi < -lambda) return chi + lambda;
  return 0.0;
}

namespace detail {
// Hot-loop variant without the argument check.
inline double shrink_unchecked(double chi, double lambda) noexcept {
  const double a = std::fabs(chi) - lambda;
  return a > 0.0 ? std::copysign(a, chi) : 0.0;
}
}  // namespace detail

inline double value(const Regularizer& f, const Vector& x) {
  f.check_dimension(x.size());
  if (f.is_l1()) return x.lpNorm<1>();
  return detail::singular_values(detail::as_square(x, f.side())).sum();
}

/// Dual norm: ‖v‖∞ for l1, spectral norm for nuclear.
inline double dual_norm(const Regularizer& f, const Vector& v) {
  f.check_dimension(v.size());
  if (v.size() == 0) return 0.0;
  if (f.is_l1()) return v.cwiseAbs().maxCoeff();
  return detail::singular_values(detail::as_square(v, f.side())).maxCoeff();
}

/// Unique minimizer of ½‖v − x‖² + θ f(x).
inline Vector prox(const Regularizer& f, double theta, const Vector& v) {
  detail::require(theta >= 0.0, "prox: theta must be >= 0");
  f.check_dimension(v.size());
  if (theta == 0.0) return v;
  if (f.is_l1()) return v.unaryExpr([theta](double c) { return detail::shrink_unchecked(c, theta); });
  Eigen::JacobiSVD<Matrix> svd(detail::as_square(v, f.side()), Eigen::ComputeFullU | Eigen::ComputeFullV);
  Vector s = svd.singularValues().unaryExpr([theta](double c) { return std::max(c - theta, 0.0); });
  return detail::flatten(svd.matrixU() * s.asDiagonal() * svd.matrixV().transpose());
}

/// Euclidean projection onto { x : f(x) ≤ budget }.
inline Vector project_to_level_set(const Regularizer& f, double budget, const Vector& v) {
  detail::require(budget >= 0.0, "projection: budget must be >= 0");
  f.check_dimension(v.size());
  // Sort-based projection of a nonnegative vector onto the l1 ball, returned as a threshold.
  auto l1_threshold = [budget](const Vector& a) {
    std::vector<double> u(a.data(), a.data() + a.size());
    std::sort(u.begin(), u.end(), std::greater<>());
    double cumsum = 0.0;
    double theta = 0.0;
    for (std::size_t j = 0; j < u.size(); ++j) {
      cumsum += u[j];
      const double cand = (cumsum - budget) / static_cast<double>(j + 1);
      if (u[j] - cand > 0.0) theta = cand;
    }
    return std::max(theta, 0.0);
  };
  if (value(f, v) <= budget) return v;
  if (budget == 0.0) return Vector::Zero(v.size());
  if (f.is_l1()) {
    const double theta = l1_threshold(v.cwiseAbs());
    return v.unaryExpr([theta](double c) { return detail::shrink_unchecked(c, theta); });
  }
  Eigen::JacobiSVD<Matrix> svd(detail::as_square(v, f.side()), Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Vector& s = svd.singularValues();
  const double theta = l1_threshold(s);
  const Vector shrunk = s.unaryExpr([theta](double c) { return std::max(c - theta, 0.0); });
  return detail::flatten(svd.matrixU() * shrunk.asDiagonal() * svd.matrixV().transpose());
}

/// Cached decomposition of ∂f(x0): sign pattern for l1, tangent-space
/// factors for the nuclear norm. Immutable after construction.
class SubdiffGeometry {
 public:
  SubdiffGeometry(Regularizer f, const SignalModel& x0) : f_(f) {
    if (f.is_l1()) {
      detail::require(x0.is_sparse(), "l1 geometry needs a sparse signal model");
      const auto& s = x0.as_sparse();
      init_l1(s.n);
      for (std::size_t j = 0; j < s.support.size(); ++j) {
        on_support_[s.support[j]] = 1;
        signs_[s.support[j]] = s.values[j] > 0.0 ? 1.0 : -1.0;
      }
      structure_ = static_cast<Eigen::Index>(s.support.size());
      finish_l1();
    } else {
      detail::require(x0.is_low_rank(), "nuclear geometry needs a low-rank signal model");
      const auto& l = x0.as_low_rank();
      detail::require(l.side == f.side(), "nuclear geometry: side mismatch");
      init_nuclear(l.U, l.V);
    }
  }

  /// Geometry of ∂f(x) at an arbitrary point (possibly zero); entries or
  /// singular values with magnitude ≤ zero_tol count as zero.
  static SubdiffGeometry at_point(const Regularizer& f, const Vector& x, double zero_tol = 0.0) {
    f.check_dimension(x.size());
    SubdiffGeometry g(f);
    if (f.is_l1()) {
      g.init_l1(x.size());
      for (Eigen::Index i = 0; i < x.size(); ++i)
        if (std::fabs(x[i]) > zero_tol) {
          g.on_support_[i] = 1;
          g.signs_[i] = x[i] > 0.0 ? 1.0 : -1.0;
          ++g.structure_;
        }
      g.finish_l1();
    } else {
      const Eigen::Index d = f.side();
      Eigen::JacobiSVD<Matrix> svd(detail::as_square(x, d), Eigen::ComputeFullU | Eigen::ComputeFullV);
      Eigen::Index r = 0;
      while (r < d && svd.singularValues()[r] > zero_tol) ++r;
      g.init_nuclear(svd.matrixU().leftCols(r), svd.matrixV().leftCols(r));
    }
    return g;
  }

  const Regularizer& regularizer() const noexcept { return f_; }
  Eigen::Index dimension() const noexcept { return f_.is_l1() ? n_ : f_.side() * f_.side(); }
  /// |S| for l1, rank for nuclear.
  Eigen::Index structure_size() const noexcept { return structure_; }

  /// Squared distance from h to λ∂f(x0).
  double dist2(double lambda, const Vector& h) const {
    check(lambda, h);
    if (lambda == 0.0) return h.squaredNorm();
    return f_.is_l1() ? dist2_l1(lambda, h.data()) : dist2_nuclear(lambda, h);
  }

  /// dist(h, λ∂f(x0)).
  double dist(double lambda, const Vector& h) const { return std::sqrt(dist2(lambda, h)); }

  /// Nearest point of λ∂f(x0) to h.
  Vector project(double lambda, const Vector& h) const {
    check(lambda, h);
    if (lambda == 0.0) return Vector::Zero(h.size());
    if (f_.is_l1()) {
      Vector s(h.size());
      for (Eigen::Index i = 0; i < h.size(); ++i)
        s[i] = on_support_[i] ? lambda * signs_[i] : std::clamp(h[i], -lambda, lambda);
      return s;
    }
    const Eigen::Index d = f_.side();
    const Matrix H = detail::as_square(h, d);
    const Matrix Hperp = perp(H);
    Matrix S = lambda * UVt_;
    if (Hperp.size() > 0) {
      Eigen::JacobiSVD<Matrix> svd(Hperp, Eigen::ComputeFullU | Eigen::ComputeFullV);
      const Vector clipped = svd.singularValues().cwiseMin(lambda);
      S += svd.matrixU() * clipped.asDiagonal() * svd.matrixV().transpose();
    }
    return detail::flatten(S);
  }

  /// Fast path for l1 Monte Carlo loops: raw pointer to n entries.
  double dist2_l1(double lambda, const double* h) const noexcept {
    const Eigen::Map<const Eigen::ArrayXd> H(h, n_);
    double acc = ((H.abs() - lambda).max(0.0).square() * off_support_).sum();
    for (const Eigen::Index i : support_)
      acc += (h[i] - lambda * signs_[i]) * (h[i] - lambda * signs_[i]);
    return acc;
  }

 private:
  explicit SubdiffGeometry(Regularizer f) : f_(f) {}

  void init_l1(Eigen::Index n) {
    n_ = n;
    on_support_.assign(static_cast<std::size_t>(n), 0);
    signs_.assign(static_cast<std::size_t>(n), 0.0);
    structure_ = 0;
  }

  void finish_l1() {
    off_support_ = Eigen::ArrayXd::Ones(n_);
    support_.clear();
    for (Eigen::Index i = 0; i < n_; ++i)
      if (on_support_[i]) off_support_[i] = 0.0, support_.push_back(i);
  }

  void init_nuclear(const Matrix& U, const Matrix& V) {
    n_ = f_.side() * f_.side();
    U_ = U;
    V_ = V;
    UVt_ = U_ * V_.transpose();
    if (U_.cols() == 0) UVt_ = Matrix::Zero(f_.side(), f_.side());
    structure_ = U_.cols();
  }

  void check(double lambda, const Vector& h) const {
    detail::require(lambda >= 0.0, "distance: lambda must be >= 0");
    if (h.size() != dimension()) throw InvalidArgument("distance: dimension mismatch");
  }

  Matrix perp(const Matrix& H) const {
    if (U_.cols() == 0) return H;
    Matrix P = H - U_ * (U_.transpose() * H);
    return P - (P * V_) * V_.transpose();
  }

  double dist2_nuclear(double lambda, const Vector& h) const {
    const Eigen::Index d = f_.side();
    const Matrix H = detail::as_square(h, d);
    const Matrix Hperp = perp(H);
    const double tangent = (H - Hperp - lambda * UVt_).squaredNorm();
    double normal = 0.0;
    const Vector s = detail::singular_values(Hperp);
    for (Eigen::Index i = 0; i < s.size(); ++i) {
      const double e = s[i] - lambda;
      if (e > 0.0) normal += e * e;
    }
    return tangent + normal;
  }

  Regularizer f_;
  Eigen::Index n_ = 0;
  Eigen::Index structure_ = 0;
  std::vector<unsigned char> on_support_;
  std::vector<double> signs_;
  std::vector<Eigen::Index> support_;
  Eigen::ArrayXd off_support_;
  Matrix U_, V_, UVt_;
};

/// dist(h, λ∂f(x0)) for the cached geometry.
inline double dist_to_scaled_subdiff(const SubdiffGeometry& g, double lambda, const Vector& h) {
  return g.dist(lambda, h);
}

/// dist(v, ∂f(x)) at an arbitrary point; used by optimality certificates.
inline double subdiff_distance(const Regularizer& f, const Vector& x, const Vector& v, double zero_tol = 0.0) {
  return SubdiffGeometry::at_point(f, x, zero_tol).dist(1.0, v);
}

}  // namespace lassogeom
