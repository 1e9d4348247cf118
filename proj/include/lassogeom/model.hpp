#pragma once

// Problem data: the structured unknown, noise families and measurement
// instances y = A x0 + z with A having i.i.d. N(0, 1/m) entries.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "lassogeom/errors.hpp"
#include "lassogeom/rng.hpp"

namespace lassogeom {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

struct SparseSignal {
  Eigen::Index n = 0;
  std::vector<Eigen::Index> support;  // sorted, distinct
  std::vector<double> values;         // aligned with support, all nonzero
};

struct LowRankSignal {
  Eigen::Index side = 0;  // d, ambient n = d*d
  Matrix U;               // d x r, orthonormal columns
  Matrix V;               // d x r, orthonormal columns
  Vector singular_values; // length r, strictly positive
};

/// The structured unknown x0. Low-rank signals are vectorized column-major.
class SignalModel {
 public:
  static SignalModel sparse(Eigen::Index n, std::vector<Eigen::Index> support, std::vector<double> values) {
    detail::require(n >= 1, "sparse signal: n must be >= 1");
    detail::require(!support.empty() && static_cast<Eigen::Index>(support.size()) <= n,
                    "sparse signal: need 1 <= k <= n");
    detail::require(support.size() == values.size(), "sparse signal: support/value length mismatch");
    std::vector<std::size_t> order(support.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](auto a, auto b) { return support[a] < support[b]; });
    SparseSignal s{n, {}, {}};
    for (auto o : order) {
      detail::require(support[o] >= 0 && support[o] < n, "sparse signal: support index out of range");
      detail::require(values[o] != 0.0 && std::isfinite(values[o]), "sparse signal: values on support must be nonzero");
      if (!s.support.empty()) detail::require(s.support.back() != support[o], "sparse signal: duplicate support index");
      s.support.push_back(support[o]);
      s.values.push_back(values[o]);
    }
    return SignalModel(std::move(s));
  }

  /// Sparse model read off a dense vector (its nonzeros form the support).
  static SignalModel sparse_from_dense(const Vector& x) {
    std::vector<Eigen::Index> idx;
    std::vector<double> vals;
    for (Eigen::Index i = 0; i < x.size(); ++i)
      if (x[i] != 0.0) {
        idx.push_back(i);
        vals.push_back(x[i]);
      }
    return sparse(x.size(), std::move(idx), std::move(vals));
  }

  static SignalModel low_rank(Matrix U, Matrix V, Vector singular_values) {
    const Eigen::Index d = U.rows();
    const Eigen::Index r = U.cols();
    detail::require(r >= 1 && r <= d, "low-rank signal: need 1 <= r <= d");
    detail::require(V.rows() == d && V.cols() == r && singular_values.size() == r,
                    "low-rank signal: factor shape mismatch");
    const Matrix I = Matrix::Identity(r, r);
    detail::require((U.transpose() * U - I).cwiseAbs().maxCoeff() <= 1e-10, "low-rank signal: U not orthonormal");
    detail::require((V.transpose() * V - I).cwiseAbs().maxCoeff() <= 1e-10, "low-rank signal: V not orthonormal");
    detail::require((singular_values.array() > 0.0).all(), "low-rank signal: singular values must be positive");
    return SignalModel(LowRankSignal{d, std::move(U), std::move(V), std::move(singular_values)});
  }

  bool is_sparse() const noexcept { return std::holds_alternative<SparseSignal>(data_); }
  bool is_low_rank() const noexcept { return std::holds_alternative<LowRankSignal>(data_); }
  const SparseSignal& as_sparse() const { return std::get<SparseSignal>(data_); }
  const LowRankSignal& as_low_rank() const { return std::get<LowRankSignal>(data_); }

  Eigen::Index dimension() const noexcept {
    if (is_sparse()) return as_sparse().n;
    const auto d = as_low_rank().side;
    return d * d;
  }

  /// k for sparse, r for low-rank.
  Eigen::Index structure_size() const noexcept {
    if (is_sparse()) return static_cast<Eigen::Index>(as_sparse().support.size());
    return as_low_rank().U.cols();
  }

  Vector dense() const {
    if (is_sparse()) {
      const auto& s = as_sparse();
      Vector x = Vector::Zero(s.n);
      for (std::size_t j = 0; j < s.support.size(); ++j) x[s.support[j]] = s.values[j];
      return x;
    }
    const auto& l = as_low_rank();
    const Matrix X = l.U * l.singular_values.asDiagonal() * l.V.transpose();
    return Eigen::Map<const Vector>(X.data(), X.size());
  }

 private:
  explicit SignalModel(SparseSignal s) : data_(std::move(s)) {}
  explicit SignalModel(LowRankSignal l) : data_(std::move(l)) {}
  std::variant<SparseSignal, LowRankSignal> data_;
};

// ---------------------------------------------------------------------------
// Noise

struct GaussianNoise { double sigma; };
struct StudentTNoise { double dof; double scale; };
struct UniformNoise { double half_width; };
struct FixedNoise { Vector values; };

class NoiseSpec {
 public:
  using Family = std::variant<GaussianNoise, StudentTNoise, UniformNoise, FixedNoise>;

  static NoiseSpec gaussian(double sigma) {
    detail::require(sigma > 0.0, "gaussian noise: sigma must be > 0");
    return NoiseSpec(GaussianNoise{sigma});
  }
  static NoiseSpec student_t(double dof, double scale) {
    detail::require(dof > 0.0 && scale > 0.0, "student_t noise: dof and scale must be > 0");
    return NoiseSpec(StudentTNoise{dof, scale});
  }
  static NoiseSpec uniform(double half_width) {
    detail::require(half_width > 0.0, "uniform noise: half width must be > 0");
    return NoiseSpec(UniformNoise{half_width});
  }
  static NoiseSpec fixed(Vector values) { return NoiseSpec(FixedNoise{std::move(values)}); }

  const Family& family() const noexcept { return family_; }

  std::string name() const {
    return std::visit(
        [](const auto& f) -> std::string {
          using T = std::decay_t<decltype(f)>;
          if constexpr (std::is_same_v<T, GaussianNoise>) return "gaussian";
          else if constexpr (std::is_same_v<T, StudentTNoise>) return "student_t";
          else if constexpr (std::is_same_v<T, UniformNoise>) return "uniform";
          else return "fixed";
        },
        family_);
  }

  /// Headline parameter: sigma, dof, half width, or the norm of a fixed vector.
  double parameter() const {
    return std::visit(
        [](const auto& f) -> double {
          using T = std::decay_t<decltype(f)>;
          if constexpr (std::is_same_v<T, GaussianNoise>) return f.sigma;
          else if constexpr (std::is_same_v<T, StudentTNoise>) return f.dof;
          else if constexpr (std::is_same_v<T, UniformNoise>) return f.half_width;
          else return f.values.norm();
        },
        family_);
  }

  Vector sample(Eigen::Index m, StreamRng& rng) const {
    return std::visit(
        [&](const auto& f) -> Vector {
          using T = std::decay_t<decltype(f)>;
          Vector z(m);
          if constexpr (std::is_same_v<T, GaussianNoise>) {
            for (Eigen::Index i = 0; i < m; ++i) z[i] = f.sigma * rng.normal();
          } else if constexpr (std::is_same_v<T, StudentTNoise>) {
            // t = N / sqrt(chi2_dof / dof), chi2_dof = 2 * Gamma(dof / 2).
            std::gamma_distribution<double> gamma(0.5 * f.dof, 2.0);
            for (Eigen::Index i = 0; i < m; ++i) {
              const double num = rng.normal();
              const double chi2 = gamma(rng);
              z[i] = f.scale * num / std::sqrt(chi2 / f.dof);
            }
          } else if constexpr (std::is_same_v<T, UniformNoise>) {
            for (Eigen::Index i = 0; i < m; ++i) z[i] = rng.uniform(-f.half_width, f.half_width);
          } else {
            detail::require(f.values.size() == m, "fixed noise: vector length must equal m");
            z = f.values;
          }
          return z;
        },
        family_);
  }

 private:
  explicit NoiseSpec(Family f) : family_(std::move(f)) {}
  Family family_;
};

// ---------------------------------------------------------------------------
// Instances

struct ProblemInstance {
  Eigen::Index m = 0;
  Eigen::Index n = 0;
  Matrix A;
  Vector x0;
  Vector z;
  Vector y;
};

/// i.i.d. standard normal vector; deterministic per seed.
inline Vector sample_standard_gaussian(Eigen::Index dim, SeedSpec seed) {
  detail::require(dim >= 1, "sample_standard_gaussian: dim must be >= 1");
  StreamRng rng(seed);
  Vector h(dim);
  fill_normal(rng, h);
  return h;
}

/// k-sparse unit-norm vector: uniform support, Gaussian values normalized.
inline SignalModel generate_sparse_signal(Eigen::Index n, Eigen::Index k, SeedSpec seed) {
  detail::require(n >= 1, "generate_sparse_signal: n must be >= 1");
  detail::require(k >= 1 && k <= n, "generate_sparse_signal: need 1 <= k <= n");
  StreamRng rng(seed);
  // Partial Fisher-Yates over the index set.
  std::vector<Eigen::Index> pool(static_cast<std::size_t>(n));
  std::iota(pool.begin(), pool.end(), Eigen::Index{0});
  for (Eigen::Index j = 0; j < k; ++j) {
    const auto pick = j + static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(n - j)));
    std::swap(pool[j], pool[pick]);
  }
  std::vector<Eigen::Index> support(pool.begin(), pool.begin() + k);
  std::vector<double> values(static_cast<std::size_t>(k));
  double norm2 = 0.0;
  for (auto& v : values) {
    do v = rng.normal(); while (v == 0.0);
    norm2 += v * v;
  }
  const double norm = std::sqrt(norm2);
  for (auto& v : values) v /= norm;
  return SignalModel::sparse(n, std::move(support), std::move(values));
}

/// Rank-r d x d matrix: Haar-like factors from QR of Gaussian matrices,
/// |N(0,1)| singular values scaled to unit Frobenius norm.
inline SignalModel generate_low_rank_signal(Eigen::Index d, Eigen::Index r, SeedSpec seed) {
  detail::require(d >= 1 && r >= 1 && r <= d, "generate_low_rank_signal: need 1 <= r <= d");
  StreamRng rng(seed);
  auto orthonormal = [&] {
    Matrix G(d, r);
    for (Eigen::Index j = 0; j < r; ++j)
      for (Eigen::Index i = 0; i < d; ++i) G(i, j) = rng.normal();
    Eigen::HouseholderQR<Matrix> qr(G);
    Matrix Q = qr.householderQ() * Matrix::Identity(d, r);
    return Q;
  };
  Matrix U = orthonormal();
  Matrix V = orthonormal();
  Vector s(r);
  for (Eigen::Index i = 0; i < r; ++i) {
    double v = 0.0;
    do v = std::fabs(rng.normal()); while (v == 0.0);
    s[i] = v;
  }
  std::sort(s.data(), s.data() + r, std::greater<>());
  s /= s.norm();
  return SignalModel::low_rank(std::move(U), std::move(V), std::move(s));
}

/// Variance-1/m Gaussian design with noise drawn from its own sub-stream.
inline ProblemInstance generate_instance(const SignalModel& signal, Eigen::Index m, const NoiseSpec& noise,
                                         SeedSpec seed) {
  if (m < 2) throw InvalidArgument("generate_instance: m must be >= 2");
  ProblemInstance inst;
  inst.m = m;
  inst.n = signal.dimension();
  inst.x0 = signal.dense();
  StreamRng design_rng(seed.child(0));
  const double scale = 1.0 / std::sqrt(static_cast<double>(m));
  inst.A.resize(m, inst.n);
  for (Eigen::Index j = 0; j < inst.n; ++j)
    for (Eigen::Index i = 0; i < m; ++i) inst.A(i, j) = scale * design_rng.normal();
  StreamRng noise_rng(seed.child(1));
  inst.z = noise.sample(m, noise_rng);
  inst.y = inst.A * inst.x0 + inst.z;
  return inst;
}

/// Instance from caller-supplied data; y is rebuilt as A x0 + z.
inline ProblemInstance make_instance(Matrix A, Vector x0, Vector z) {
  detail::require(A.rows() >= 1 && A.cols() >= 1, "make_instance: A must be nonempty");
  detail::require(A.cols() == x0.size() && A.rows() == z.size(), "make_instance: dimension mismatch");
  ProblemInstance inst;
  inst.m = A.rows();
  inst.n = A.cols();
  inst.y = A * x0 + z;
  inst.A = std::move(A);
  inst.x0 = std::move(x0);
  inst.z = std::move(z);
  return inst;
}

}  // namespace lassogeom
