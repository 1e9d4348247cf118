#include <gtest/gtest.h>

#include <cmath>

#include "lassogeom/regularizers.hpp"

using namespace lassogeom;

namespace {

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

Vector flat(const Matrix& M) { return Eigen::Map<const Vector>(M.data(), M.size()); }

// Independent l1 oracle: clamp the off-support coordinates into [−λ, λ].
double l1_dist2_oracle(const Vector& x0, double lambda, const Vector& h) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < h.size(); ++i) {
    const double target = x0[i] != 0.0 ? lambda * (x0[i] > 0 ? 1.0 : -1.0) : std::clamp(h[i], -lambda, lambda);
    s += (h[i] - target) * (h[i] - target);
  }
  return s;
}

// Independent nuclear oracle: projected gradient over W in the spectral unit
// ball restricted to T⊥, minimizing ‖H − λ(UVᵀ + W)‖².
double nuclear_dist2_oracle(const Matrix& U, const Matrix& V, double lambda, const Matrix& H) {
  const Eigen::Index d = H.rows();
  const Matrix PU = Matrix::Identity(d, d) - U * U.transpose();
  const Matrix PV = Matrix::Identity(d, d) - V * V.transpose();
  const Matrix E = U * V.transpose();
  Matrix W = Matrix::Zero(d, d);
  if (lambda == 0.0) return H.squaredNorm();
  for (int it = 0; it < 4000; ++it) {
    const Matrix R = H - lambda * (E + W);
    Matrix step = W + (PU * R * PV) / lambda;  // unit step for the λ²-scaled quadratic
    Eigen::JacobiSVD<Matrix> svd(step, Eigen::ComputeFullU | Eigen::ComputeFullV);
    Vector s = svd.singularValues().cwiseMin(1.0);
    W = PU * (svd.matrixU() * s.asDiagonal() * svd.matrixV().transpose()) * PV;
  }
  return (H - lambda * (E + W)).squaredNorm();
}

}  // namespace

TEST(Value, Examples) {
  EXPECT_EQ(value(Regularizer::l1(), vec({1, -2, 0})), 3.0);
  Matrix D = Matrix::Zero(2, 2);
  D(0, 0) = 3;
  D(1, 1) = 4;
  EXPECT_NEAR(value(Regularizer::nuclear(2), flat(D)), 7.0, 1e-14);
  const double c = 2.5, th = 0.7;
  Matrix Q(2, 2);
  Q << std::cos(th), -std::sin(th), std::sin(th), std::cos(th);
  EXPECT_NEAR(value(Regularizer::nuclear(2), flat(c * Q)), 2 * c, 1e-13);
  EXPECT_THROW(value(Regularizer::nuclear(2), vec({1, 2, 3})), InvalidArgument);
}

TEST(Shrink, Cases) {
  EXPECT_EQ(shrink(2.5, 1), 1.5);
  EXPECT_EQ(shrink(0.3, 1), 0.0);
  EXPECT_EQ(shrink(-2, 0.5), -1.5);
  EXPECT_EQ(shrink(1.0, 1.0), 0.0);
  EXPECT_EQ(shrink(-3.0, 0.0), -3.0);
  EXPECT_THROW(shrink(1.0, -0.1), InvalidArgument);
}

TEST(Prox, Examples) {
  EXPECT_EQ(prox(Regularizer::l1(), 1.0, vec({3, -0.2})), vec({2, 0}));
  EXPECT_EQ(prox(Regularizer::l1(), 0.0, vec({3, -0.2})), vec({3, -0.2}));
  Matrix D = Matrix::Zero(2, 2);
  D(0, 0) = 3;
  D(1, 1) = 0.5;
  Matrix E = Matrix::Zero(2, 2);
  E(0, 0) = 2;
  EXPECT_LT((prox(Regularizer::nuclear(2), 1.0, flat(D)) - flat(E)).norm(), 1e-13);
  EXPECT_THROW(prox(Regularizer::l1(), -1.0, vec({1})), InvalidArgument);
}

// (v − prox(v))/θ ∈ ∂f(prox(v)) and the Moreau decomposition v = prox + θ·P_{dual ball}(v/θ).
TEST(Prox, OptimalityAndMoreau) {
  StreamRng rng(SeedSpec{31, 0});
  for (int rep = 0; rep < 20; ++rep) {
    Vector v(25);
    fill_normal(rng, v);
    const double theta = 0.3 + 0.1 * rep;
    for (const auto& f : {Regularizer::l1(), Regularizer::nuclear(5)}) {
      const Vector p = prox(f, theta, v);
      const double tol = f.is_l1() ? 0.0 : 1e-10;
      EXPECT_LT(subdiff_distance(f, p, (v - p) / theta, tol), 1e-9);
      EXPECT_LE(dual_norm(f, (v - p) / theta), 1.0 + 1e-12);
    }
  }
}

TEST(Projection, L1BallAgainstBisection) {
  StreamRng rng(SeedSpec{32, 0});
  for (int rep = 0; rep < 30; ++rep) {
    Vector v(40);
    fill_normal(rng, v);
    const double budget = 0.2 + 0.3 * rep;
    const Vector p = project_to_level_set(Regularizer::l1(), budget, v);
    if (v.lpNorm<1>() <= budget) {
      EXPECT_EQ(p, v);
      continue;
    }
    double lo = 0.0, hi = v.cwiseAbs().maxCoeff();
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      (prox(Regularizer::l1(), mid, v).lpNorm<1>() > budget ? lo : hi) = mid;
    }
    EXPECT_LT((p - prox(Regularizer::l1(), hi, v)).norm(), 1e-10);
    EXPECT_NEAR(p.lpNorm<1>(), budget, 1e-10);
  }
}

TEST(Projection, NuclearBall) {
  StreamRng rng(SeedSpec{33, 0});
  Vector v(16);
  fill_normal(rng, v);
  const auto f = Regularizer::nuclear(4);
  const Vector p = project_to_level_set(f, 1.0, v);
  EXPECT_NEAR(value(f, p), 1.0, 1e-10);
  // Variational inequality: ⟨v − p, q − p⟩ ≤ 0 for feasible q.
  for (int rep = 0; rep < 50; ++rep) {
    Vector q(16);
    fill_normal(rng, q);
    q /= value(f, q);
    EXPECT_LE((v - p).dot(q - p), 1e-10);
  }
  EXPECT_EQ(project_to_level_set(f, 100.0, v), v);
  EXPECT_EQ(project_to_level_set(f, 0.0, v), Vector::Zero(16));
}

TEST(Distance, L1Example) {
  const auto x0 = SignalModel::sparse(3, {0}, {1.0});
  SubdiffGeometry g(Regularizer::l1(), x0);
  EXPECT_NEAR(g.dist(1.0, vec({0.5, 2, -0.5})), std::sqrt(1.25), 1e-15);
}

// Brute-force grid over s₂, s₃ ∈ [−1, 1] for the same example.
TEST(Distance, L1ExampleGridOracle) {
  const Vector h = vec({0.5, 2, -0.5});
  double best = INFINITY;
  for (int i = 0; i <= 400; ++i)
    for (int j = 0; j <= 400; ++j) {
      const double s2 = -1 + i / 200.0, s3 = -1 + j / 200.0;
      best = std::min(best, std::pow(h[0] - 1, 2) + std::pow(h[1] - s2, 2) + std::pow(h[2] - s3, 2));
    }
  const auto x0 = SignalModel::sparse(3, {0}, {1.0});
  EXPECT_NEAR(SubdiffGeometry(Regularizer::l1(), x0).dist2(1.0, h), best, 1e-12);
}

TEST(Distance, LambdaZeroIsNorm) {
  StreamRng rng(SeedSpec{34, 0});
  Vector h(16);
  fill_normal(rng, h);
  SubdiffGeometry g1(Regularizer::l1(), generate_sparse_signal(16, 3, SeedSpec{1, 1}));
  SubdiffGeometry g2(Regularizer::nuclear(4), generate_low_rank_signal(4, 1, SeedSpec{1, 1}));
  EXPECT_NEAR(g1.dist(0.0, h), h.norm(), 1e-14);
  EXPECT_NEAR(g2.dist(0.0, h), h.norm(), 1e-12);
}

TEST(Distance, NuclearExample) {
  Matrix U = Matrix::Zero(2, 1), V = Matrix::Zero(2, 1);
  U(0, 0) = V(0, 0) = 1.0;
  const auto x0 = SignalModel::low_rank(U, V, Vector::Ones(1));
  SubdiffGeometry g(Regularizer::nuclear(2), x0);
  Matrix H = Matrix::Zero(2, 2);
  H(0, 0) = 1;
  H(1, 1) = 2;
  EXPECT_NEAR(g.dist(1.0, flat(H)), 1.0, 1e-14);
  // 1-D oracle: min over w ∈ [−1, 1] of (h₁₁ − 1)² + (h₂₂ − w)².
  double best = INFINITY;
  for (int i = 0; i <= 20000; ++i) {
    const double w = -1 + i / 10000.0;
    best = std::min(best, std::pow(H(0, 0) - 1, 2) + std::pow(H(1, 1) - w, 2));
  }
  EXPECT_NEAR(g.dist2(1.0, flat(H)), best, 1e-12);
}

TEST(Distance, L1MatchesClampOracle) {
  StreamRng rng(SeedSpec{35, 0});
  const auto x0 = generate_sparse_signal(60, 6, SeedSpec{2, 2});
  SubdiffGeometry g(Regularizer::l1(), x0);
  for (double lambda : {0.0, 0.3, 1.0, 2.2, 7.0}) {
    Vector h(60);
    fill_normal(rng, h);
    EXPECT_NEAR(g.dist2(lambda, h), l1_dist2_oracle(x0.dense(), lambda, h), 1e-12);
  }
}

TEST(Distance, NuclearMatchesProjectedGradientOracle) {
  StreamRng rng(SeedSpec{36, 0});
  for (int r : {1, 2}) {
    const auto x0 = generate_low_rank_signal(5, r, SeedSpec{3, static_cast<std::uint64_t>(r)});
    SubdiffGeometry g(Regularizer::nuclear(5), x0);
    for (double lambda : {0.5, 1.5, 3.0}) {
      Vector h(25);
      fill_normal(rng, h);
      const Eigen::Map<const Matrix> H(h.data(), 5, 5);
      const double oracle = nuclear_dist2_oracle(x0.as_low_rank().U, x0.as_low_rank().V, lambda, H);
      EXPECT_NEAR(g.dist2(lambda, h), oracle, 1e-8 * std::max(1.0, oracle)) << "r=" << r << " lambda=" << lambda;
    }
  }
}

TEST(Distance, OneLipschitzInH) {
  StreamRng rng(SeedSpec{37, 0});
  SubdiffGeometry g1(Regularizer::l1(), generate_sparse_signal(30, 4, SeedSpec{1, 1}));
  SubdiffGeometry g2(Regularizer::nuclear(5), generate_low_rank_signal(5, 2, SeedSpec{1, 1}));
  for (int rep = 0; rep < 100; ++rep) {
    Vector a(30), b(30), c(25), d(25);
    fill_normal(rng, a);
    fill_normal(rng, b);
    fill_normal(rng, c);
    fill_normal(rng, d);
    EXPECT_LE(std::fabs(g1.dist(1.3, a) - g1.dist(1.3, b)), (a - b).norm() + 1e-12);
    EXPECT_LE(std::fabs(g2.dist(1.3, c) - g2.dist(1.3, d)), (c - d).norm() + 1e-12);
  }
}

// The projection lies in λ∂f(x0): it satisfies the subgradient inequality
// f(x0 + w) ≥ f(x0) + ⟨s, w⟩ with s = P(h)/λ.
TEST(Distance, ProjectionIsSubgradient) {
  StreamRng rng(SeedSpec{38, 0});
  const auto x1 = generate_sparse_signal(20, 4, SeedSpec{4, 4});
  const auto x2 = generate_low_rank_signal(4, 2, SeedSpec{4, 4});
  SubdiffGeometry g1(Regularizer::l1(), x1), g2(Regularizer::nuclear(4), x2);
  for (int rep = 0; rep < 50; ++rep) {
    Vector h1(20), h2(16), w1(20), w2(16);
    fill_normal(rng, h1);
    fill_normal(rng, h2);
    fill_normal(rng, w1);
    fill_normal(rng, w2);
    const Vector s1 = g1.project(2.0, h1) / 2.0;
    const Vector s2 = g2.project(2.0, h2) / 2.0;
    EXPECT_NEAR((h1 - g1.project(2.0, h1)).norm(), g1.dist(2.0, h1), 1e-12);
    EXPECT_GE(value(Regularizer::l1(), x1.dense() + w1), value(Regularizer::l1(), x1.dense()) + s1.dot(w1) - 1e-12);
    EXPECT_GE(value(Regularizer::nuclear(4), x2.dense() + w2),
              value(Regularizer::nuclear(4), x2.dense()) + s2.dot(w2) - 1e-10);
  }
}

TEST(Distance, Errors) {
  SubdiffGeometry g(Regularizer::l1(), generate_sparse_signal(10, 2, SeedSpec{1, 1}));
  EXPECT_THROW(g.dist(-1.0, Vector::Zero(10)), InvalidArgument);
  EXPECT_THROW(g.dist(1.0, Vector::Zero(9)), InvalidArgument);
  EXPECT_THROW(SubdiffGeometry(Regularizer::l1(), generate_low_rank_signal(3, 1, SeedSpec{})), InvalidArgument);
  EXPECT_THROW(SubdiffGeometry(Regularizer::nuclear(4), generate_low_rank_signal(3, 1, SeedSpec{})), InvalidArgument);
}

TEST(Distance, AtZeroIsUnitBall) {
  const auto g = SubdiffGeometry::at_point(Regularizer::l1(), Vector::Zero(3));
  EXPECT_NEAR(g.dist(1.0, vec({0.5, 2, -3})), std::sqrt(1.0 + 4.0), 1e-15);
  EXPECT_NEAR(subdiff_distance(Regularizer::l1(), vec({1, 0}), vec({1, 0.5})), 0.0, 1e-15);
  EXPECT_NEAR(subdiff_distance(Regularizer::l1(), vec({1, 0}), vec({0.5, 2})), std::sqrt(0.25 + 1.0), 1e-15);
}

TEST(DualNorm, Values) {
  EXPECT_EQ(dual_norm(Regularizer::l1(), vec({1, -3, 2})), 3.0);
  Matrix D = Matrix::Zero(2, 2);
  D(0, 0) = 3;
  D(1, 1) = -4;
  EXPECT_NEAR(dual_norm(Regularizer::nuclear(2), flat(D)), 4.0, 1e-14);
}
