#include <gtest/gtest.h>

#include <cmath>
#include <functional>

#include "lassogeom/solvers.hpp"
#include "oracles.hpp"

using namespace lassogeom;
using lassogeom::testing::grid_oracle;

namespace {

ProblemInstance random_instance(Eigen::Index m, Eigen::Index n, std::uint64_t seed, double sigma = 0.3) {
  const auto k = std::max<Eigen::Index>(1, n / 5);
  return generate_instance(generate_sparse_signal(n, k, SeedSpec{seed, 1}), m, NoiseSpec::gaussian(sigma),
                           SeedSpec{seed, 2});
}

// Exact minimum of ½‖Ax − y‖² over ‖x‖₁ ≤ b by enumerating sign patterns.
double constrained_enumeration_oracle(const ProblemInstance& inst, double b) {
  const Eigen::Index n = inst.n;
  double best = 0.5 * inst.y.squaredNorm();
  const int total = static_cast<int>(std::pow(3, n));
  for (int c = 1; c < total; ++c) {
    std::vector<Eigen::Index> S;
    std::vector<double> sg;
    int v = c;
    for (Eigen::Index i = 0; i < n; ++i, v /= 3)
      if (v % 3 != 1) S.push_back(i), sg.push_back(v % 3 == 0 ? -1.0 : 1.0);
    const auto k = static_cast<Eigen::Index>(S.size());
    Matrix As(inst.m, k);
    Vector s(k);
    for (Eigen::Index j = 0; j < k; ++j) As.col(j) = inst.A.col(S[static_cast<std::size_t>(j)]), s[j] = sg[static_cast<std::size_t>(j)];
    const Matrix G = As.transpose() * As;
    const Vector rhs = As.transpose() * inst.y;
    std::vector<Vector> cands{G.ldlt().solve(rhs)};
    Matrix K = Matrix::Zero(k + 1, k + 1);
    K.topLeftCorner(k, k) = G;
    K.topRightCorner(k, 1) = s;
    K.bottomLeftCorner(1, k) = s.transpose();
    Vector r2(k + 1);
    r2.head(k) = rhs;
    r2[k] = b;
    cands.push_back(K.fullPivLu().solve(r2).head(k));
    for (const auto& xs : cands) {
      if (!xs.allFinite() || (xs.array() * s.array() < 0).any() || s.dot(xs) > b + 1e-12) continue;
      best = std::min(best, 0.5 * (inst.y - As * xs).squaredNorm());
    }
  }
  return best;
}

}  // namespace

TEST(L2Lasso, OneDimensional) {
  const auto inst = make_instance(Matrix::Ones(1, 1), Vector::Zero(1), Vector::Constant(1, 2.0));
  // m = 1 so λ/√m = λ.
  auto s = solve_l2_lasso(inst, Regularizer::l1(), 0.5);
  EXPECT_NEAR(s.x[0], 2.0, 1e-9);
  EXPECT_NEAR(s.objective, 1.0, 1e-9);
  s = solve_l2_lasso(inst, Regularizer::l1(), 2.0);
  EXPECT_NEAR(s.x[0], 0.0, 1e-9);
  EXPECT_NEAR(s.objective, 2.0, 1e-9);
}

TEST(L2Lasso, CertificatesOnRandomInstances) {
  int converged = 0;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const Eigen::Index n = 5 + static_cast<Eigen::Index>(seed % 36);
    const Eigen::Index m = 3 + static_cast<Eigen::Index>((seed * 7) % 28);
    const auto inst = random_instance(m, n, seed);
    const double lambda = 0.3 + 0.1 * static_cast<double>(seed % 20);
    const auto s = solve_l2_lasso(inst, Regularizer::l1(), lambda);
    ASSERT_TRUE(s.converged);
    ++converged;
    const auto cert = certify_l2_lasso(inst, Regularizer::l1(), lambda, s.x);
    if (cert) {
      EXPECT_LE(*cert, 1e-6) << "seed " << seed;
    } else {
      EXPECT_TRUE(s.zero_residual);
      EXPECT_LE(s.optimality_residual, 1e-6);
    }
  }
  EXPECT_EQ(converged, 50);
}

TEST(L2Lasso, GridOracleSmall) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Eigen::Index n = 1 + static_cast<Eigen::Index>(seed % 4);
    const Eigen::Index m = n + 1 + static_cast<Eigen::Index>(seed % 3);
    const auto inst = random_instance(m, n, 100 + seed);
    const double lambda = 0.4 + 0.2 * static_cast<double>(seed);
    const auto f = Regularizer::l1();
    const auto s = solve_l2_lasso(inst, f, lambda);
    const double oracle =
        grid_oracle([&](const Vector& x) { return l2_lasso_objective(inst, f, lambda, x); }, n, 3.0);
    EXPECT_NEAR(s.objective, oracle, 1e-4) << "seed " << seed;
    EXPECT_LE(s.objective, oracle + 1e-9);
  }
}

TEST(L2Lasso, InterpolatingRegime) {
  // m < n and a small λ: the optimum fits y exactly.
  const auto inst = random_instance(20, 60, 7);
  const auto s = solve_l2_lasso(inst, Regularizer::l1(), 0.05);
  EXPECT_TRUE(s.converged);
  EXPECT_TRUE(s.zero_residual);
  EXPECT_LT(s.residual.norm(), 1e-8);
}

TEST(L2Lasso, LambdaZero) {
  const auto tall = random_instance(12, 5, 3);
  const auto s = solve_l2_lasso(tall, Regularizer::l1(), 0.0);
  EXPECT_FALSE(s.non_unique);
  EXPECT_LT((tall.A.transpose() * s.residual).norm(), 1e-10);
  const auto wide = random_instance(5, 12, 3);
  const auto w = solve_l2_lasso(wide, Regularizer::l1(), 0.0);
  EXPECT_TRUE(w.non_unique);
  EXPECT_TRUE(w.zero_residual);
}

TEST(L2Lasso, Nuclear) {
  const auto x0 = generate_low_rank_signal(5, 1, SeedSpec{4, 4});
  const auto inst = generate_instance(x0, 40, NoiseSpec::gaussian(0.2), SeedSpec{4, 5});
  const auto f = Regularizer::nuclear(5);
  const auto s = solve_l2_lasso(inst, f, 2.0);
  ASSERT_TRUE(s.converged);
  const auto cert = certify_l2_lasso(inst, f, 2.0, s.x);
  ASSERT_TRUE(cert.has_value());
  EXPECT_LE(*cert, 1e-6);
}

TEST(L2Lasso, Errors) {
  auto inst = random_instance(10, 8, 1);
  EXPECT_THROW(solve_l2_lasso(inst, Regularizer::l1(), -1.0), InvalidArgument);
  EXPECT_THROW(solve_l2_lasso(inst, Regularizer::nuclear(3), 1.0), InvalidArgument);
  SolveConfig cfg;
  cfg.max_iterations = 100;
  cfg.optimality_tol = 1e-300;
  try {
    solve_l2_lasso(inst, Regularizer::l1(), 1.0, cfg);
    FAIL() << "expected NonConvergence";
  } catch (const NonConvergence& e) {
    EXPECT_EQ(e.iterations(), 100);
    EXPECT_TRUE(std::isfinite(e.objective()));
  }
  inst.y[0] = NAN;
  EXPECT_THROW(solve_l2_lasso(inst, Regularizer::l1(), 1.0), InvalidArgument);
}

TEST(L22Lasso, IdentityDesignIsSoftThreshold) {
  const Eigen::Index n = 6;
  StreamRng r(SeedSpec{8, 8});
  Vector y(n);
  fill_normal(r, y);
  const auto inst = make_instance(Matrix::Identity(n, n), Vector::Zero(n), y);
  const double tau = 1.5;
  const auto s = solve_l22_lasso(inst, Regularizer::l1(), tau);
  EXPECT_LT((s.x - prox(Regularizer::l1(), tau / std::sqrt(6.0), y)).norm(), 1e-9);
}

TEST(L22Lasso, TauZeroAndOracle) {
  const auto inst = random_instance(9, 4, 9);
  const auto ls = solve_l22_lasso(inst, Regularizer::l1(), 0.0);
  EXPECT_LT((inst.A.transpose() * ls.residual).norm(), 1e-10);
  for (std::uint64_t seed = 0; seed < 6; ++seed) {
    const Eigen::Index n = 1 + static_cast<Eigen::Index>(seed % 4);
    const auto small = random_instance(n + 2, n, 200 + seed);
    const double tau = 0.2 + 0.3 * static_cast<double>(seed);
    const auto s = solve_l22_lasso(small, Regularizer::l1(), tau);
    EXPECT_LE(certify_l22_lasso(small, Regularizer::l1(), tau, s.x), 1e-6);
    const double oracle = grid_oracle(
        [&](const Vector& x) { return l22_lasso_objective(small, Regularizer::l1(), tau, x); }, n, 3.0);
    EXPECT_NEAR(s.objective, oracle, 1e-4);
  }
}

TEST(L22Lasso, MonotoneTrace) {
  const auto inst = random_instance(30, 60, 10);
  SolveConfig cfg;
  cfg.record_trace = true;
  const auto s = solve_l22_lasso(inst, Regularizer::l1(), 0.5, cfg);
  ASSERT_GT(s.objective_trace.size(), 2u);
  for (std::size_t i = 1; i < s.objective_trace.size(); ++i)
    EXPECT_LE(s.objective_trace[i], s.objective_trace[i - 1] + 1e-15);
}

TEST(Constrained, BudgetZeroAndInactive) {
  const auto inst = random_instance(12, 4, 11);
  const auto z = solve_constrained(inst, Regularizer::l1(), 0.0);
  EXPECT_EQ(z.x, Vector::Zero(4));
  EXPECT_NEAR(z.objective, inst.y.norm(), 1e-14);
  const Vector ls = inst.A.colPivHouseholderQr().solve(inst.y);
  const auto s = solve_constrained(inst, Regularizer::l1(), ls.lpNorm<1>() + 1.0);
  EXPECT_LT((s.x - ls).norm(), 1e-7);
}

TEST(Constrained, EnumerationOracle) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Eigen::Index n = 2 + static_cast<Eigen::Index>(seed % 4);
    const auto inst = random_instance(n + 3, n, 300 + seed);
    const double b = 0.2 + 0.15 * static_cast<double>(seed);
    const auto s = solve_constrained(inst, Regularizer::l1(), b);
    EXPECT_LE(s.x.lpNorm<1>(), b + 1e-9);
    const double oracle = constrained_enumeration_oracle(inst, b);
    EXPECT_NEAR(0.5 * s.residual.squaredNorm(), oracle, 1e-8 * std::max(1.0, oracle)) << "seed " << seed;
    EXPECT_NEAR(s.objective, std::sqrt(2.0 * oracle), 1e-4);
  }
}

TEST(Constrained, MonotoneTraceAndNuclear) {
  const auto x0 = generate_low_rank_signal(4, 1, SeedSpec{5, 5});
  const auto inst = generate_instance(x0, 30, NoiseSpec::gaussian(0.1), SeedSpec{5, 6});
  const auto f = Regularizer::nuclear(4);
  SolveConfig cfg;
  cfg.record_trace = true;
  const auto s = solve_constrained(inst, f, 0.8, cfg);
  EXPECT_LE(value(f, s.x), 0.8 + 1e-9);
  for (std::size_t i = 1; i < s.objective_trace.size(); ++i)
    EXPECT_LE(s.objective_trace[i], s.objective_trace[i - 1] + 1e-15);
  EXPECT_LE(certify_constrained(inst, f, 0.8, s.x, operator_norm_squared(inst.A)), 1e-6);
}

TEST(ProximalDenoise, Examples) {
  Vector y(2);
  y << 3, -0.2;
  EXPECT_EQ(proximal_denoise(Regularizer::l1(), 2.0, 0.5, y), (Vector(2) << 2, 0).finished());
  EXPECT_EQ(proximal_denoise(Regularizer::l1(), 0.0, 0.5, y), y);
  EXPECT_THROW(proximal_denoise(Regularizer::l1(), 1.0, 0.0, y), InvalidArgument);
}

TEST(OperatorNorm, MatchesSvd) {
  const auto inst = random_instance(7, 13, 12);
  Eigen::JacobiSVD<Matrix> svd(inst.A);
  EXPECT_NEAR(operator_norm_squared(inst.A), svd.singularValues()[0] * svd.singularValues()[0], 1e-12);
}
