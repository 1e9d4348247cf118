#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "lassogeom/geometry.hpp"
#include "lassogeom/parallel.hpp"
#include "lassogeom/rng.hpp"

using namespace lassogeom;

TEST(Rng, SameSeedSameStream) {
  StreamRng a(SeedSpec{42, 7}), b(SeedSpec{42, 7});
  for (int i = 0; i < 1000; ++i) ASSERT_EQ(a(), b());
}

TEST(Rng, DistinctStreamsAndChildren) {
  std::set<std::uint64_t> first;
  const SeedSpec root{1, 0};
  for (std::uint64_t i = 0; i < 1000; ++i) first.insert(StreamRng(root.child(i))());
  EXPECT_EQ(first.size(), 1000u);
  EXPECT_NE(StreamRng(SeedSpec{1, 2})(), StreamRng(SeedSpec{2, 1})());
  EXPECT_EQ(root.child(3), root.child(3));
  EXPECT_FALSE(root.child(3) == root.child(4));
}

TEST(Rng, UniformOpenInterval) {
  StreamRng r(SeedSpec{3, 3});
  double sum = 0.0;
  const int N = 200000;
  for (int i = 0; i < N; ++i) {
    const double u = r.uniform01();
    ASSERT_GT(u, 0.0);
    ASSERT_LT(u, 1.0);
    sum += u;
  }
  EXPECT_NEAR(sum / N, 0.5, 4.0 * std::sqrt(1.0 / 12.0 / N));
}

TEST(Rng, BelowStaysInRange) {
  StreamRng r(SeedSpec{5, 1});
  std::vector<int> counts(7, 0);
  for (int i = 0; i < 70000; ++i) {
    const auto v = r.below(7);
    ASSERT_LT(v, 7u);
    ++counts[v];
  }
  for (int c : counts) EXPECT_NEAR(c, 10000, 500);
}

// Mean within 0.005 and variance within 1% over 10⁶ draws.
TEST(Rng, NormalMoments) {
  StreamRng r(SeedSpec{11, 0});
  const int N = 1000000;
  double s1 = 0, s2 = 0, s4 = 0;
  for (int i = 0; i < N; ++i) {
    const double x = r.normal();
    s1 += x;
    s2 += x * x;
    s4 += x * x * x * x;
  }
  const double mean = s1 / N;
  const double var = s2 / N - mean * mean;
  EXPECT_LT(std::fabs(mean), 0.005);
  EXPECT_NEAR(var, 1.0, 0.01);
  EXPECT_NEAR(s4 / N, 3.0, 0.05);
}

// Tail mass beyond the ziggurat base (|x| > 3.4426) against 2Φ(−R).
TEST(Rng, NormalTail) {
  StreamRng r(SeedSpec{13, 0});
  const int N = 4000000;
  int tail = 0;
  for (int i = 0; i < N; ++i) tail += std::fabs(r.normal()) > 3.442619855899;
  const double p = std::erfc(3.442619855899 / std::sqrt(2.0));
  EXPECT_NEAR(static_cast<double>(tail) / N, p, 4.0 * std::sqrt(p / N));
}

TEST(Rng, FillNormalDeterministic) {
  Vector a(50), b(50);
  StreamRng r1(SeedSpec{9, 9}), r2(SeedSpec{9, 9});
  fill_normal(r1, a);
  fill_normal(r2, b);
  EXPECT_EQ(a, b);
}

TEST(Parallel, ResultsIndependentOfWorkers) {
  std::vector<double> a(1000), b(1000);
  auto body = [](std::vector<double>& out) {
    return [&out](std::size_t i) {
      StreamRng r(SeedSpec{1, 0}.child(i));
      out[i] = r.normal();
    };
  };
  parallel_for(a.size(), 1, body(a));
  parallel_for(b.size(), 8, body(b));
  EXPECT_EQ(a, b);
}

TEST(Parallel, RethrowsFirstException) {
  EXPECT_THROW(parallel_for(100, 4,
                            [](std::size_t i) {
                              if (i == 37) throw std::runtime_error("boom");
                            }),
               std::runtime_error);
}

TEST(Parallel, EnvCapsWorkers) {
  setenv("LASSOGEOM_THREADS", "2", 1);
  EXPECT_EQ(resolve_workers(8), 2u);
  EXPECT_EQ(resolve_workers(1), 1u);
  EXPECT_LE(resolve_workers(0), 2u);
  setenv("LASSOGEOM_THREADS", "junk", 1);
  EXPECT_EQ(resolve_workers(3), 3u);
  unsetenv("LASSOGEOM_THREADS");
  EXPECT_EQ(resolve_workers(5), 5u);
}

TEST(MonteCarlo, ChunkedMeanIndependentOfWorkers) {
  const auto x0 = generate_sparse_signal(50, 5, SeedSpec{1, 1});
  SubdiffGeometry g(Regularizer::l1(), x0);
  const auto a = delta_monte_carlo(g, 1.0, 10000, SeedSpec{4, 4}, 1);
  const auto b = delta_monte_carlo(g, 1.0, 10000, SeedSpec{4, 4}, 6);
  EXPECT_EQ(a.estimate, b.estimate);
  EXPECT_EQ(a.std_error, b.std_error);
}
