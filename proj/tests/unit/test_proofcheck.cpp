#include <gtest/gtest.h>

#include <cmath>

#include "lassogeom/proofcheck.hpp"

using namespace lassogeom;

namespace {

struct L1Fixture {
  SignalModel x0 = generate_sparse_signal(340, 10, SeedSpec{1, 1});
  SubdiffGeometry g{Regularizer::l1(), x0};
  CalibrationReport cal = calibrate(g, 140, DeltaMethod::closed_form());
  double lambda = cal.lambda_best;
  double delta = cal.delta_at_best;
};

Vector gaussian(Eigen::Index n, std::uint64_t seed) { return sample_standard_gaussian(n, SeedSpec{seed, 77}); }

// Dense α grid on [ℓ, 10ℓ] refined by golden section around the best node.
std::pair<double, bool> alpha_grid_oracle(const ProofScenario& sc) {
  auto psi = [&](double a) { return (a * sc.g - sc.zbar).norm() - a * sc.dist(); };
  const int N = 200000;
  double best = INFINITY;
  int arg = 0;
  for (int i = 0; i <= N; ++i) {
    const double v = psi(sc.ell * (1.0 + 9.0 * i / N));
    if (v < best) best = v, arg = i;
  }
  double a = sc.ell * (1.0 + 9.0 * std::max(arg - 1, 0) / N), b = sc.ell * (1.0 + 9.0 * std::min(arg + 1, N) / N);
  for (int it = 0; it < 200; ++it) {
    const double c = b - 0.618033988749895 * (b - a), d = a + 0.618033988749895 * (b - a);
    (psi(c) < psi(d) ? b : a) = (psi(c) < psi(d) ? d : c);
  }
  return {std::min(best, psi(0.5 * (a + b))), arg == N};
}

}  // namespace

TEST(LValue, DistZeroAndOrthogonal) {
  const auto x0 = SignalModel::sparse(3, {0}, {1.0});
  SubdiffGeometry g(Regularizer::l1(), x0);
  Vector h(3);
  h << 1.5, 0.2, -0.7;  // inside 1.5·∂‖·‖₁(x0)
  Vector gv(2), zb(2);
  gv << 3.0, 0.0;
  zb << 0.0, 2.0;
  const auto sc = make_scenario(g, 1.5, 1.0, 0.1, 2, zb, gv, h, 0.7);
  EXPECT_NEAR(sc.dist(), 0.0, 1e-15);
  EXPECT_NEAR(L_value(sc), std::sqrt(0.49 * 9.0 + 4.0), 1e-14);
}

TEST(LValue, ZeroNoise) {
  L1Fixture s;
  const Vector gv = gaussian(140, 1), h = gaussian(340, 2);
  const auto sc = make_scenario(s.g, s.lambda, s.delta, 1.0, 140, Vector::Zero(140), gv, h, 2.0);
  ASSERT_GT(gv.norm(), sc.dist());
  EXPECT_NEAR(L_value(sc), 2.0 * (gv.norm() - sc.dist()), 1e-12);
  // ‖g‖ < dist: unbounded below.
  const auto sc2 = make_scenario(s.g, s.lambda, s.delta, 1.0, 140, Vector::Zero(140), 0.1 * gv, h, 2.0);
  EXPECT_EQ(L_value(sc2), -INFINITY);
}

TEST(LValue, MatchesAlphaGrid) {
  L1Fixture s;
  for (std::uint64_t i = 0; i < 8; ++i) {
    const Vector gv = gaussian(140, 10 + i), h = gaussian(340, 20 + i);
    const Vector zb = (0.2 + 0.3 * i) * gaussian(140, 30 + i);
    // Radii chosen so the minimizer is sometimes interior.
    const double ell = 0.05 + 0.4 * i;
    const auto sc = make_scenario(s.g, s.lambda, s.delta, 2.0, 140, zb, gv, h, ell);
    const auto [oracle, at_edge] = alpha_grid_oracle(sc);
    const double L = L_value(sc);
    EXPECT_LE(L, oracle + 1e-9);
    if (!at_edge) EXPECT_NEAR(L, oracle, 1e-6) << i;
  }
}

// max over ‖w‖ = α of min over s ∈ λ∂f of (h − s)ᵀw equals α·dist(h, λ∂f).
TEST(LValue, MaxMinExchange) {
  const auto x0 = SignalModel::sparse(2, {0}, {-1.0});
  SubdiffGeometry g(Regularizer::l1(), x0);
  for (std::uint64_t i = 0; i < 5; ++i) {
    const Vector h = 2.0 * gaussian(2, 40 + i);
    const double lambda = 0.5 + 0.4 * i, alpha = 1.7;
    double best = -INFINITY;
    const int N = 400000;
    for (int j = 0; j < N; ++j) {
      const double th = 2.0 * M_PI * j / N;
      const double w0 = alpha * std::cos(th), w1 = alpha * std::sin(th);
      // min over s of (h − s)ᵀw = hᵀw − λ(−w0 + |w1|).
      best = std::max(best, h[0] * w0 + h[1] * w1 - lambda * (-w0 + std::fabs(w1)));
    }
    EXPECT_NEAR(best, alpha * g.dist(lambda, h), 1e-6 * std::max(1.0, best));
  }
}

// Direct polar-grid minimization of the Gordon objective before the two
// simplifications, for n = 2 and m = 3.
TEST(LValue, MatchesDirectSmallGrid) {
  const auto x0 = SignalModel::sparse(2, {1}, {1.0});
  SubdiffGeometry g(Regularizer::l1(), x0);
  for (std::uint64_t i = 0; i < 4; ++i) {
    const double lambda = 0.6 + 0.3 * i;
    const Vector h = gaussian(2, 50 + i);
    Vector gv = gaussian(3, 60 + i);
    gv *= (g.dist(lambda, h) + 1.0 + i) / gv.norm();  // ‖g‖ > dist: bounded problem
    const Vector zb = gaussian(3, 70 + i);
    const double ell = 0.3 + 0.2 * i;
    const auto sc = make_scenario(g, lambda, 1.0, 0.1, 3, zb, gv, h, ell);
    auto F = [&](double a, double th) {
      const double w0 = a * std::cos(th), w1 = a * std::sin(th);
      const double inner = h[0] * w0 + h[1] * w1 - lambda * (std::fabs(w0) + w1);
      return (a * gv - zb).norm() - inner;
    };
    double best = INFINITY, ba = ell, bt = 0.0;
    for (int ia = 0; ia <= 600; ++ia)
      for (int it = 0; it < 1200; ++it) {
        const double a = ell * (1.0 + 19.0 * ia / 600.0), th = 2.0 * M_PI * it / 1200.0;
        if (const double v = F(a, th); v < best) best = v, ba = a, bt = th;
      }
    for (double da = 0.05 * ell, dt = 0.01; dt > 1e-12; da *= 0.5, dt *= 0.5)
      for (bool moved = true; moved;) {
        moved = false;
        for (auto [sa, st] : {std::pair{1, 0}, {-1, 0}, {0, 1}, {0, -1}, {1, 1}, {-1, -1}, {1, -1}, {-1, 1}}) {
          const double a = std::max(ell, ba + sa * da), th = bt + st * dt;
          if (const double v = F(a, th); v < best - 1e-15) best = v, ba = a, bt = th, moved = true;
        }
      }
    EXPECT_NEAR(L_value(sc), best, 1e-4) << i;
  }
}

TEST(Conditions, SyntheticMargins) {
  L1Fixture s;
  const double t = 2.0;
  const auto sc = make_scenario(s.g, s.lambda, s.delta, t, 140, gaussian(140, 3), Vector::Zero(140),
                                Vector::Zero(340), 1.0);
  const auto c = check_conditions(sc);
  EXPECT_FALSE(c[0].holds);
  EXPECT_NEAR(c[0].margin, -(gamma_m(140) - t / 4.0), 1e-14);
  EXPECT_NEAR(sc.dist(), s.lambda * std::sqrt(10.0), 1e-12);
  EXPECT_NEAR(c[1].margin, std::sqrt(s.delta) + t / 4.0 - s.lambda * std::sqrt(10.0), 1e-12);
  EXPECT_TRUE(c[2].holds);  // g = 0
  for (const auto& e : c) EXPECT_EQ(e.holds, e.margin >= 0.0);
}

TEST(Lemma3, ThresholdExample) {
  const double zbar = 1.0, t = 1.0, delta = 100.0;
  const double rhs = lemma3_alpha_threshold(140, delta, t, zbar);
  const double ell = regularized_bound({140, delta, t, zbar / std::sqrt(140.0)}).value;
  EXPECT_GT(ell, rhs);
  const double gm = gamma_m(140);
  EXPECT_NEAR(rhs, 2.0 * (10.0 + 0.5) / (gm * gm - 100.0 - 0.5 * (gm + 10.0)), 1e-14);
  EXPECT_THROW(lemma3_alpha_threshold(140, 139.0, 4.0, 1.0), OutOfRange);
}

TEST(Lemma3, ConformingScenariosHold) {
  L1Fixture s;
  const double t = 4.0;
  ScenarioSpec spec{&s.g, s.lambda, s.delta, t, 140, std::sqrt(140.0) * 0.1 * gaussian(140, 5)};
  const auto sweep = lemma3_sweep(spec, 500, 5000, SeedSpec{9, 0}, 256, 0);
  EXPECT_EQ(sweep.conforming, 500);
  EXPECT_EQ(sweep.failures, 0);
  EXPECT_EQ(sweep.threshold_failures, 0);
  EXPECT_GT(sweep.min_margin, 0.0);
}

TEST(Lemma3, Preconditions) {
  L1Fixture s;
  const auto bad = make_scenario(s.g, s.lambda, s.delta, 4.0, 140, gaussian(140, 3), Vector::Zero(140),
                                 gaussian(340, 4));
  EXPECT_THROW(lemma3_check(bad), InvalidArgument);
  // ℓ(t) from the bound requires admissible t.
  EXPECT_THROW(make_scenario(s.g, s.lambda, s.delta, 8.0, 140, gaussian(140, 3), gaussian(140, 1), gaussian(340, 4)),
               OutOfRange);
}

TEST(Frequencies, MeetLowerBoundsAndAreDeterministic) {
  L1Fixture s;
  ScenarioSpec spec{&s.g, s.lambda, s.delta, 8.0, 140, gaussian(140, 6)};
  const auto a = condition_frequencies(spec, 20000, SeedSpec{11, 0}, 1);
  const auto b = condition_frequencies(spec, 20000, SeedSpec{11, 0}, 4);
  EXPECT_EQ(a.frequency, b.frequency);
  for (int j = 0; j < 3; ++j) EXPECT_GE(a.frequency[j], a.lower_bound[j] - 3.0 * a.std_error[j]);
  EXPECT_GE(a.joint, a.joint_lower_bound - 3.0 * a.joint_std_error);
  EXPECT_NEAR(a.lower_bound[0], 1.0 - std::exp(-2.0), 1e-15);
  EXPECT_NEAR(a.joint_lower_bound, 1.0 - 2.5 * std::exp(-2.0), 1e-15);
}

TEST(Tails, GaussianNorm) {
  std::vector<double> v;
  StreamRng r(SeedSpec{12, 0});
  for (int i = 0; i < 20000; ++i) {
    Vector g(50);
    fill_normal(r, g);
    v.push_back(g.norm());
  }
  for (const auto& c : lipschitz_tails("norm_g", v, gamma_m(50), {0.5, 1.0, 2.0})) {
    EXPECT_TRUE(c.holds);
    EXPECT_NEAR(c.bound, std::exp(-c.deviation * c.deviation / 2.0), 1e-15);
  }
}

TEST(EndToEnd, BoundHoldsAtBest) {
  L1Fixture s;
  const auto inst = generate_instance(s.x0, 140, NoiseSpec::gaussian(0.5), SeedSpec{13, 0});
  EndToEndOptions opt;
  opt.probe_seed = SeedSpec{13, 1};
  const auto rec = end_to_end_bound_check(inst, Regularizer::l1(), s.lambda, s.delta, 4.0, {}, opt);
  EXPECT_EQ(rec.status, "ok");
  EXPECT_TRUE(rec.converged);
  EXPECT_FALSE(rec.violated);
  EXPECT_LE(rec.err, rec.bound_l_t);
  EXPECT_LT(rec.sharp_est, rec.bound_l_t);
  ASSERT_TRUE(rec.lemma2_probe_margin.has_value());
  EXPECT_GT(*rec.lemma2_probe_margin, 0.0);
}

TEST(EndToEnd, DegenerateAndVacuous) {
  L1Fixture s;
  const auto noiseless = generate_instance(s.x0, 140, NoiseSpec::fixed(Vector::Zero(140)), SeedSpec{14, 0});
  const auto rec = end_to_end_bound_check(noiseless, Regularizer::l1(), s.lambda, s.delta, 1.0);
  EXPECT_TRUE(rec.degenerate);
  EXPECT_FALSE(rec.violated);
  const auto inst = generate_instance(s.x0, 140, NoiseSpec::gaussian(0.1), SeedSpec{14, 1});
  const double far = 6.0;
  const auto vac =
      end_to_end_bound_check(inst, Regularizer::l1(), far, delta_l1_closed_form(340, 10, far), 1.0);
  EXPECT_EQ(vac.status, "vacuous");
  EXPECT_FALSE(vac.violated);
  EXPECT_TRUE(std::isnan(vac.bound_l_t));
  const auto oor = end_to_end_bound_check(inst, Regularizer::l1(), s.lambda, s.delta, 8.0);
  EXPECT_EQ(oor.status, "t_out_of_range");
}
