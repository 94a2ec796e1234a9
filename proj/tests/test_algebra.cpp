#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "lincf/lincf.hpp"
#include "oracles.hpp"

using namespace lincf;
using fixtures::build_sem;

namespace {

LinearSem chain() {
  return build_sem({"W", "X", "Y"}, {{"W", "X", 0.5}, {"X", "Y", 2.0}, {"W", "Y", 1.0}});
}

}  // namespace

TEST(Stability, RecursiveModelsHaveZeroRadius) {
  for (const auto& fx : fixtures::fleet()) {
    const auto r = check_stability(fx.sem, fx.part);
    EXPECT_TRUE(r.stable) << fx.name;
    if (fx.acyclic) {
      EXPECT_EQ(r.rho_full, 0.0) << fx.name;
      EXPECT_EQ(*r.rho_tt, 0.0) << fx.name;
      EXPECT_EQ(*r.rho_xsxs, 0.0) << fx.name;
    }
  }
}

TEST(Stability, FeedbackPairs) {
  const auto good = check_stability(build_sem({"X", "Y"}, {{"X", "Y", 0.5}, {"Y", "X", 0.5}}));
  EXPECT_TRUE(good.stable);
  EXPECT_NEAR(good.rho_full, 0.5, 1e-12);
  const auto bad = check_stability(build_sem({"X", "Y"}, {{"X", "Y", 1.1}, {"Y", "X", 1.0}}));
  EXPECT_FALSE(bad.stable);
  EXPECT_NEAR(bad.rho_full, std::sqrt(1.1), 1e-12);
}

TEST(Stability, NearUnitRadiusWarns) {
  const auto r = check_stability(build_sem({"X", "Y"}, {{"X", "Y", 0.995}, {"Y", "X", 1.0}}));
  EXPECT_TRUE(r.stable);
  EXPECT_FALSE(r.warnings.empty());
}

TEST(Stability, BlockFactorisation) {
  for (const auto& fx : fixtures::fleet()) {
    const auto r = check_stability(fx.sem, fx.part);
    EXPECT_NEAR(r.rho_full, std::max(*r.rho_tt, *r.rho_xsxs), 1e-8) << fx.name;
  }
}

TEST(SpectralRadius, AgreesWithDenseEigenvalues) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-0.6, 0.6);
  std::bernoulli_distribution keep(0.35);
  for (int trial = 0; trial < 50; ++trial) {
    Matrix m = Matrix::Zero(6, 6);
    for (Index i = 0; i < 6; ++i)
      for (Index j = 0; j < 6; ++j)
        if (i != j && keep(rng)) m(i, j) = u(rng);
    // nilpotent patterns are ill-conditioned for a dense solver; check those exactly
    Matrix p = m;
    for (int k = 1; k < 6; ++k) p = p * m;
    if (p.isZero(0.0)) {
      EXPECT_EQ(spectral_radius(m), 0.0);
      continue;
    }
    Eigen::EigenSolver<Matrix> es(m, false);
    EXPECT_NEAR(spectral_radius(m), es.eigenvalues().cwiseAbs().maxCoeff(), 1e-6);
  }
}

TEST(ImpliedMoments, Chain) {
  const Moments m = implied_moments(chain());
  EXPECT_NEAR(m.cov(0, 0), 1.0, 1e-14);
  EXPECT_NEAR(m.cov(1, 1), 1.25, 1e-14);
  EXPECT_NEAR(m.cov(2, 2), 9.0, 1e-13);
  EXPECT_NEAR(m.cov(1, 2), 3.0, 1e-13);
  EXPECT_NEAR(m.cov(0, 2), 2.0, 1e-13);
  EXPECT_TRUE(m.mean.isZero());
}

TEST(ImpliedMoments, NoEdgesIsIdentity) {
  RawModel r;
  r.names = {"A", "B"};
  r.intercepts = {{"A", 1.5}, {"B", -2.0}};
  Matrix c(2, 2);
  c << 2.0, 0.3, 0.3, 1.0;
  r.dist_cov = c;
  const Moments m = implied_moments(validate_model(r));
  EXPECT_EQ(m.mean, (Vector(2) << 1.5, -2.0).finished());
  EXPECT_TRUE(m.cov.isApprox(c, 1e-15));
}

TEST(ImpliedMoments, MatchesFixedPointOverFleet) {
  for (const auto& fx : fixtures::fleet()) {
    const Moments m = implied_moments(fx.sem);
    EXPECT_LE((m.mean - oracles::fixed_point_mean(fx.sem)).cwiseAbs().maxCoeff(), 1e-12) << fx.name;
    EXPECT_LE((m.cov - oracles::fixed_point_cov(fx.sem.coeffs, fx.sem.dist_cov)).cwiseAbs().maxCoeff(), 1e-11)
        << fx.name;
    EXPECT_TRUE(is_psd(m.cov));
  }
}

TEST(ImpliedMoments, FeedbackMatchesEquilibriumSimulation) {
  const LinearSem sem = build_sem({"X", "Y"}, {{"X", "Y", 0.5}, {"Y", "X", 0.5}});
  const Moments m = implied_moments(sem);
  // var = (1 + 0.25) / (1 - 0.25)^2 by symmetry
  EXPECT_NEAR(m.cov(0, 0), 1.25 / 0.5625, 1e-12);
  BoxConfig cfg;
  cfg.seed = 11;
  const ConditionalMoments mc = condition_box_mc(sem, Evidence::none(), cfg);
  for (Index i = 0; i < 2; ++i)
    for (Index j = 0; j < 2; ++j)
      EXPECT_LE(std::abs(mc.cov(i, j) - m.cov(i, j)), 4 * mc.provenance.se_cov(i, j));
}

TEST(ImpliedMoments, RejectsUnstable) {
  const LinearSem sem = build_sem({"X", "Y"}, {{"X", "Y", 1.1}, {"Y", "X", 1.0}});
  try {
    implied_moments(sem);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::Unstable);
    EXPECT_EQ(e.kind(), ErrorKind::Numerical);
  }
}

TEST(TotalEffects, Examples) {
  const LinearSem c = chain();
  EXPECT_DOUBLE_EQ(total_effects(c, make_partition(c, {"X"}, {}, {"W"}, "Y")).tau_sx(0, 0), 2.0);
  const LinearSem med = build_sem({"X", "M", "Y"}, {{"X", "M", 0.5}, {"M", "Y", 0.5}, {"X", "Y", 1.0}});
  const auto te = total_effects(med, make_partition(med, {"X"}, {}, {}, "Y"));
  EXPECT_NEAR(te.tau_yx()(0), 1.25, 1e-15);
}

TEST(TotalEffects, TwoCycleWalkSum) {
  const LinearSem sem = build_sem({"X", "Y"}, {{"X", "Y", 0.5}, {"Y", "X", 0.4}});
  const Partition p = make_partition(sem, {"X"}, {}, {}, "Y");
  EXPECT_NEAR(walk_sum_effects(sem, p)(0, 0), 0.5 / (1 - 0.2), 1e-15);
  // holding X fixed, only the direct arrow remains
  EXPECT_NEAR(total_effects(sem, p).tau_sx(0, 0), 0.5, 1e-15);
}

TEST(TotalEffects, BlocksStackExactly) {
  for (const auto& fx : fixtures::fleet()) {
    const auto te = total_effects(fx.sem, fx.part);
    Matrix stacked(te.tau_sx.rows(), te.tau_sx.cols());
    stacked << te.tau_fx(), te.tau_ux();
    EXPECT_EQ(stacked, te.tau_sx) << fx.name;
    EXPECT_EQ(te.tau_yx(), te.tau_sx.row(fx.part.y_in_s())) << fx.name;
  }
}

TEST(TotalEffects, PathEnumerationAndFixedPoint) {
  for (const auto& fx : fixtures::fleet()) {
    const Matrix tau = total_effects(fx.sem, fx.part).tau_sx;
    EXPECT_LE((tau - oracles::fixed_point_tau(fx.sem, fx.part)).cwiseAbs().maxCoeff(), 1e-12) << fx.name;
    if (fx.acyclic) EXPECT_LE((tau - oracles::path_enumeration(fx.sem, fx.part)).cwiseAbs().maxCoeff(), 1e-10);
  }
}

TEST(TotalEffects, NeumannSeriesConverges) {
  for (const auto& fx : fixtures::fleet()) {
    if (check_stability(fx.sem).rho_full >= 0.9) continue;
    const Index n = fx.sem.size();
    const Matrix inv = (Matrix::Identity(n, n) - fx.sem.coeffs).inverse();
    Matrix partial = Matrix::Zero(n, n), power = Matrix::Identity(n, n);
    double prev = INFINITY;
    for (int k = 0; k <= 64; ++k) {
      partial += power;
      power = power * fx.sem.coeffs;
      const double err = (inv - partial).norm();
      EXPECT_LE(err, prev + 1e-15) << fx.name << " k=" << k;
      prev = err;
    }
    EXPECT_LE(prev, 1e-12) << fx.name;
  }
}
