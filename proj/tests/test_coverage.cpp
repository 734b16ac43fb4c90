#include <gtest/gtest.h>

#include <cmath>

#include "mcinv/coverage.hpp"

using namespace mcinv;

TEST(Coverage, NoReplicatesCoversAlways) {
  CoverageConfig cfg;
  cfg.N = 0;
  cfg.R = 50;
  const auto r = run_coverage(cfg);
  EXPECT_EQ(r.covered, 50u);
  EXPECT_EQ(r.empirical_coverage, 1.0);
  EXPECT_EQ(r.unbounded, 50u);
}

TEST(Coverage, AlphaFloorPropagates) {
  CoverageConfig cfg;
  cfg.N = 19;
  cfg.alpha = 0.05;  // Bonferroni floor 2/20
  cfg.R = 5;
  EXPECT_THROW(run_coverage(cfg), PreconditionError);
}

TEST(Coverage, OneSampleMeetsGuarantee) {
  CoverageConfig cfg;
  cfg.model = Model::one_sample;
  cfg.n = 10;
  cfg.theta_true = 2.0;
  cfg.alpha = 0.1;
  cfg.N = 200;
  cfg.R = 2000;
  cfg.tol = 1e-6;
  const auto r = run_coverage(cfg);
  EXPECT_GE(r.empirical_coverage, 0.9 - 3.0 * r.binomial_se);
  EXPECT_DOUBLE_EQ(r.binomial_se, std::sqrt(0.1 * 0.9 / 2000));
  EXPECT_TRUE(std::isfinite(r.mean_length));
}

TEST(Coverage, DeterministicAndThreadInvariant) {
  CoverageConfig cfg;
  cfg.model = Model::two_sample;
  cfg.n = 12;
  cfg.m = 6;
  cfg.theta_true = -1.5;
  cfg.N = 99;
  cfg.R = 200;
  cfg.tol = 1e-6;
  const auto a = run_coverage(cfg);
  cfg.threads = 3;
  const auto b = run_coverage(cfg);
  EXPECT_EQ(a.covered, b.covered);
  EXPECT_EQ(a.mean_length, b.mean_length);
}

TEST(Coverage, InvalidConfig) {
  CoverageConfig cfg;
  cfg.R = 0;
  EXPECT_THROW(run_coverage(cfg), DomainError);
  cfg.R = 1;
  cfg.model = Model::two_sample;
  cfg.m = cfg.n;
  EXPECT_THROW(run_coverage(cfg), DomainError);
}

TEST(Subuniformity, NoReplicatesNeverSmall) {
  CoverageConfig cfg;
  cfg.N = 0;
  cfg.R = 100;
  const auto t = run_subuniformity(cfg);
  for (const auto& row : t.rows) EXPECT_EQ(row.ecdf, 0.0);
  EXPECT_TRUE(t.pass());
}

TEST(Subuniformity, TwoSamplePasses) {
  CoverageConfig cfg;
  cfg.model = Model::two_sample;
  cfg.n = 10;
  cfg.m = 5;
  cfg.theta_true = 0.7;
  cfg.N = 99;
  cfg.R = 2000;
  const auto t = run_subuniformity(cfg);
  ASSERT_EQ(t.rows.size(), 5u);
  for (const auto& row : t.rows) EXPECT_TRUE(row.pass) << "threshold " << row.threshold << " ecdf " << row.ecdf;
}

TEST(Subuniformity, BrokenEstimatorFailsAtOnePercent) {
  // Two-point noise makes ties common; a strict inequality without the +1
  // term then rejects far too often.
  CoverageConfig cfg;
  cfg.model = Model::one_sample;
  cfg.n = 6;
  cfg.noise = Noise::two_point;
  cfg.N = 99;
  cfg.R = 2000;
  const auto good = run_subuniformity(cfg);
  const auto bad = run_subuniformity(cfg, broken_pvalue);
  EXPECT_TRUE(good.pass());
  EXPECT_FALSE(bad.rows[0].pass);
  EXPECT_EQ(bad.rows[0].threshold, 0.01);
}
