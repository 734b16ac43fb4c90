#include <gtest/gtest.h>

#include <cmath>
#include <memory>
#include <vector>

#include "mcinv/interval.hpp"
#include "mcinv/oracle.hpp"

using namespace mcinv;

namespace {

const std::vector<double> kDarwin{49, -67, 8, 6, 16, 23, 28, 41, 14, 29, 56, 24, 75, 60, -48};
const std::vector<double> kFigure1{5, 6, 7, 8, 9, 0, 1, 2, 3, 4};

std::shared_ptr<const FrozenDraws> share(FrozenDraws d) { return std::make_shared<const FrozenDraws>(std::move(d)); }

}  // namespace

TEST(FullGroupIndex, SizesAndGuards) {
  EXPECT_EQ(FullGroupIndex::sign_flips(15).size(), 32768u);
  EXPECT_EQ(FullGroupIndex::assignments(26, 11).size(), 7726160u);
  EXPECT_EQ(FullGroupIndex::assignments(10, 5).size(), 252u);
  EXPECT_THROW(FullGroupIndex::sign_flips(26), TooLargeError);
  EXPECT_THROW(FullGroupIndex::assignments(30, 15), TooLargeError);
  EXPECT_THROW(FullGroupIndex::assignments(5, 5), DomainError);
}

TEST(FullGroupIndex, LexicographicOrder) {
  std::vector<std::vector<std::int8_t>> signs;
  FullGroupIndex::sign_flips(2).for_each_signs(
      [&](std::uint64_t, std::span<const std::int8_t> s) { signs.emplace_back(s.begin(), s.end()); });
  EXPECT_EQ(signs, (std::vector<std::vector<std::int8_t>>{{-1, -1}, {-1, 1}, {1, -1}, {1, 1}}));

  std::vector<std::vector<std::uint8_t>> labels;
  FullGroupIndex::assignments(4, 2).for_each_assignment(
      [&](std::uint64_t, std::span<const std::uint8_t> l) { labels.emplace_back(l.begin(), l.end()); });
  EXPECT_EQ(labels, (std::vector<std::vector<std::uint8_t>>{
                        {1, 1, 0, 0}, {1, 0, 1, 0}, {1, 0, 0, 1}, {0, 1, 1, 0}, {0, 1, 0, 1}, {0, 0, 1, 1}}));
}

TEST(FullGroupIndex, ProbabilitiesMustSumToOne) {
  const auto idx = FullGroupIndex::sign_flips(1);
  EXPECT_NO_THROW(idx.with_probabilities({0.25, 0.75}));
  EXPECT_THROW(idx.with_probabilities({0.25, 0.5}), DomainError);
  EXPECT_THROW(idx.with_probabilities({1.0}), DomainError);
}

TEST(FullGroupPValue, SingleObservation) {
  const OneSampleData data{{1.0}};
  EXPECT_EQ(full_group_pvalue(data, 0.0, Tail::upper, FullGroupIndex::sign_flips(1)), 0.5);
}

TEST(FullGroupPValue, FigureOneAtZero) {
  const TwoSampleData data{kFigure1, 5};
  const auto idx = FullGroupIndex::assignments(10, 5);
  EXPECT_DOUBLE_EQ(full_group_pvalue(data, 0.0, Tail::two_sided_abs, idx), 2.0 / 252.0);
  EXPECT_DOUBLE_EQ(full_group_pvalue(data, 0.0, Tail::upper, idx), 1.0 / 252.0);
}

TEST(FullGroupPValue, NeverZero) {
  const OneSampleData data{kDarwin};
  const auto idx = FullGroupIndex::sign_flips(15);
  EXPECT_GE(full_group_pvalue(data, -1e6, Tail::upper, idx), 1.0 / 32768.0);
  EXPECT_GE(full_group_pvalue(data, 1e6, Tail::lower, idx), 1.0 / 32768.0);
}

TEST(FullGroupPValue, UniformWeightsEqualCounts) {
  const TwoSampleData data{{1.5, 2.0, -0.5, 0.25, 3.0, 1.0}, 3};
  const auto idx = FullGroupIndex::assignments(6, 3);
  const auto weighted = idx.with_probabilities(std::vector<double>(20, 0.05));
  for (double eta = -4; eta <= 4; eta += 0.37) {
    for (auto tail : {Tail::upper, Tail::lower, Tail::two_sided_abs}) {
      EXPECT_NEAR(full_group_pvalue(data, eta, tail, idx), full_group_pvalue(data, eta, tail, weighted), 1e-12);
    }
  }
}

TEST(FullGroupPValue, UpperTailMonotone) {
  const OneSampleData one{{0.3, -1.2, 2.5, 0.7, 1.1, -0.4, 0.9}};
  const TwoSampleData two{{0.3, -1.2, 2.5, 0.7, 1.1, -0.4, 0.9, 1.6}, 3};
  const auto i1 = FullGroupIndex::sign_flips(7);
  const auto i2 = FullGroupIndex::assignments(8, 3);
  double p1 = 0.0, p2 = 0.0;
  for (double eta = -5; eta <= 5; eta += 0.05) {
    const double q1 = full_group_pvalue(one, eta, Tail::upper, i1);
    const double q2 = full_group_pvalue(two, eta, Tail::upper, i2);
    EXPECT_GE(q1, p1);
    EXPECT_GE(q2, p2);
    p1 = q1;
    p2 = q2;
  }
}

TEST(FullGroupInterval, DarwinTable) {
  const OneSampleData data{kDarwin};
  const auto r90 = full_group_interval(data, 0.10);
  EXPECT_DOUBLE_EQ(r90.lower, 3.75);
  EXPECT_NEAR(r90.upper, 38.142857142857, 1e-9);
  const auto r95 = full_group_interval(data, 0.05);
  EXPECT_NEAR(r95.lower, -1.0 / 6.0, 1e-12);
  EXPECT_DOUBLE_EQ(r95.upper, 41.0);
  EXPECT_TRUE(r95.lower_closed);
  EXPECT_TRUE(r95.upper_closed);
  const auto r99 = full_group_interval(data, 0.01);
  EXPECT_DOUBLE_EQ(r99.lower, -9.5);
  EXPECT_DOUBLE_EQ(r99.upper, 47.0);
  EXPECT_EQ(r99.N, 32768u);
}

TEST(FullGroupInterval, SymmetricToyData) {
  const OneSampleData data{{-1.0, 1.0}};
  const auto r = full_group_interval(data, 0.9);
  EXPECT_EQ(r.lower, -r.upper);
}

TEST(FullGroupInterval, EndpointsAgreeWithBruteForcePValue) {
  const TwoSampleData data{{2.1, 3.5, 0.4, 1.9, 2.8, -0.3, 0.6, 1.2, 0.1}, 4};
  const auto idx = FullGroupIndex::assignments(9, 4);
  const double alpha = 0.1;
  const auto r = full_group_interval(data, alpha);
  auto p = [&](double eta) { return full_group_pvalue(data, eta, Tail::two_sided_bonferroni, idx); };
  ASSERT_TRUE(std::isfinite(r.lower) && std::isfinite(r.upper));
  EXPECT_EQ(p(r.lower) >= alpha, r.lower_closed);
  EXPECT_EQ(p(r.upper) >= alpha, r.upper_closed);
  EXPECT_LT(p(std::nextafter(r.lower, -INFINITY) - 1e-9), alpha);
  EXPECT_LT(p(std::nextafter(r.upper, INFINITY) + 1e-9), alpha);
  EXPECT_GE(p(0.5 * (r.lower + r.upper)), alpha);
}

TEST(Breakpoints, ConstantBetweenConsecutive) {
  SeededGenerator gen("bp");
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 3 + uniform_below(gen, 8);
    OneSampleData data;
    for (std::size_t j = 0; j < n; ++j) data.x.push_back(std::round(100.0 * (uniform_unit(gen) - 0.3)) / 10.0);
    const auto draws = share(one_sample_freeze(data, 60, gen.derive(trial)));
    for (auto tail : {Tail::upper, Tail::lower, Tail::two_sided_bonferroni}) {
      const auto p = make_pvalue_fn(data, draws, tail);
      const auto bps = breakpoints(*draws, tail);
      for (std::size_t i = 0; i + 1 < bps.size(); ++i) {
        const double a = bps[i].eta, b = bps[i + 1].eta;
        if (!(b > a)) continue;
        // Tail hits switch on at a threshold (upper) or off just after it
        // (lower); sample strictly inside the gap.
        const double q1 = a + 0.25 * (b - a), q2 = a + 0.5 * (b - a), q3 = a + 0.75 * (b - a);
        if (!(q1 > a && q3 < b)) continue;
        EXPECT_EQ(p(q1), p(q2));
        EXPECT_EQ(p(q2), p(q3));
      }
    }
  }
}

TEST(Breakpoints, OneSampleFormula) {
  const OneSampleData data{{1.0, 2.0, 4.0}};
  FrozenDraws draws = one_sample_freeze(data, 0, SeededGenerator("x"));
  draws.replicates = {one_sample_summary(data.x, std::vector<std::int8_t>{1, -1, 1})};
  const auto bps = breakpoints(draws, Tail::upper);
  ASSERT_EQ(bps.size(), 1u);
  // (7 - 3) / (3 - 1)
  EXPECT_EQ(bps[0].eta, 2.0);
  EXPECT_EQ(bps[0].source, 0u);
}

TEST(BreakpointScan, NoReplicatesWholeLine) {
  const OneSampleData data{kDarwin};
  const auto draws = one_sample_freeze(data, 0, SeededGenerator("x"));
  const auto r = breakpoint_scan_interval(data, draws, 0.05);
  EXPECT_EQ(r.lower, -INFINITY);
  EXPECT_EQ(r.upper, INFINITY);
}

TEST(BreakpointScan, IdentityReplicateTiesEverywhere) {
  const OneSampleData data{{1.0, 2.5, -0.5}};
  FrozenDraws draws = one_sample_freeze(data, 0, SeededGenerator("x"));
  draws.replicates = {draws.observed};
  const auto p = make_pvalue_fn(data, share(draws), Tail::two_sided_bonferroni);
  for (double eta : {-100.0, 0.0, 100.0}) EXPECT_EQ(p(eta), 1.0);
  const auto r = breakpoint_scan_interval(data, draws, 0.5);
  EXPECT_EQ(r.lower, -INFINITY);
  EXPECT_EQ(r.upper, INFINITY);
}

TEST(BreakpointScan, BisectionContainsScanWithinTolerance) {
  SeededGenerator gen("scan");
  for (int trial = 0; trial < 40; ++trial) {
    const bool one_sample = trial % 2 == 0;
    const std::size_t n = 4 + uniform_below(gen, 9);
    std::vector<double> v(n);
    for (auto& x : v) x = 10.0 * uniform_unit(gen) - 3.0;
    const auto N = 50 + uniform_below(gen, 300);
    IntervalOptions opt;
    opt.alpha = 0.1;
    opt.tol = 1e-7;
    ConfidenceResult bis, exact;
    if (one_sample) {
      const OneSampleData data{v};
      const auto draws = share(one_sample_freeze(data, N, gen.derive(trial)));
      bis = confidence_interval(data, draws, opt);
      exact = breakpoint_scan_interval(*draws, opt.alpha);
    } else {
      const TwoSampleData data{v, n / 2};
      const auto draws = share(two_sample_freeze(data, N, gen.derive(trial)));
      bis = confidence_interval(data, draws, opt);
      exact = breakpoint_scan_interval(*draws, opt.alpha);
    }
    EXPECT_LE(bis.lower, exact.lower);
    EXPECT_GE(bis.lower, exact.lower - opt.tol);
    EXPECT_GE(bis.upper, exact.upper);
    EXPECT_LE(bis.upper, exact.upper + opt.tol);
  }
}

TEST(BreakpointScan, AbsConventionMatchesGridScan) {
  const TwoSampleData data{kFigure1, 5};
  const auto draws = share(two_sample_freeze(data, 400, SeededGenerator("abs")));
  const auto p = make_pvalue_fn(data, draws, Tail::two_sided_abs);
  const auto r = breakpoint_scan_interval(*draws, 0.05, Side::two_sided, Convention::abs);
  double lo = INFINITY, hi = -INFINITY;
  for (int i = 0; i <= 16000; ++i) {
    const double eta = -2.0 + i * 0.001;
    if (p(eta) >= 0.05) {
      lo = std::min(lo, eta);
      hi = std::max(hi, eta);
    }
  }
  EXPECT_LE(r.lower, lo);
  EXPECT_GT(r.lower, lo - 0.001 - 1e-9);
  EXPECT_GE(r.upper, hi);
  EXPECT_LT(r.upper, hi + 0.001 + 1e-9);
}

TEST(BreakpointScan, SizeGuard) {
  FrozenDraws draws;
  draws.replicates.resize((std::size_t{1} << 20) + 1);
  EXPECT_THROW(breakpoint_scan_interval(draws, 0.05), TooLargeError);
}
