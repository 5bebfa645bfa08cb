#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "ssp/montecarlo.hpp"

using namespace ssp;

namespace {

const Instance kSingleUniform = Instance::iid(Uniform{0.0, 1.0}, 1, 1);

void expect_report_sane(const SimReport& rep) {
  EXPECT_EQ(std::accumulate(rep.pick_histogram.begin(), rep.pick_histogram.end(), std::uint64_t{0}), rep.trials);
  EXPECT_EQ(rep.pick_histogram.size(), rep.k + 1);
  EXPECT_GE(rep.ratio, 0.0);
  EXPECT_LE(rep.ratio, 1.0 + 3.0 * rep.stderr_ratio);
  EXPECT_LE(rep.ci_lo, rep.ratio);
  EXPECT_GE(rep.ci_hi, rep.ratio);
}

}  // namespace

TEST(MonteCarlo, SingleBuyerClosedForm) {
  // E[X 1{X > Y}] = 1/3 and E[X] = 1/2 for X, Y ~ U(0,1).
  const auto rep = estimate_ratio(kSingleUniform, SampleOrderStatistic{1}, {1000000, 2024, 0.99, 0});
  expect_report_sane(rep);
  EXPECT_NEAR(rep.ratio, 2.0 / 3.0, 3.0 * rep.stderr_ratio);
  EXPECT_NEAR(rep.mean_prophet, 0.5, 0.002);
  EXPECT_NEAR(rep.mean_alg, 1.0 / 3.0, 0.002);
}

TEST(MonteCarlo, FixedPriceZeroWithFullCapacityIsExactlyOne) {
  for (const auto& inst : {Instance::iid(Uniform{0.0, 1.0}, 5, 5), Instance::iid(Exponential{0.5}, 3, 3),
                           Instance({Pareto{1.0, 3.0}, Uniform{2.0, 3.0}}, 2)}) {
    const auto rep = estimate_ratio(inst, FixedPrice{0.0}, {5000, 3, 0.99, 1});
    EXPECT_EQ(rep.ratio, 1.0);
    EXPECT_EQ(rep.mean_alg, rep.mean_prophet);
    EXPECT_EQ(rep.pick_histogram.back(), 5000u);
  }
}

TEST(MonteCarlo, HalfGuaranteeUniformTwentyBuyers) {
  const auto rep = estimate_ratio(Instance::iid(Uniform{0.0, 1.0}, 20, 3), SampleOrderStatistic{3},
                                  {100000, 7, 0.99, 0});
  expect_report_sane(rep);
  EXPECT_GE(rep.ratio, 0.5 - 3.0 * rep.stderr_ratio);
}

TEST(MonteCarlo, DeterministicAcrossThreadCounts) {
  const auto inst = Instance({Uniform{0.0, 1.0}, Exponential{1.0}, Pareto{1.0, 2.5}, Uniform{0.5, 0.7},
                              SpikeMixture::at(0.0, 1.0, 50.0, 0.02)},
                             2);
  for (const PricePolicy& policy : {PricePolicy{SampleOrderStatistic{2}}, PricePolicy{ExpectedDemandPrice{1.5}},
                                    PricePolicy{FixedPrice{0.8}}}) {
    const auto one = estimate_ratio(inst, policy, {20011, 99, 0.99, 1});
    EXPECT_EQ(one, estimate_ratio(inst, policy, {20011, 99, 0.99, 1}));
    EXPECT_EQ(one, estimate_ratio(inst, policy, {20011, 99, 0.99, 8}));
    EXPECT_EQ(one, estimate_ratio(inst, policy, {20011, 99, 0.99, 3}));
    EXPECT_EQ(one, estimate_ratio(inst, policy, {20011, 99, 0.99, 0}));
  }
}

TEST(MonteCarlo, DifferentSeedsDiffer) {
  const auto a = estimate_ratio(kSingleUniform, SampleOrderStatistic{1}, {1000, 1, 0.99, 1});
  const auto b = estimate_ratio(kSingleUniform, SampleOrderStatistic{1}, {1000, 2, 0.99, 1});
  EXPECT_NE(a.mean_alg, b.mean_alg);
}

TEST(MonteCarlo, ConfidenceIntervalCoverage) {
  int covered = 0;
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    const auto rep = estimate_ratio(kSingleUniform, SampleOrderStatistic{1}, {20000, seed * 7919, 0.99, 1});
    covered += (rep.ci_lo <= 2.0 / 3.0 && 2.0 / 3.0 <= rep.ci_hi) ? 1 : 0;
  }
  EXPECT_GE(covered, 95);
}

TEST(MonteCarlo, FullSalesGrowWithR) {
  const auto inst = Instance::iid(Uniform{0.0, 1.0}, 20, 3);
  std::uint64_t prev = 0;
  for (std::size_t r = 1; r <= 10; ++r) {
    const auto rep = estimate_ratio(inst, SampleOrderStatistic{r}, {100000, 5, 0.99, 0});
    EXPECT_GT(rep.pick_histogram.back(), prev) << r;
    prev = rep.pick_histogram.back();
  }
}

TEST(MonteCarlo, SweepRowsAndSeeds) {
  const auto single = sweep_r(Instance::iid(Uniform{0.0, 1.0}, 4, 1), {500, 9, 0.99, 1});
  ASSERT_EQ(single.size(), 1u);
  EXPECT_EQ(single[0].r, 1u);

  const auto inst = Instance::iid(Exponential{1.0}, 6, 3);
  const auto rows = sweep_r(inst, {2000, 10, 0.99, 1});
  ASSERT_EQ(rows.size(), 3u);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    EXPECT_EQ(rows[i].r, i + 1);
    EXPECT_EQ(rows[i].report.seed, 10u ^ (i + 1));
    EXPECT_EQ(rows[i].report, estimate_ratio(inst, SampleOrderStatistic{i + 1}, {2000, 10u ^ (i + 1), 0.99, 1}));
  }
  EXPECT_EQ(rows.size(), sweep_r(inst, {2000, 10, 0.99, 4}).size());
  const auto again = sweep_r(inst, {2000, 10, 0.99, 4});
  for (std::size_t i = 0; i < rows.size(); ++i) EXPECT_EQ(rows[i].report, again[i].report);
  EXPECT_EQ(sweep_r(inst, {100, 1, 0.99, 1}, 6).size(), 6u);
  EXPECT_THROW(sweep_r(inst, {100, 1, 0.99, 1}, 7), config_error);
}

TEST(MonteCarlo, UniformLargeCapacityFavorsRAtK) {
  // On i.i.d. uniforms with n = 2k every buyer above the median is worth
  // about the same, so the lowest price in the sweep (r = k) sells the most
  // and wins; the hedge of a smaller r only pays on spiked families.
  const auto inst = Instance::iid(Uniform{0.0, 1.0}, 200, 100);
  const auto rows = sweep_r(inst, {2000, 21, 0.99, 0});
  const auto best = std::max_element(rows.begin(), rows.end(),
                                     [](const SweepRow& a, const SweepRow& b) { return a.report.ratio < b.report.ratio; });
  EXPECT_EQ(best->r, 100u);
  EXPECT_GT(rows[99].report.ratio, rows[68].report.ratio + 0.1);
}

TEST(MonteCarlo, ConfigAndNumericErrors) {
  EXPECT_THROW(estimate_ratio(kSingleUniform, SampleOrderStatistic{1}, {0, 1, 0.99, 1}), config_error);
  EXPECT_THROW(estimate_ratio(kSingleUniform, SampleOrderStatistic{1}, {10, 1, 1.0, 1}), config_error);
  EXPECT_THROW(estimate_ratio(kSingleUniform, SampleOrderStatistic{2}, {10, 1, 0.99, 1}), config_error);

  const std::vector<TrialRecord> zeros(5);
  auto alg = [](const TrialRecord& r) { return r.alg; };
  auto prophet = [](const TrialRecord& r) { return r.prophet; };
  EXPECT_THROW(estimate_ratio_of_means(zeros, alg, prophet), numeric_error);
  std::vector<TrialRecord> inf(3, TrialRecord{1.0, 1.0, 1, 0});
  inf[1].prophet = INFINITY;
  EXPECT_THROW(estimate_ratio_of_means(inf, alg, prophet), numeric_error);
}

TEST(MonteCarlo, DeltaMethodStandardError) {
  // Hand-computed: A = {1, 2, 3}, P = {2, 2, 2}: R = 1, residuals {-1, 0, 1}.
  std::vector<TrialRecord> recs{{1.0, 2.0, 1, 0}, {2.0, 2.0, 1, 0}, {3.0, 2.0, 1, 0}};
  const auto est = estimate_ratio_of_means(
      recs, [](const TrialRecord& r) { return r.alg; }, [](const TrialRecord& r) { return r.prophet; });
  EXPECT_DOUBLE_EQ(est.ratio, 1.0);
  EXPECT_DOUBLE_EQ(est.stderr_ratio, 1.0 / (2.0 * std::sqrt(3.0)));
  EXPECT_NEAR(critical_value(0.99), 2.5758293035489004, 1e-12);
}
