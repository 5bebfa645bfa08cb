#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "ssp/analytics.hpp"
#include "ssp/hard_instances.hpp"

using namespace ssp;

TEST(HardInstances, HalfTightShape) {
  const auto inst = half_tight_instance(HardInstanceParams::half_tight(10, 1, 0.01));
  ASSERT_EQ(inst.n(), 10u);
  EXPECT_EQ(inst.k(), 1u);
  for (std::size_t i = 0; i < 9; ++i) {
    ASSERT_TRUE(inst[i].holds<Uniform>());
    EXPECT_DOUBLE_EQ(inst[i].as<Uniform>().lo, 0.99);
    EXPECT_EQ(inst[i].as<Uniform>().hi, 1.0);
  }
  ASSERT_TRUE(inst[9].holds<SpikeMixture>());
  const auto& spike = inst[9].as<SpikeMixture>();
  EXPECT_EQ(spike.spike_lo, 100.0);
  EXPECT_NEAR(spike.spike_hi, 100.0, 1e-3);
  EXPECT_DOUBLE_EQ(spike.spike_prob, 0.1);
}

TEST(HardInstances, ParameterValidation) {
  EXPECT_THROW(half_tight_instance({10, 1, 0.0, 10.0, 1e-4}), config_error);
  EXPECT_THROW(half_tight_instance({10, 1, 1.0, 10.0, 1e-4}), config_error);
  EXPECT_THROW(half_tight_instance({10, 1, 0.1, 1.0, 1e-4}), config_error);
  EXPECT_THROW(half_tight_instance({10, 1, 0.1, 10.0, 0.0}), config_error);
  EXPECT_THROW(half_tight_instance({10, 11, 0.1, 10.0, 1e-4}), config_error);
}

TEST(HardInstances, HalfTightProphetMean) {
  const std::size_t n = 50;
  const std::size_t k = 3;
  const double delta = 1e-3;
  const auto inst = half_tight_instance(HardInstanceParams::half_tight(n, k, delta));
  const auto rep = estimate_ratio(inst, SampleOrderStatistic{k}, {200000, 8, 0.99, 0});
  const double nd = static_cast<double>(n);
  const double kd = static_cast<double>(k);
  // Spike contributes n^2 / n; the other k - 1 (or k without spike) slots sit in [1 - delta, 1].
  const double approx = nd + (kd - kd / nd) * (1.0 - delta / 2.0);
  const double spike_sd = nd * nd * std::sqrt((1.0 / nd) * (1.0 - 1.0 / nd) / 200000.0);
  EXPECT_NEAR(rep.mean_prophet, approx, 4.0 * spike_sd + kd * delta);
}

TEST(HardInstances, HalfTightRatioNearHalfForLargeN) {
  const auto inst = half_tight_instance(HardInstanceParams::half_tight(400, 3, 1e-3));
  const auto rep = estimate_ratio(inst, SampleOrderStatistic{3}, {100000, 2024, 0.99, 0});
  EXPECT_LE(rep.ratio, 0.56);
  EXPECT_GE(rep.ratio, 0.5 - 3.0 * rep.stderr_ratio);
}

TEST(HardInstances, DisjointSupport) {
  const std::vector<double> values{0.991, 0.993, 0.995};
  const auto inst = disjoint_support_instance(values, 1e-4, 2);
  ASSERT_EQ(inst.n(), 3u);
  EXPECT_DOUBLE_EQ(inst[1].as<Uniform>().lo, 0.993 - 1e-4);
  EXPECT_THROW(disjoint_support_instance(values, 1.5e-3, 2), config_error);
  EXPECT_THROW(disjoint_support_instance(std::vector<double>{0.5, 0.5}, 1e-4, 1), config_error);
  EXPECT_THROW(disjoint_support_instance(values, 0.0, 2), config_error);

  const auto rep = estimate_ratio(inst, SampleOrderStatistic{2}, {10000, 3, 0.99, 1});
  EXPECT_NEAR(rep.mean_prophet, 0.993 + 0.995, 2.0 * 1e-4);
  // Price lands inside the middle band: the top buyer always buys, the
  // middle buyer buys iff their draw beats their own sample.
  EXPECT_EQ(rep.pick_histogram[0], 0u);
  EXPECT_NEAR(static_cast<double>(rep.pick_histogram[2]) / 10000.0, 0.5, 0.02);
  EXPECT_EQ(rep.pick_histogram[1] + rep.pick_histogram[2], 10000u);
}

TEST(HardInstances, TightnessParameters) {
  EXPECT_EQ(tightness_threshold(100, 0.1), 100 - 30);
  EXPECT_LE(tightness_delta(100, 0.1), 0.1 / (16.0 * std::sqrt(100.0)));
  EXPECT_THROW(tightness_experiment(3, 0.1, 100, 10.0, SampleOrderStatistic{3}, {}), config_error);
  EXPECT_THROW(tightness_experiment(100, 0.0, 1000, 10.0, SampleOrderStatistic{3}, {}), config_error);
}

TEST(HardInstances, TightnessExperiment) {
  const std::size_t k = 100;
  const SimConfig config{10000, 2024, 0.99, 0};
  const auto at_k = tightness_experiment(k, 0.1, 10000, 1000.0, SampleOrderStatistic{k}, config);
  EXPECT_EQ(at_k.s, 70u);
  EXPECT_LT(at_k.sim.ratio, single_sample_asymptote(100.0) + 0.05);

  const auto at_rec = tightness_experiment(k, 0.1, 10000, 1000.0, SampleOrderStatistic{recommended_r(k)}, config);
  const double joint = std::hypot(at_k.sim.stderr_ratio, at_rec.sim.stderr_ratio);
  EXPECT_GE(at_rec.sim.ratio, at_k.sim.ratio - 3.0 * joint);

  const auto bigger_spike = tightness_experiment(k, 0.1, 10000, 10000.0, SampleOrderStatistic{k}, config);
  EXPECT_LT(bigger_spike.sim.ratio, at_k.sim.ratio);
}

TEST(HardInstances, CapacityExhaustionGrowsWithR) {
  const auto inst = tightness_instance(100, 0.1, 2000, 100.0);
  double prev = -1.0;
  for (std::size_t r : {40u, 60u, 69u, 80u, 100u, 120u}) {
    const auto rep = run_hard_instance(inst, SampleOrderStatistic{r}, 70, {4000, 6, 0.99, 0});
    EXPECT_GE(rep.capacity_exhaust_prob, prev) << r;
    prev = rep.capacity_exhaust_prob;
  }
}
