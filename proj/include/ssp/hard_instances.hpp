#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "ssp/errors.hpp"
#include "ssp/market.hpp"
#include "ssp/model.hpp"
#include "ssp/montecarlo.hpp"

namespace ssp {

// Adversarial families. Every family below puts many nearly equal buyers in
// [1 - delta, 1]; the spike families add a last buyer who is worth about N^2
// with probability 1/N, which punishes prices low enough to sell out early.

struct HardInstanceParams {
  std::size_t n = 2;
  std::size_t k = 1;
  double delta = 1e-3;
  double spike_scale = 2.0;  // N: spike near N^2 with probability 1/N
  double spike_width = 4e-6;

  /// The n-buyer family with spike n^2 at probability 1/n.
  static HardInstanceParams half_tight(std::size_t n, std::size_t k, double delta) {
    const auto nd = static_cast<double>(n);
    return {n, k, delta, nd, SpikeMixture::kDefaultRelativeWidth * nd * nd};
  }
};

inline void validate_params(const HardInstanceParams& p) {
  if (p.n < 2) throw config_error("hard instance: need n >= 2");
  if (p.k < 1 || p.k > p.n) throw config_error("hard instance: need 1 <= k <= n");
  if (!(p.delta > 0.0 && p.delta < 1.0)) throw config_error("hard instance: need 0 < delta < 1");
  if (!(p.spike_scale * p.spike_scale > 1.0)) throw config_error("hard instance: need spike_scale^2 > 1");
  if (!(p.spike_width > 0.0)) throw config_error("hard instance: need spike_width > 0");
}

/// n-1 buyers Uniform(1-delta, 1) followed by one buyer with the same base
/// and a spike at spike_scale^2 of probability 1/spike_scale.
inline Instance spike_instance(const HardInstanceParams& p) {
  validate_params(p);
  const double base_lo = 1.0 - p.delta;
  const double spike_lo = p.spike_scale * p.spike_scale;
  std::vector<DistributionSpec> dists(p.n - 1, Uniform{base_lo, 1.0});
  dists.emplace_back(SpikeMixture{base_lo, 1.0, spike_lo, spike_lo + p.spike_width, 1.0 / p.spike_scale});
  return Instance(std::move(dists), p.k);
}

/// Family showing that pricing at the k-th sample cannot beat 1/2: caller
/// sets spike_scale = n (see HardInstanceParams::half_tight).
inline Instance half_tight_instance(const HardInstanceParams& p) { return spike_instance(p); }

/// Uniform(v - radius, v + radius) per value; intervals must be disjoint, so
/// every buyer's draw and sample sit in the same narrow band.
inline Instance disjoint_support_instance(std::span<const double> values, double radius, std::size_t k) {
  if (!(radius > 0.0)) throw config_error("disjoint support: need radius > 0");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t i = 1; i < sorted.size(); ++i)
    if (!(sorted[i] - sorted[i - 1] > 2.0 * radius)) throw config_error("disjoint support: intervals overlap");
  std::vector<DistributionSpec> dists;
  dists.reserve(values.size());
  for (double v : values) dists.emplace_back(Uniform{v - radius, v + radius});
  return Instance(std::move(dists), k);
}

/// s = k - ceil(sqrt((2 - epsilon/2) k ln k)).
inline std::ptrdiff_t tightness_threshold(std::size_t k, double epsilon) {
  const double kd = static_cast<double>(k);
  const double shift = std::ceil(std::sqrt((2.0 - 0.5 * epsilon) * kd * std::log(kd)));
  return static_cast<std::ptrdiff_t>(k) - static_cast<std::ptrdiff_t>(shift);
}

/// Largest base width the tightness argument allows: epsilon / (16 sqrt k).
inline double tightness_delta(std::size_t k, double epsilon) {
  return epsilon / (16.0 * std::sqrt(static_cast<double>(k)));
}

inline Instance tightness_instance(std::size_t k, double epsilon, std::size_t n, double spike_scale) {
  return spike_instance({n, k, tightness_delta(k, epsilon), spike_scale,
                         SpikeMixture::kDefaultRelativeWidth * spike_scale * spike_scale});
}

struct HardInstanceReport {
  SimReport sim;
  std::size_t s = 0;
  double capacity_exhaust_prob = 0.0;  // Pr(at least s sales among buyers 1..n-1)
  double stderr_capacity = 0.0;
};

/// Runs the policy and also measures how often s units are gone before the
/// last buyer arrives.
inline HardInstanceReport run_hard_instance(const Instance& instance, const PricePolicy& policy, std::size_t s,
                                            const SimConfig& config) {
  const auto records = simulate_trials(instance, policy, config);
  HardInstanceReport out;
  out.sim = summarize(records, instance, policy, config);
  out.s = s;
  const auto exhaust = estimate_mean(
      records, [s](const TrialRecord& r) { return r.picks_before_last >= s ? 1.0 : 0.0; });
  out.capacity_exhaust_prob = exhaust.mean;
  out.stderr_capacity = exhaust.stderr_mean;
  return out;
}

/// Spike family with delta = epsilon/(16 sqrt k) and spike N^2 at
/// probability 1/N, priced by `policy`.
inline HardInstanceReport tightness_experiment(std::size_t k, double epsilon, std::size_t n, double spike_scale,
                                               const PricePolicy& policy, const SimConfig& config) {
  if (!(epsilon > 0.0 && epsilon < 4.0)) throw config_error("tightness: need 0 < epsilon < 4");
  if (k < 2) throw config_error("tightness: need k >= 2");
  const auto s = tightness_threshold(k, epsilon);
  if (s < 1) throw config_error("tightness: k too small, s = k - ceil(sqrt((2 - eps/2) k ln k)) < 1");
  return run_hard_instance(tightness_instance(k, epsilon, n, spike_scale), policy, static_cast<std::size_t>(s),
                           config);
}

}  // namespace ssp
