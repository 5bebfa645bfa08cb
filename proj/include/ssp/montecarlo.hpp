#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "ssp/errors.hpp"
#include "ssp/market.hpp"
#include "ssp/model.hpp"
#include "ssp/numeric.hpp"
#include "ssp/parallel.hpp"
#include "ssp/rng.hpp"

namespace ssp {

struct SimConfig {
  std::uint64_t trials = 10000;
  std::uint64_t seed = 1;
  double ci_level = 0.99;
  unsigned threads = 1;  // 0 picks std::thread::hardware_concurrency()
};

inline void validate_config(const SimConfig& config) {
  if (config.trials < 1) throw config_error("trials must be >= 1");
  if (!(config.ci_level > 0.0 && config.ci_level < 1.0)) throw config_error("ci_level must lie in (0, 1)");
}

/// Outcome of one simulated market.
struct TrialRecord {
  double alg = 0.0;
  double prophet = 0.0;
  std::uint32_t picks = 0;
  std::uint32_t picks_before_last = 0;  // sales to buyers 1..n-1
};

struct SimReport {
  std::size_t n = 0;
  std::size_t k = 0;
  std::string rule;
  std::uint64_t trials = 0;
  std::uint64_t seed = 0;
  double ci_level = 0.0;
  double mean_alg = 0.0;
  double mean_prophet = 0.0;
  double ratio = 0.0;
  double stderr_ratio = 0.0;
  double ci_lo = 0.0;
  double ci_hi = 0.0;
  std::vector<std::uint64_t> pick_histogram;  // index = number of picks, 0..k

  bool operator==(const SimReport&) const = default;
};

/// Draws X_1..X_n and then Y_1..Y_n from the trial's stream, prices from the
/// Y's, and sells against the X's in arrival order.
inline std::vector<TrialRecord> simulate_trials(const Instance& instance, const PricePolicy& policy,
                                                const SimConfig& config) {
  validate_config(config);
  validate_policy(policy, instance);
  const std::size_t n = instance.n();
  const std::size_t k = instance.k();
  const bool sample_free = is_sample_free(policy);
  const double static_price = sample_free ? resolve_price(policy, std::vector<double>(n, 0.0), instance) : 0.0;

  return run_indexed<TrialRecord>(config.trials, config.threads, [&] {
    return [&, x = std::vector<double>(n), y = std::vector<double>(n),
            scratch = std::vector<double>()](std::uint64_t index) mutable {
      CounterStream stream(config.seed, index);
      for (std::size_t i = 0; i < n; ++i) x[i] = sample(instance[i], stream);
      for (std::size_t i = 0; i < n; ++i) y[i] = sample(instance[i], stream);
      const double price = sample_free ? static_price : resolve_price(policy, y, instance, scratch);
      TrialRecord rec;
      sell_in_order(price, x, k, [&](std::size_t i, double v) {
        rec.alg += v;
        ++rec.picks;
        if (i + 1 < n) ++rec.picks_before_last;
      });
      rec.prophet = prophet_value(x, k, scratch);
      return rec;
    };
  });
}

/// Ratio of means with a first-order delta-method standard error:
/// se(A/P) = sd(A_t - R P_t) / (mean(P) sqrt(T)).
struct RatioEstimate {
  double mean_num = 0.0;
  double mean_den = 0.0;
  double ratio = 0.0;
  double stderr_ratio = 0.0;
};

template <class Records, class Num, class Den>
RatioEstimate estimate_ratio_of_means(const Records& records, Num&& num, Den&& den) {
  const auto trials = static_cast<double>(records.size());
  CompensatedSum sum_num;
  CompensatedSum sum_den;
  for (const auto& rec : records) {
    const double a = num(rec);
    const double p = den(rec);
    if (!std::isfinite(a) || !std::isfinite(p)) throw numeric_error("non-finite value in trial record");
    sum_num.add(a);
    sum_den.add(p);
  }
  RatioEstimate est;
  est.mean_num = sum_num.value() / trials;
  est.mean_den = sum_den.value() / trials;
  if (!(est.mean_den != 0.0) || !std::isfinite(est.mean_num) || !std::isfinite(est.mean_den))
    throw numeric_error("ratio undefined: mean denominator is zero or non-finite");
  est.ratio = est.mean_num / est.mean_den;
  if (records.size() > 1) {
    CompensatedSum resid;
    for (const auto& rec : records) {
      const double d = num(rec) - est.ratio * den(rec);
      resid.add(d * d);
    }
    est.stderr_ratio = std::sqrt(resid.value() / (trials - 1.0)) / (std::fabs(est.mean_den) * std::sqrt(trials));
  }
  if (!std::isfinite(est.ratio) || !std::isfinite(est.stderr_ratio))
    throw numeric_error("non-finite ratio estimate");
  return est;
}

/// Two-sided normal critical value for a confidence level.
inline double critical_value(double ci_level) { return normal_quantile(0.5 + 0.5 * ci_level); }

/// Mean and standard error of a per-trial quantity.
struct MeanEstimate {
  double mean = 0.0;
  double stderr_mean = 0.0;
};

template <class Records, class Fn>
MeanEstimate estimate_mean(const Records& records, Fn&& value) {
  const auto trials = static_cast<double>(records.size());
  CompensatedSum sum;
  for (const auto& rec : records) sum.add(value(rec));
  MeanEstimate est;
  est.mean = sum.value() / trials;
  if (records.size() > 1) {
    CompensatedSum sq;
    for (const auto& rec : records) {
      const double d = value(rec) - est.mean;
      sq.add(d * d);
    }
    est.stderr_mean = std::sqrt(sq.value() / (trials - 1.0) / trials);
  }
  if (!std::isfinite(est.mean) || !std::isfinite(est.stderr_mean)) throw numeric_error("non-finite mean estimate");
  return est;
}

inline SimReport summarize(const std::vector<TrialRecord>& records, const Instance& instance,
                           const PricePolicy& policy, const SimConfig& config) {
  SimReport report;
  report.n = instance.n();
  report.k = instance.k();
  report.rule = policy_label(policy);
  report.trials = records.size();
  report.seed = config.seed;
  report.ci_level = config.ci_level;
  const auto est = estimate_ratio_of_means(
      records, [](const TrialRecord& r) { return r.alg; }, [](const TrialRecord& r) { return r.prophet; });
  report.mean_alg = est.mean_num;
  report.mean_prophet = est.mean_den;
  report.ratio = est.ratio;
  report.stderr_ratio = est.stderr_ratio;
  const double z = critical_value(config.ci_level);
  report.ci_lo = est.ratio - z * est.stderr_ratio;
  report.ci_hi = est.ratio + z * est.stderr_ratio;
  report.pick_histogram.assign(instance.k() + 1, 0);
  for (const auto& rec : records) ++report.pick_histogram[rec.picks];
  return report;
}

/// Monte Carlo estimate of E[ALG] / E[sum of the k largest X].
inline SimReport estimate_ratio(const Instance& instance, const PricePolicy& policy, const SimConfig& config) {
  return summarize(simulate_trials(instance, policy, config), instance, policy, config);
}

struct SweepRow {
  std::size_t r = 0;
  SimReport report;
};

/// One estimate per r = 1..r_max (r_max = 0 means k), row r seeded with seed ^ r.
inline std::vector<SweepRow> sweep_r(const Instance& instance, const SimConfig& config, std::size_t r_max = 0) {
  if (r_max == 0) r_max = instance.k();
  if (r_max > instance.n()) throw config_error("sweep_r: r_max exceeds n");
  std::vector<SweepRow> rows;
  rows.reserve(r_max);
  for (std::size_t r = 1; r <= r_max; ++r) {
    SimConfig row_config = config;
    row_config.seed = config.seed ^ static_cast<std::uint64_t>(r);
    rows.push_back({r, estimate_ratio(instance, SampleOrderStatistic{r}, row_config)});
  }
  return rows;
}

}  // namespace ssp
