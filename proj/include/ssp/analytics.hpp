#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "ssp/errors.hpp"
#include "ssp/model.hpp"
#include "ssp/montecarlo.hpp"
#include "ssp/numeric.hpp"

namespace ssp {

// Rank-comparison probabilities in the binomial case: with X's and Y's
// interleaving like fair coin flips, Pr(X^a < Y^b) = Pr(Binom(a+b-1, 1/2) < a).

/// Pr(Binom(n, 1/2) <= m).
inline double binom_tail(std::uint64_t n, std::int64_t m) { return binom_half_cdf(n, m); }

/// Pr(X^a < Y^b) in the binomial case; requires a <= b.
inline double prob_rank_exceeds(std::uint64_t a, std::uint64_t b) {
  if (a < 1 || a > b) throw std::domain_error("prob_rank_exceeds: need 1 <= a <= b");
  return binom_tail(a + b - 1, static_cast<std::int64_t>(a) - 1);
}

/// Pr(Binom(n, 1/2) = x).
inline double binom_half_pmf(std::uint64_t n, std::uint64_t x) {
  if (x > n) return 0.0;
  if (n <= detail::kExactBinomialLimit)
    return std::ldexp(static_cast<double>(detail::exact_choose(n, x)), -static_cast<int>(n));
  return std::exp(log_binom_half_pmf(n, x));
}

/// Pr(X^j > Y^r > X^{j+1}) in the binomial case: C(j+r-1, j) / 2^(j+r).
inline double gap_prob(std::uint64_t j, std::uint64_t r) {
  if (r < 1) throw std::domain_error("gap_prob: need r >= 1");
  return 0.5 * binom_half_pmf(j + r - 1, j);
}

/// C(2r-1, r) / 2^(2r-1).
inline double central_term(std::uint64_t r) { return binom_half_pmf(2 * r - 1, r); }

/// Competitive-ratio lower bound for pricing at the r-th largest sample:
/// (r Pr(Z <= k-1) - r C(2r-1, r)/2^(2r-1)) / k, Z ~ Binom(r+k-1, 1/2).
/// Values <= 0 are returned as-is; the bound is vacuous there.
inline double single_sample_bound(std::uint64_t r, std::uint64_t k) {
  if (r < 1 || r > k) throw std::domain_error("single_sample_bound: need 1 <= r <= k");
  const double rd = static_cast<double>(r);
  const double tail = binom_tail(r + k - 1, static_cast<std::int64_t>(k) - 1);
  return (rd * tail - rd * central_term(r)) / static_cast<double>(k);
}

inline bool is_vacuous(double bound) { return !(bound > 0.0); }

/// The sharper factor (r Pr(Z <= k-1) / k)(1 - C(2r-1, r)/2^(2r-1)). It has
/// no published proof; reported for comparison only.
inline double unproven_bound(std::uint64_t r, std::uint64_t k) {
  if (r < 1 || r > k) throw std::domain_error("unproven_bound: need 1 <= r <= k");
  const double rd = static_cast<double>(r);
  const double tail = binom_tail(r + k - 1, static_cast<std::int64_t>(k) - 1);
  return rd * tail / static_cast<double>(k) * (1.0 - central_term(r));
}

/// max(1, k - ceil(sqrt(2 k ln k))).
inline std::uint64_t recommended_r(std::uint64_t k) {
  if (k < 1) throw std::domain_error("recommended_r: need k >= 1");
  const double kd = static_cast<double>(k);
  const auto shift = static_cast<std::uint64_t>(std::ceil(std::sqrt(2.0 * kd * std::log(kd))));
  return shift >= k ? 1 : std::max<std::uint64_t>(1, k - shift);
}

/// 1 - sqrt(2 ln k / k): the single-sample static-pricing asymptote.
inline double single_sample_asymptote(double k) { return 1.0 - std::sqrt(2.0 * std::log(k) / k); }

/// 1 - sqrt(ln k / k): the full-information static-pricing asymptote.
inline double full_information_asymptote(double k) { return 1.0 - std::sqrt(std::log(k) / k); }

struct ModerateDeviationEstimate {
  double value = 0.0;      // approximation of Pr(Z <= k-1)
  double tail = 0.0;       // 1 - value
  std::uint64_t r = 0;     // k - ceil(sqrt(c k ln k))
  std::uint64_t n = 0;     // r + k - 1
  double n_lambda_sq = 0;  // (k - r - 1)^2 / n
  bool in_asymptotic_regime = false;
};

/// Leading Cramer term for the upper tail of Z ~ Binom(r+k-1, 1/2) beyond
/// k-1, where r = k - ceil(sqrt(c k ln k)):
///   Pr(Z > k-1) ~ exp(-n l^2 / 2) / sqrt(2 pi n l^2),  n l = k - r - 1.
/// The regime flag requires n l^2 >= 4 and n l^3 <= 1.
inline ModerateDeviationEstimate moderate_dev_estimate(std::uint64_t k, double c) {
  if (k < 3) throw std::domain_error("moderate_dev_estimate: need k >= 3");
  if (!(c > 0.0)) throw std::domain_error("moderate_dev_estimate: need c > 0");
  const double kd = static_cast<double>(k);
  const auto shift = static_cast<std::uint64_t>(std::ceil(std::sqrt(c * kd * std::log(kd))));
  if (shift + 1 > k) throw std::domain_error("moderate_dev_estimate: r = k - ceil(sqrt(c k ln k)) < 1");
  ModerateDeviationEstimate est;
  est.r = k - shift;
  est.n = est.r + k - 1;
  const double nd = static_cast<double>(est.n);
  const double n_lambda = static_cast<double>(k - est.r - 1);
  est.n_lambda_sq = n_lambda * n_lambda / nd;
  est.tail = std::exp(-0.5 * est.n_lambda_sq) / std::sqrt(2.0 * std::numbers::pi * est.n_lambda_sq);
  est.value = 1.0 - est.tail;
  const double n_lambda_cube = n_lambda * n_lambda * n_lambda / (nd * nd);
  est.in_asymptotic_regime = est.n_lambda_sq >= 4.0 && n_lambda_cube <= 1.0;
  return est;
}

/// Exact Pr(Z > k-1) for the same Z, for comparison with the estimate.
inline double moderate_dev_exact_tail(const ModerateDeviationEstimate& est, std::uint64_t k) {
  return binom_half_sf(est.n, static_cast<std::int64_t>(k) - 1);
}

struct PoissonFixedPoint {
  std::uint64_t k = 0;
  double lambda = 0.0;
  double ratio = 0.0;     // Pr(X <= k-1) at the fixed point
  double residual = 0.0;  // |E[min(X,k)]/k - Pr(X <= k-1)|
};

/// E[min(X, k)] / k for X ~ Poisson(lambda), using x Pr(X=x) = lambda Pr(X=x-1).
inline double poisson_capped_mean_fraction(std::uint64_t k, double lambda) {
  const auto ki = static_cast<std::int64_t>(k);
  const double kd = static_cast<double>(k);
  return (lambda * poisson_cdf(ki - 2, lambda) + kd * poisson_sf(ki - 1, lambda)) / kd;
}

/// Mean lambda at which E[min(X,k)]/k = Pr(X <= k-1). The left side rises
/// and the right side falls in lambda, so bisection on (0, k] finds the
/// unique crossing.
inline PoissonFixedPoint poisson_optimal_lambda(std::uint64_t k) {
  if (k < 1) throw std::domain_error("poisson_optimal_lambda: need k >= 1");
  const auto ki = static_cast<std::int64_t>(k);
  auto gap = [&](double lambda) { return poisson_capped_mean_fraction(k, lambda) - poisson_cdf(ki - 1, lambda); };
  double lo = 0.0;
  double hi = static_cast<double>(k);
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (gap(mid) < 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  PoissonFixedPoint fp;
  fp.k = k;
  fp.lambda = 0.5 * (lo + hi);
  fp.ratio = poisson_cdf(ki - 1, fp.lambda);
  fp.residual = std::fabs(gap(fp.lambda));
  return fp;
}

struct CdlTerms {
  double price = 0.0;
  std::uint64_t trials = 0;
  double pr_all_below = 0.0;  // Pr(X^k < p)
  double stderr_all_below = 0.0;
  double demand_term = 0.0;  // sum_{i<=k} Pr(X^i >= p) / k
  double stderr_demand = 0.0;
  double min_term = 0.0;
  double stderr_min = 0.0;  // stderr of whichever term attains the minimum
};

/// Monte Carlo estimate of both terms of the deterministic-price guarantee
/// min{Pr(X^k < p), sum_{i<=k} Pr(X^i >= p)/k}, from the same X draws that
/// estimate_ratio uses for the same seed.
inline CdlTerms cdl_ratio(const Instance& instance, double p, const SimConfig& config) {
  validate_config(config);
  if (!std::isfinite(p)) throw config_error("cdl_ratio: price must be finite");
  struct Record {
    double all_below = 0.0;
    double demand = 0.0;
  };
  const std::size_t n = instance.n();
  const std::size_t k = instance.k();
  const auto records = run_indexed<Record>(config.trials, config.threads, [&] {
    return [&](std::uint64_t index) {
      CounterStream stream(config.seed, index);
      std::size_t at_or_above = 0;
      for (std::size_t i = 0; i < n; ++i) at_or_above += sample(instance[i], stream) >= p ? 1 : 0;
      Record rec;
      rec.all_below = at_or_above < k ? 1.0 : 0.0;
      rec.demand = static_cast<double>(std::min(at_or_above, k)) / static_cast<double>(k);
      return rec;
    };
  });
  const auto below = estimate_mean(records, [](const Record& r) { return r.all_below; });
  const auto demand = estimate_mean(records, [](const Record& r) { return r.demand; });
  CdlTerms out;
  out.price = p;
  out.trials = config.trials;
  out.pr_all_below = below.mean;
  out.stderr_all_below = below.stderr_mean;
  out.demand_term = demand.mean;
  out.stderr_demand = demand.stderr_mean;
  const bool below_is_min = below.mean <= demand.mean;
  out.min_term = below_is_min ? below.mean : demand.mean;
  out.stderr_min = below_is_min ? below.stderr_mean : demand.stderr_mean;
  return out;
}

}  // namespace ssp
