#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <type_traits>
#include <variant>
#include <vector>

#include "ssp/errors.hpp"
#include "ssp/format.hpp"
#include "ssp/model.hpp"

namespace ssp {

// Price rules. Each maps the sample vector (one draw per buyer) to a single
// static price posted before any buyer arrives.

/// Price at the r-th largest sample (r = 1 is the maximum).
struct SampleOrderStatistic {
  std::size_t r = 1;
  bool operator==(const SampleOrderStatistic&) const = default;
};

struct FixedPrice {
  double p = 0.0;
  bool operator==(const FixedPrice&) const = default;
};

/// Full-information baseline: the price T with sum_i Pr(X_i > T) = q.
struct ExpectedDemandPrice {
  double q = 1.0;
  bool operator==(const ExpectedDemandPrice&) const = default;
};

using PricePolicy = std::variant<SampleOrderStatistic, FixedPrice, ExpectedDemandPrice>;

/// True when the price ignores the samples.
inline bool is_sample_free(const PricePolicy& policy) {
  return !std::holds_alternative<SampleOrderStatistic>(policy);
}

/// Short label used in report rows: "3" for r = 3, "fixed=0.7", "demand=5".
inline std::string policy_label(const PricePolicy& policy) {
  return std::visit(
      [](const auto& rule) -> std::string {
        using T = std::decay_t<decltype(rule)>;
        if constexpr (std::is_same_v<T, SampleOrderStatistic>) return std::to_string(rule.r);
        else if constexpr (std::is_same_v<T, FixedPrice>) return "fixed=" + format_double(rule.p);
        else return "demand=" + format_double(rule.q);
      },
      policy);
}

inline void validate_policy(const PricePolicy& policy, const Instance& instance) {
  std::visit(
      [&](const auto& rule) {
        using T = std::decay_t<decltype(rule)>;
        if constexpr (std::is_same_v<T, SampleOrderStatistic>) {
          if (rule.r < 1 || rule.r > instance.n())
            throw config_error("sample_order_statistic: need 1 <= r <= n (r=" + std::to_string(rule.r) +
                               ", n=" + std::to_string(instance.n()) + ")");
        } else if constexpr (std::is_same_v<T, FixedPrice>) {
          if (!std::isfinite(rule.p) || rule.p < 0.0) throw config_error("fixed_price: need finite p >= 0");
        } else {
          const auto n = static_cast<double>(instance.n());
          if (!(rule.q > 0.0 && rule.q < n))
            throw config_error("expected_demand_price: need 0 < q < n (demand is unreachable otherwise)");
        }
      },
      policy);
}

/// r-th largest entry (1-based). `scratch` is overwritten.
inline double kth_largest(std::span<const double> values, std::size_t r, std::vector<double>& scratch) {
  scratch.assign(values.begin(), values.end());
  auto nth = scratch.begin() + static_cast<std::ptrdiff_t>(r - 1);
  std::nth_element(scratch.begin(), nth, scratch.end(), std::greater<>{});
  return *nth;
}

inline double kth_largest(std::span<const double> values, std::size_t r) {
  std::vector<double> scratch;
  return kth_largest(values, r, scratch);
}

/// Expected number of buyers above `price`: sum_i (1 - F_i(price)).
inline double expected_demand(const Instance& instance, double price) {
  double demand = 0.0;
  for (const auto& d : instance.dists()) demand += 1.0 - cdf(d, price);
  return demand;
}

/// Solves expected_demand(T) = q by bisection. The bracket runs from the
/// lowest support point to the highest; unbounded families are capped at the
/// quantile where their combined tail mass is below q/2.
inline double solve_demand_price(const Instance& instance, double q) {
  const auto n = static_cast<double>(instance.n());
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  const double tail = q / (2.0 * n);
  for (const auto& d : instance.dists()) {
    lo = std::min(lo, support_lower(d));
    const double up = support_upper(d);
    hi = std::max(hi, std::isfinite(up) ? up : quantile(d, 1.0 - tail));
  }
  for (int it = 0; it < 200 && hi - lo > 1e-12; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (expected_demand(instance, mid) > q) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

inline double resolve_price(const PricePolicy& policy, std::span<const double> samples, const Instance& instance,
                            std::vector<double>& scratch) {
  if (samples.size() != instance.n())
    throw config_error("resolve_price: expected " + std::to_string(instance.n()) + " samples, got " +
                       std::to_string(samples.size()));
  validate_policy(policy, instance);
  return std::visit(
      [&](const auto& rule) -> double {
        using T = std::decay_t<decltype(rule)>;
        if constexpr (std::is_same_v<T, SampleOrderStatistic>) {
          return kth_largest(samples, rule.r, scratch);
        } else if constexpr (std::is_same_v<T, FixedPrice>) {
          return rule.p;
        } else {
          return solve_demand_price(instance, rule.q);
        }
      },
      policy);
}

inline double resolve_price(const PricePolicy& policy, std::span<const double> samples, const Instance& instance) {
  std::vector<double> scratch;
  return resolve_price(policy, samples, instance, scratch);
}

struct MarketOutcome {
  double alg_value = 0.0;
  std::size_t picks = 0;
  std::vector<std::size_t> accepted_indices;
  double prophet_value = 0.0;
};

/// Walks buyers in arrival order, selling to each value strictly above
/// `price` until `k` units are gone. Calls `on_sale(index, value)` per sale.
template <class OnSale>
void sell_in_order(double price, std::span<const double> x, std::size_t k, OnSale&& on_sale) {
  std::size_t sold = 0;
  for (std::size_t i = 0; i < x.size() && sold < k; ++i) {
    if (x[i] > price) {
      on_sale(i, x[i]);
      ++sold;
    }
  }
}

/// Sum of the k largest entries, added in index order. When k == n this is
/// the plain index-order sum, so it matches an accept-everything run exactly.
inline double prophet_value(std::span<const double> x, std::size_t k, std::vector<double>& scratch) {
  k = std::min(k, x.size());
  if (k == 0) return 0.0;
  double total = 0.0;
  if (k == x.size()) {
    for (double v : x) total += v;
    return total;
  }
  const double cutoff = kth_largest(x, k, scratch);
  std::size_t above = 0;
  for (double v : x) above += v > cutoff ? 1 : 0;
  std::size_t ties_left = k - above;
  for (double v : x) {
    if (v > cutoff) {
      total += v;
    } else if (v == cutoff && ties_left > 0) {
      total += v;
      --ties_left;
    }
  }
  return total;
}

inline double prophet_value(std::span<const double> x, std::size_t k) {
  std::vector<double> scratch;
  return prophet_value(x, k, scratch);
}

inline MarketOutcome run_market(const Instance& instance, double price, std::span<const double> x) {
  if (x.size() != instance.n())
    throw config_error("run_market: expected " + std::to_string(instance.n()) + " values, got " +
                       std::to_string(x.size()));
  MarketOutcome out;
  sell_in_order(price, x, instance.k(), [&](std::size_t i, double v) {
    out.alg_value += v;
    out.accepted_indices.push_back(i);
  });
  out.picks = out.accepted_indices.size();
  out.prophet_value = prophet_value(x, instance.k());
  return out;
}

/// Lower-bound stand-in for the algorithm: of the t values above `price`,
/// the lowest min(t, k). Returned in descending order.
inline std::vector<double> surrogate_picks(std::span<const double> x, double price, std::size_t k) {
  std::vector<double> above;
  for (double v : x)
    if (v > price) above.push_back(v);
  std::sort(above.begin(), above.end(), std::greater<>{});
  const std::size_t take = std::min(above.size(), k);
  return {above.end() - static_cast<std::ptrdiff_t>(take), above.end()};
}

/// Number of surrogate picks (price = r-th largest sample) that are >= a.
inline std::size_t surrogate_picks_above(std::span<const double> x, std::span<const double> samples, std::size_t r,
                                         std::size_t k, double a) {
  if (r < 1 || r > samples.size()) throw config_error("surrogate_picks_above: need 1 <= r <= n");
  const double price = kth_largest(samples, r);
  const auto picks = surrogate_picks(x, price, k);
  return static_cast<std::size_t>(std::count_if(picks.begin(), picks.end(), [a](double v) { return v >= a; }));
}

}  // namespace ssp
