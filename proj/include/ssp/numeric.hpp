#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <vector>

namespace ssp {

/// Neumaier-compensated running sum.
class CompensatedSum {
public:
  constexpr void add(double v) noexcept {
    const double t = sum_ + v;
    if (std::fabs(sum_) >= std::fabs(v)) {
      comp_ += (sum_ - t) + v;
    } else {
      comp_ += (v - t) + sum_;
    }
    sum_ = t;
  }
  constexpr double value() const noexcept { return sum_ + comp_; }

private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

/// Standard normal quantile by bisection on erfc; accurate to a few ulps for
/// p in [1e-300, 1 - 1e-16].
inline double normal_quantile(double p) {
  double lo = -40.0;
  double hi = 40.0;
  for (int it = 0; it < 200 && hi - lo > 1e-15; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (normal_cdf(mid) < p) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

namespace detail {

inline constexpr double kLogSqrt2Pi = 0.918938533204672741780329736406;

// log(n!) - log(sqrt(2 pi n) (n/e)^n), the Stirling remainder.
inline double stirlerr(double n) {
  constexpr double s0 = 1.0 / 12.0;
  constexpr double s1 = 1.0 / 360.0;
  constexpr double s2 = 1.0 / 1260.0;
  constexpr double s3 = 1.0 / 1680.0;
  constexpr double s4 = 1.0 / 1188.0;
  if (n <= 15.0) {
    return std::lgamma(n + 1.0) - (n + 0.5) * std::log(n) + n - kLogSqrt2Pi;
  }
  const double nn = n * n;
  if (n > 500) return (s0 - s1 / nn) / n;
  if (n > 80) return (s0 - (s1 - s2 / nn) / nn) / n;
  if (n > 35) return (s0 - (s1 - (s2 - s3 / nn) / nn) / nn) / n;
  return (s0 - (s1 - (s2 - (s3 - s4 / nn) / nn) / nn) / nn) / n;
}

// x log(x / m) + m - x without cancellation near x == m.
inline double bd0(double x, double m) {
  if (std::fabs(x - m) < 0.1 * (x + m)) {
    double v = (x - m) / (x + m);
    double s = (x - m) * v;
    double ej = 2.0 * x * v;
    v *= v;
    for (int j = 1; j < 1000; ++j) {
      ej *= v;
      const double s1 = s + ej / (2 * j + 1);
      if (s1 == s) return s1;
      s = s1;
    }
    return s;
  }
  return x * std::log(x / m) + m - x;
}

// Sums a tail whose terms, relative to the anchor term, shrink geometrically
// by at most `bound` per step. Terms are added smallest-first.
template <class NextRatio>
double sum_relative_tail(NextRatio&& next_ratio) {
  std::vector<double> terms{1.0};
  double head = 1.0;
  double running = 1.0;
  for (std::uint64_t step = 0;; ++step) {
    const double factor = next_ratio(step);
    if (!(factor > 0.0)) break;
    head *= factor;
    terms.push_back(head);
    running += head;
    // Remaining terms are bounded by a geometric series with this ratio.
    if (factor < 1.0 && head * factor / (1.0 - factor) < 1e-18 * running) break;
    if (head < 1e-300) break;
  }
  CompensatedSum sum;
  for (auto it = terms.rbegin(); it != terms.rend(); ++it) sum.add(*it);
  return sum.value();
}

}  // namespace detail

/// log Pr(Z = x) for Z ~ Binomial(n, 1/2).
inline double log_binom_half_pmf(std::uint64_t n, std::uint64_t x) {
  if (x > n) return -std::numeric_limits<double>::infinity();
  const double nd = static_cast<double>(n);
  if (x == 0 || x == n) return -nd * std::numbers::ln2;
  const double xd = static_cast<double>(x);
  const double yd = nd - xd;
  const double half = 0.5 * nd;
  const double lc = detail::stirlerr(nd) - detail::stirlerr(xd) - detail::stirlerr(yd) -
                    detail::bd0(xd, half) - detail::bd0(yd, half);
  const double lf = std::log(2.0 * std::numbers::pi) + std::log(xd) + std::log1p(-xd / nd);
  return lc - 0.5 * lf;
}

/// log Pr(X = x) for X ~ Poisson(lambda), lambda > 0.
inline double log_poisson_pmf(std::uint64_t x, double lambda) {
  if (x == 0) return -lambda;
  const double xd = static_cast<double>(x);
  return -detail::stirlerr(xd) - detail::bd0(xd, lambda) - 0.5 * std::log(2.0 * std::numbers::pi * xd);
}

namespace detail {

inline constexpr std::uint64_t kExactBinomialLimit = 62;

// Exact C(n, t) for n <= 62.
inline std::uint64_t exact_choose(std::uint64_t n, std::uint64_t t) {
  if (t > n) return 0;
  if (t > n - t) t = n - t;
  unsigned __int128 c = 1;
  for (std::uint64_t i = 0; i < t; ++i) c = c * (n - i) / (i + 1);
  return static_cast<std::uint64_t>(c);
}

// Pr(Z <= m), Z ~ Binomial(n, 1/2), with 2m + 1 < n (strictly below the median).
inline double binom_half_lower_below_median(std::uint64_t n, std::uint64_t m) {
  const double log_anchor = log_binom_half_pmf(n, m);
  const double nd = static_cast<double>(n);
  const double rel = sum_relative_tail([&](std::uint64_t step) -> double {
    if (step >= m) return 0.0;
    const double t = static_cast<double>(m - step);
    return t / (nd - t + 1.0);
  });
  return std::exp(log_anchor + std::log(rel));
}

}  // namespace detail

/// Pr(Z <= m) for Z ~ Binomial(n, 1/2). Exact in integer arithmetic for
/// n <= 62; otherwise log-space with the smaller tail summed directly.
inline double binom_half_cdf(std::uint64_t n, std::int64_t m) {
  if (m < 0) return 0.0;
  const auto mu = static_cast<std::uint64_t>(m);
  if (mu >= n) return 1.0;
  if (n <= detail::kExactBinomialLimit) {
    std::uint64_t acc = 0;
    for (std::uint64_t t = 0; t <= mu; ++t) acc += detail::exact_choose(n, t);
    return std::ldexp(static_cast<double>(acc), -static_cast<int>(n));
  }
  if (2 * mu + 1 == n) return 0.5;
  if (2 * mu + 1 > n) return 1.0 - detail::binom_half_lower_below_median(n, n - mu - 1);
  return detail::binom_half_lower_below_median(n, mu);
}

/// Pr(Z > m) for Z ~ Binomial(n, 1/2), accurate in relative terms for small tails.
inline double binom_half_sf(std::uint64_t n, std::int64_t m) {
  if (m < 0) return 1.0;
  const auto mu = static_cast<std::uint64_t>(m);
  if (mu >= n) return 0.0;
  // Pr(Z > m) = Pr(Z <= n - m - 1) by symmetry.
  return binom_half_cdf(n, static_cast<std::int64_t>(n - mu - 1));
}

/// Pr(X <= m) and Pr(X > m) for X ~ Poisson(lambda); each computes the
/// smaller side directly and complements the other.
inline double poisson_sf(std::int64_t m, double lambda);

inline double poisson_cdf(std::int64_t m, double lambda) {
  if (m < 0) return 0.0;
  const double md = static_cast<double>(m);
  if (md >= lambda) return 1.0 - poisson_sf(m, lambda);
  const double log_anchor = log_poisson_pmf(static_cast<std::uint64_t>(m), lambda);
  const double rel = detail::sum_relative_tail([&](std::uint64_t step) -> double {
    const double x = md - static_cast<double>(step);
    return x >= 1.0 ? x / lambda : 0.0;
  });
  return std::exp(log_anchor + std::log(rel));
}

inline double poisson_sf(std::int64_t m, double lambda) {
  if (m < 0) return 1.0;
  const double first = static_cast<double>(m) + 1.0;
  if (first <= lambda) return 1.0 - poisson_cdf(m, lambda);
  const double log_anchor = log_poisson_pmf(static_cast<std::uint64_t>(m) + 1, lambda);
  const double rel = detail::sum_relative_tail(
      [&](std::uint64_t step) -> double { return lambda / (first + static_cast<double>(step) + 1.0); });
  return std::exp(log_anchor + std::log(rel));
}

}  // namespace ssp
