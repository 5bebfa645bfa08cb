#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <utility>
#include <variant>
#include <vector>

#include "ssp/errors.hpp"
#include "ssp/rng.hpp"

namespace ssp {

// Value distributions. All families are continuous, so two independent draws
// tie with probability zero.

struct Uniform {
  double lo = 0.0;
  double hi = 1.0;
  bool operator==(const Uniform&) const = default;
};

struct Exponential {
  double rate = 1.0;
  bool operator==(const Exponential&) const = default;
};

struct Pareto {
  double scale = 1.0;
  double shape = 2.0;
  bool operator==(const Pareto&) const = default;
};

/// Base interval with probability 1 - spike_prob, plus a thin uniform sliver
/// [spike_lo, spike_hi] above it carrying spike_prob. Stands in for a point
/// mass while keeping the distribution continuous.
struct SpikeMixture {
  double base_lo = 0.0;
  double base_hi = 1.0;
  double spike_lo = 2.0;
  double spike_hi = 2.0 + 2e-6;
  double spike_prob = 0.5;
  bool operator==(const SpikeMixture&) const = default;

  static constexpr double kDefaultRelativeWidth = 1e-6;

  /// Spike at `spike_value` with sliver width `relative_width * spike_value`.
  static SpikeMixture at(double base_lo, double base_hi, double spike_value, double spike_prob,
                         double relative_width = kDefaultRelativeWidth) {
    return {base_lo, base_hi, spike_value, spike_value * (1.0 + relative_width), spike_prob};
  }
};

class DistributionSpec {
public:
  using Family = std::variant<Uniform, Exponential, Pareto, SpikeMixture>;

  DistributionSpec() = default;
  DistributionSpec(Family family) : family_(std::move(family)) { validate(); }  // NOLINT
  template <class F>
    requires std::is_constructible_v<Family, F> && (!std::is_same_v<std::decay_t<F>, Family>)
  DistributionSpec(F&& f) : DistributionSpec(Family(std::forward<F>(f))) {}  // NOLINT

  const Family& family() const noexcept { return family_; }

  template <class F>
  bool holds() const noexcept {
    return std::holds_alternative<F>(family_);
  }
  template <class F>
  const F& as() const {
    return std::get<F>(family_);
  }

  bool operator==(const DistributionSpec&) const = default;

private:
  void validate() const {
    auto finite = [](double v) { return std::isfinite(v); };
    std::visit(
        [&](const auto& f) {
          using T = std::decay_t<decltype(f)>;
          if constexpr (std::is_same_v<T, Uniform>) {
            if (!finite(f.lo) || !finite(f.hi) || !(f.lo < f.hi))
              throw config_error("uniform: need finite lo < hi");
          } else if constexpr (std::is_same_v<T, Exponential>) {
            if (!finite(f.rate) || !(f.rate > 0.0)) throw config_error("exponential: need rate > 0");
          } else if constexpr (std::is_same_v<T, Pareto>) {
            if (!finite(f.scale) || !finite(f.shape) || !(f.scale > 0.0) || !(f.shape > 0.0))
              throw config_error("pareto: need scale > 0 and shape > 0");
          } else {
            if (!finite(f.base_lo) || !finite(f.base_hi) || !finite(f.spike_lo) || !finite(f.spike_hi))
              throw config_error("spike_mixture: bounds must be finite");
            if (!(f.base_lo < f.base_hi)) throw config_error("spike_mixture: need base_lo < base_hi");
            if (!(f.spike_lo < f.spike_hi)) throw config_error("spike_mixture: need spike_lo < spike_hi");
            if (!(f.base_hi <= f.spike_lo)) throw config_error("spike_mixture: need base_hi <= spike_lo");
            if (!(f.spike_prob > 0.0 && f.spike_prob < 1.0))
              throw config_error("spike_mixture: need 0 < spike_prob < 1");
          }
        },
        family_);
  }

  Family family_{Uniform{}};
};

namespace detail {

inline double uniform_cdf(double lo, double hi, double x) {
  if (x <= lo) return 0.0;
  if (x >= hi) return 1.0;
  return (x - lo) / (hi - lo);
}

inline double uniform_quantile(double lo, double hi, double q) { return lo + (hi - lo) * q; }

}  // namespace detail

inline double cdf(const DistributionSpec& spec, double x) {
  return std::visit(
      [x](const auto& f) -> double {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, Uniform>) {
          return detail::uniform_cdf(f.lo, f.hi, x);
        } else if constexpr (std::is_same_v<T, Exponential>) {
          return x <= 0.0 ? 0.0 : -std::expm1(-f.rate * x);
        } else if constexpr (std::is_same_v<T, Pareto>) {
          return x <= f.scale ? 0.0 : -std::expm1(f.shape * std::log(f.scale / x));
        } else {
          const double base_mass = 1.0 - f.spike_prob;
          if (x <= f.base_hi) return base_mass * detail::uniform_cdf(f.base_lo, f.base_hi, x);
          if (x <= f.spike_lo) return base_mass;
          return base_mass + f.spike_prob * detail::uniform_cdf(f.spike_lo, f.spike_hi, x);
        }
      },
      spec.family());
}

/// Inverse CDF on the open interval (0, 1).
inline double quantile(const DistributionSpec& spec, double q) {
  if (!(q > 0.0 && q < 1.0)) throw std::domain_error("quantile: q must lie in (0, 1)");
  return std::visit(
      [q](const auto& f) -> double {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, Uniform>) {
          return detail::uniform_quantile(f.lo, f.hi, q);
        } else if constexpr (std::is_same_v<T, Exponential>) {
          return -std::log1p(-q) / f.rate;
        } else if constexpr (std::is_same_v<T, Pareto>) {
          return f.scale * std::exp(-std::log1p(-q) / f.shape);
        } else {
          const double base_mass = 1.0 - f.spike_prob;
          if (q <= base_mass) return detail::uniform_quantile(f.base_lo, f.base_hi, q / base_mass);
          return detail::uniform_quantile(f.spike_lo, f.spike_hi, (q - base_mass) / f.spike_prob);
        }
      },
      spec.family());
}

/// One draw by inversion; consumes exactly one value from the stream.
inline double sample(const DistributionSpec& spec, CounterStream& stream) {
  return quantile(spec, stream.next_unit());
}

inline double support_lower(const DistributionSpec& spec) {
  return std::visit(
      [](const auto& f) -> double {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, Uniform>) return f.lo;
        else if constexpr (std::is_same_v<T, Exponential>) return 0.0;
        else if constexpr (std::is_same_v<T, Pareto>) return f.scale;
        else return f.base_lo;
      },
      spec.family());
}

inline double support_upper(const DistributionSpec& spec) {
  return std::visit(
      [](const auto& f) -> double {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, Uniform>) return f.hi;
        else if constexpr (std::is_same_v<T, SpikeMixture>) return f.spike_hi;
        else return std::numeric_limits<double>::infinity();
      },
      spec.family());
}

/// Expected value; infinite for Pareto with shape <= 1.
inline double mean(const DistributionSpec& spec) {
  return std::visit(
      [](const auto& f) -> double {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, Uniform>) {
          return 0.5 * (f.lo + f.hi);
        } else if constexpr (std::is_same_v<T, Exponential>) {
          return 1.0 / f.rate;
        } else if constexpr (std::is_same_v<T, Pareto>) {
          return f.shape > 1.0 ? f.shape * f.scale / (f.shape - 1.0) : std::numeric_limits<double>::infinity();
        } else {
          return (1.0 - f.spike_prob) * 0.5 * (f.base_lo + f.base_hi) +
                 f.spike_prob * 0.5 * (f.spike_lo + f.spike_hi);
        }
      },
      spec.family());
}

/// A market: buyers arrive in the order of `dists`; `k` identical units for sale.
class Instance {
public:
  Instance(std::vector<DistributionSpec> dists, std::size_t k) : dists_(std::move(dists)), k_(k) {
    if (dists_.empty()) throw config_error("instance: need at least one buyer");
    if (k_ < 1 || k_ > dists_.size())
      throw config_error("instance: need 1 <= k <= n (k=" + std::to_string(k_) +
                         ", n=" + std::to_string(dists_.size()) + ")");
  }

  static Instance iid(const DistributionSpec& spec, std::size_t n, std::size_t k) {
    return Instance(std::vector<DistributionSpec>(n, spec), k);
  }

  std::size_t n() const noexcept { return dists_.size(); }
  std::size_t k() const noexcept { return k_; }
  const std::vector<DistributionSpec>& dists() const noexcept { return dists_; }
  const DistributionSpec& operator[](std::size_t i) const { return dists_[i]; }

  bool operator==(const Instance&) const = default;

private:
  std::vector<DistributionSpec> dists_;
  std::size_t k_;
};

}  // namespace ssp
