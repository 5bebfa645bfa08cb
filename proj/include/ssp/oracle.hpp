#pragma once

// Exact verification of rank-order inequalities on small ranked scenarios.
//
// A scenario fixes 2n realized values a_1 > a_2 > ... > a_2n, identified by
// rank (1 = largest), and a perfect matching of the ranks into n pairs, one
// pair per buyer. Within each pair one value is the buyer's X and the other
// the seller's sample Y, each way round with probability 1/2, independently
// across pairs. Every event is therefore a count over 2^n equally likely
// assignments, and all probabilities are dyadic rationals.
//
// Order statistics are expressed as ranks. X^0 has rank 0 (value +inf) and
// X^s for s > n has rank 2n+1 (value 0); likewise for Y. "A > B" between
// order statistics means rank(A) < rank(B), so the two zero sentinels never
// compare greater than each other.

#include <algorithm>
#include <compare>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "ssp/errors.hpp"
#include "ssp/numeric.hpp"
#include "ssp/parallel.hpp"

namespace ssp::oracle {

using Rank = std::uint32_t;
using RankPair = std::pair<Rank, Rank>;

inline constexpr std::size_t kMaxEnumerationPairs = 12;
inline constexpr std::size_t kMaxScenarioPairs = 6;

/// Exact non-negative rational num / 2^exp.
struct Dyadic {
  std::uint64_t num = 0;
  unsigned exp = 0;

  double to_double() const { return std::ldexp(static_cast<double>(num), -static_cast<int>(exp)); }

  std::string str() const {
    return std::to_string(num) + "/" + std::to_string(std::uint64_t{1} << exp);
  }

  friend std::strong_ordering operator<=>(const Dyadic& a, const Dyadic& b) {
    const unsigned e = std::max(a.exp, b.exp);
    const auto lhs = static_cast<unsigned __int128>(a.num) << (e - a.exp);
    const auto rhs = static_cast<unsigned __int128>(b.num) << (e - b.exp);
    return lhs <=> rhs;
  }
  friend bool operator==(const Dyadic& a, const Dyadic& b) { return (a <=> b) == 0; }
};

using EventProbability = Dyadic;

/// A perfect matching of ranks 1..2n. Pairs are stored as (lower rank,
/// higher rank), sorted by lower rank.
class RankedScenario {
public:
  static RankedScenario from_pairs(std::vector<RankPair> pairs) {
    const std::size_t n = pairs.size();
    if (n == 0) throw std::invalid_argument("scenario: need at least one pair");
    const Rank top = static_cast<Rank>(2 * n);
    std::vector<Rank> partner(2 * n + 2, 0);
    for (auto& [a, b] : pairs) {
      if (a > b) std::swap(a, b);
      if (a < 1 || b > top || a == b) throw std::invalid_argument("scenario: rank out of range");
      if (partner[a] != 0 || partner[b] != 0) throw std::invalid_argument("scenario: rank matched twice");
      partner[a] = b;
      partner[b] = a;
    }
    std::sort(pairs.begin(), pairs.end());
    RankedScenario s;
    s.pairs_ = std::move(pairs);
    s.partner_ = std::move(partner);
    return s;
  }

  std::size_t n() const noexcept { return pairs_.size(); }
  Rank zero_rank() const noexcept { return static_cast<Rank>(2 * n() + 1); }
  Rank partner(Rank r) const { return partner_.at(r); }
  const std::vector<RankPair>& pairs() const noexcept { return pairs_; }

  bool operator==(const RankedScenario& other) const { return pairs_ == other.pairs_; }

private:
  std::vector<RankPair> pairs_;
  std::vector<Rank> partner_;
};

/// All (2n-1)!! perfect matchings of ranks 1..2n. Canonical order: the
/// smallest unmatched rank is paired with each larger unmatched rank in
/// increasing order, recursively.
inline std::vector<RankedScenario> all_scenarios(std::size_t n) {
  if (n < 1) throw std::invalid_argument("all_scenarios: need n >= 1");
  if (n > kMaxScenarioPairs) throw resource_error("all_scenarios: n > 6 exceeds the enumeration budget");
  std::vector<RankedScenario> out;
  std::vector<bool> used(2 * n + 1, false);
  std::vector<RankPair> current;
  auto recurse = [&](auto&& self) -> void {
    Rank first = 1;
    while (first <= 2 * n && used[first]) ++first;
    if (first > 2 * n) {
      out.push_back(RankedScenario::from_pairs(current));
      return;
    }
    used[first] = true;
    for (Rank second = first + 1; second <= 2 * n; ++second) {
      if (used[second]) continue;
      used[second] = true;
      current.emplace_back(first, second);
      self(self);
      current.pop_back();
      used[second] = false;
    }
    used[first] = false;
  };
  recurse(recurse);
  return out;
}

/// One X/Y assignment: which member of each pair is the X.
class Assignment {
public:
  Assignment(const Rank* x, const Rank* y, const std::uint8_t* is_x, std::size_t n)
      : x_(x), y_(y), is_x_(is_x), n_(n) {}

  /// Rank of X^s (s-th largest X); 0 for s = 0, 2n+1 for s > n.
  Rank x(std::size_t s) const noexcept { return s == 0 ? 0 : s <= n_ ? x_[s - 1] : zero(); }
  Rank y(std::size_t s) const noexcept { return s == 0 ? 0 : s <= n_ ? y_[s - 1] : zero(); }
  bool is_x(Rank r) const noexcept { return is_x_[r] != 0; }
  std::size_t n() const noexcept { return n_; }

  /// Number of X values strictly above the value of rank `r`.
  std::size_t x_count_above(Rank r) const noexcept {
    return static_cast<std::size_t>(std::lower_bound(x_, x_ + n_, r) - x_);
  }

private:
  Rank zero() const noexcept { return static_cast<Rank>(2 * n_ + 1); }
  const Rank* x_;
  const Rank* y_;
  const std::uint8_t* is_x_;
  std::size_t n_;
};

/// Strict value comparison between ranks: value(a) > value(b).
constexpr bool above(Rank a, Rank b) noexcept { return a < b; }

/// Precomputed table of all 2^n assignments of a scenario. Bit p of the
/// assignment index selects the lower rank of pair p as the X.
class AssignmentSpace {
public:
  explicit AssignmentSpace(const RankedScenario& scenario) : scenario_(scenario) {
    const std::size_t n = scenario.n();
    if (n > kMaxEnumerationPairs) throw resource_error("event enumeration limited to n <= 12 pairs");
    size_ = std::size_t{1} << n;
    stride_ = 2 * n + 2;
    x_.resize(size_ * n);
    y_.resize(size_ * n);
    is_x_.assign(size_ * stride_, 0);
    for (std::size_t mask = 0; mask < size_; ++mask) {
      std::uint8_t* flags = &is_x_[mask * stride_];
      for (std::size_t p = 0; p < n; ++p) {
        const auto [first, second] = scenario.pairs()[p];
        flags[(mask >> p) & 1 ? first : second] = 1;
      }
      Rank* xs = &x_[mask * n];
      Rank* ys = &y_[mask * n];
      for (Rank r = 1; r <= 2 * n; ++r) *(flags[r] ? xs++ : ys++) = r;
    }
  }

  std::size_t n() const noexcept { return scenario_.n(); }
  std::size_t size() const noexcept { return size_; }
  const RankedScenario& scenario() const noexcept { return scenario_; }

  Assignment operator[](std::size_t mask) const {
    const std::size_t n = scenario_.n();
    return {&x_[mask * n], &y_[mask * n], &is_x_[mask * stride_], n};
  }

private:
  RankedScenario scenario_;
  std::size_t size_ = 0;
  std::size_t stride_ = 0;
  std::vector<Rank> x_;
  std::vector<Rank> y_;
  std::vector<std::uint8_t> is_x_;
};

template <class Pred>
EventProbability event_prob(const AssignmentSpace& space, Pred&& pred) {
  std::uint64_t hits = 0;
  for (std::size_t mask = 0; mask < space.size(); ++mask) hits += pred(space[mask]) ? 1 : 0;
  return {hits, static_cast<unsigned>(space.n())};
}

template <class Pred>
EventProbability event_prob(const RankedScenario& scenario, Pred&& pred) {
  return event_prob(AssignmentSpace(scenario), std::forward<Pred>(pred));
}

/// E[count] over all assignments, as an exact dyadic.
template <class Count>
Dyadic expectation(const AssignmentSpace& space, Count&& count) {
  std::uint64_t total = 0;
  for (std::size_t mask = 0; mask < space.size(); ++mask) total += count(space[mask]);
  return {total, static_cast<unsigned>(space.n())};
}

/// Pr(X^a > Y^y > X^b).
inline EventProbability between(const AssignmentSpace& space, std::size_t a, std::size_t y, std::size_t b) {
  return event_prob(space, [=](const Assignment& s) { return above(s.x(a), s.y(y)) && above(s.y(y), s.x(b)); });
}

/// Pr(X^a > Y^b).
inline EventProbability x_above_y(const AssignmentSpace& space, std::size_t a, std::size_t b) {
  return event_prob(space, [=](const Assignment& s) { return above(s.x(a), s.y(b)); });
}

struct Comparison {
  Dyadic lhs;
  Dyadic rhs;
  bool holds = false;
};

namespace detail {

inline void require(bool ok, const char* what) {
  if (!ok) throw std::domain_error(what);
}

inline Dyadic halve(Dyadic d) { return {d.num, d.exp + 1}; }

}  // namespace detail

/// Pr(X^i > Y^{j+1-i}, Y^k > X^{i+k}) >= 1/2 Pr(X^i > Y^{j+1-i}),
/// for j - k < i <= j and k <= n.
inline Comparison check_half_lemma(const AssignmentSpace& space, std::size_t i, std::size_t j, std::size_t k) {
  const std::size_t two_n = 2 * space.n();
  detail::require(k >= 1 && k <= space.n(), "half lemma: need 1 <= k <= n");
  detail::require(j >= 1 && j <= two_n, "half lemma: need 1 <= j <= 2n");
  detail::require(i >= 1 && i <= j && i + k > j, "half lemma: need j - k < i <= j");
  const std::size_t y_index = j + 1 - i;
  Comparison c;
  c.lhs = event_prob(space, [=](const Assignment& s) {
    return above(s.x(i), s.y(y_index)) && above(s.y(k), s.x(i + k));
  });
  c.rhs = detail::halve(x_above_y(space, i, y_index));
  c.holds = c.lhs >= c.rhs;
  return c;
}

/// True when the sequence never rises again after its first strict fall.
inline bool is_unimodal(const std::vector<Dyadic>& values) {
  bool fallen = false;
  for (std::size_t t = 0; t + 1 < values.size(); ++t) {
    if (values[t + 1] < values[t]) fallen = true;
    else if (values[t + 1] > values[t] && fallen) return false;
  }
  return true;
}

struct InBetweenCheck {
  Comparison inequality;       // F(i, j, k) >= F(i, k, k)
  bool unimodal = false;       // j' -> F(i, j', k) on [i, k]
  std::vector<Dyadic> profile; // F(i, j', k) for j' = i..k
};

/// Pr(X^i > Y^j > X^k) >= Pr(X^i > Y^k > X^k) for i <= j <= k, plus the
/// shape of j' -> Pr(X^i > Y^j' > X^k) over [i, k].
inline InBetweenCheck check_inbetween_lemma(const AssignmentSpace& space, std::size_t i, std::size_t j,
                                            std::size_t k) {
  detail::require(i >= 1 && i <= j && j <= k && k <= 2 * space.n(), "in-between lemma: need 1 <= i <= j <= k <= 2n");
  InBetweenCheck out;
  out.profile.reserve(k - i + 1);
  for (std::size_t jj = i; jj <= k; ++jj) out.profile.push_back(between(space, i, jj, k));
  out.inequality.lhs = out.profile[j - i];
  out.inequality.rhs = out.profile.back();
  out.inequality.holds = out.inequality.lhs >= out.inequality.rhs;
  out.unimodal = is_unimodal(out.profile);
  return out;
}

/// Closed form for Pr(X^{j-1} > Y^y > X^j) from the pairing structure of
/// the top m = y + j - 1 ranks, with l the number of pairs inside them:
///   a_m paired inside:  C(m - 2l,     j - l - 1) / 2^(m - 2l + 1)
///   a_m paired outside: C(m - 2l - 1, j - l - 1) / 2^(m - 2l)
/// Requires j >= 2 and m <= 2n.
inline Dyadic pairing_case_formula(const RankedScenario& scenario, std::size_t y, std::size_t j) {
  detail::require(y >= 1 && j >= 2 && y + j - 1 <= 2 * scenario.n(), "case formula: need y >= 1, j >= 2, y+j-1 <= 2n");
  const auto m = static_cast<Rank>(y + j - 1);
  std::int64_t l = 0;
  for (const auto& [a, b] : scenario.pairs()) l += (b <= m) ? 1 : 0;
  const bool paired_inside = scenario.partner(m) < m;
  const std::int64_t pick = static_cast<std::int64_t>(j) - l - 1;
  const std::int64_t unpaired = paired_inside ? m - 2 * l : m - 2 * l - 1;
  const std::int64_t exp = paired_inside ? m - 2 * l + 1 : m - 2 * l;
  if (pick < 0 || pick > unpaired) return {0, static_cast<unsigned>(exp)};
  return {ssp::detail::exact_choose(static_cast<std::uint64_t>(unpaired), static_cast<std::uint64_t>(pick)),
          static_cast<unsigned>(exp)};
}

struct ClaimCheck {
  Comparison low_sample;   // Pr(X^{j-1} > Y^i > X^j) >= Pr(X^j > Y^i > X^{j+1})
  Comparison high_sample;  // Pr(X^{j-1} > Y^k > X^j) <= Pr(X^j > Y^k > X^{j+1})
  bool formula_applicable = false;
  bool formula_matches = true;  // closed form agrees with enumeration
};

/// For i < j < k: the chance that Y^i sits in the gap (X^{j-1}, X^j) does
/// not grow with j, and the chance for Y^k does not shrink.
inline ClaimCheck check_claim_monotone(const AssignmentSpace& space, std::size_t i, std::size_t j, std::size_t k) {
  detail::require(i >= 1 && i < j && j < k && k <= 2 * space.n(), "claim: need 1 <= i < j < k <= 2n");
  ClaimCheck out;
  const Dyadic low_before = between(space, j - 1, i, j);
  const Dyadic high_before = between(space, j - 1, k, j);
  out.low_sample = {low_before, between(space, j, i, j + 1), false};
  out.low_sample.holds = out.low_sample.lhs >= out.low_sample.rhs;
  out.high_sample = {high_before, between(space, j, k, j + 1), false};
  out.high_sample.holds = out.high_sample.lhs <= out.high_sample.rhs;
  const std::size_t two_n = 2 * space.n();
  if (i + j - 1 <= two_n) {
    out.formula_applicable = true;
    out.formula_matches = pairing_case_formula(space.scenario(), i, j) == low_before;
    if (k + j - 1 <= two_n)
      out.formula_matches = out.formula_matches && pairing_case_formula(space.scenario(), k, j) == high_before;
  }
  return out;
}

/// Number of surrogate picks with rank <= j under price Y^k: of the t X's
/// above Y^k, the lowest min(t, k).
inline std::size_t surrogate_picks_at_or_above(const Assignment& s, std::size_t k, std::size_t j) {
  const std::size_t t = s.x_count_above(s.y(k));
  const std::size_t take = std::min(t, k);
  std::size_t count = 0;
  for (std::size_t idx = t - take + 1; idx <= t; ++idx) count += s.x(idx) <= j ? 1 : 0;
  return count;
}

/// E[# surrogate picks >= a_j] >= 1/2 sum_{i<=k} Pr(X^i > Y^{j+1-i}),
/// with the price at Y^k.
inline Comparison check_main_inequality(const AssignmentSpace& space, std::size_t k, std::size_t j) {
  detail::require(k >= 1 && k <= space.n(), "main inequality: need 1 <= k <= n");
  detail::require(j >= 1 && j <= 2 * space.n(), "main inequality: need 1 <= j <= 2n");
  Comparison c;
  c.lhs = expectation(space, [=](const Assignment& s) { return surrogate_picks_at_or_above(s, k, j); });
  std::uint64_t rhs_hits = 0;
  for (std::size_t i = 1; i <= k && i <= j; ++i) rhs_hits += x_above_y(space, i, j + 1 - i).num;
  c.rhs = {rhs_hits, static_cast<unsigned>(space.n() + 1)};
  c.holds = c.lhs >= c.rhs;
  return c;
}

// Convenience overloads on a bare scenario.
inline Comparison check_half_lemma(const RankedScenario& s, std::size_t i, std::size_t j, std::size_t k) {
  return check_half_lemma(AssignmentSpace(s), i, j, k);
}
inline InBetweenCheck check_inbetween_lemma(const RankedScenario& s, std::size_t i, std::size_t j, std::size_t k) {
  return check_inbetween_lemma(AssignmentSpace(s), i, j, k);
}
inline ClaimCheck check_claim_monotone(const RankedScenario& s, std::size_t i, std::size_t j, std::size_t k) {
  return check_claim_monotone(AssignmentSpace(s), i, j, k);
}
inline Comparison check_main_inequality(const RankedScenario& s, std::size_t k, std::size_t j) {
  return check_main_inequality(AssignmentSpace(s), k, j);
}

struct LemmaViolation {
  std::size_t n = 0;
  std::size_t scenario_index = 0;
  std::vector<RankPair> pairs;
  std::string lemma;
  std::vector<std::size_t> tuple;
  Dyadic lhs;
  Dyadic rhs;
};

inline const std::vector<std::string>& lemma_names() {
  static const std::vector<std::string> names{"half_lemma",     "inbetween_lemma",    "inbetween_unimodal",
                                              "claim_monotone", "claim_case_formula", "main_inequality"};
  return names;
}

struct LemmaSweep {
  std::size_t n_max = 0;
  std::uint64_t scenarios_checked = 0;
  std::map<std::string, std::uint64_t> tuples_checked;
  std::vector<LemmaViolation> violations;
};

namespace detail {

struct ScenarioTally {
  std::map<std::string, std::uint64_t> tuples;
  std::vector<LemmaViolation> violations;
};

inline ScenarioTally sweep_scenario(const RankedScenario& scenario, std::size_t scenario_index) {
  ScenarioTally tally;
  const AssignmentSpace space(scenario);
  const std::size_t n = scenario.n();
  const std::size_t two_n = 2 * n;
  auto record = [&](const char* lemma, std::vector<std::size_t> tuple, Dyadic lhs, Dyadic rhs) {
    tally.violations.push_back({n, scenario_index, scenario.pairs(), lemma, std::move(tuple), lhs, rhs});
  };

  for (std::size_t k = 1; k <= n; ++k)
    for (std::size_t j = 1; j <= two_n; ++j)
      for (std::size_t i = (j > k ? j - k + 1 : 1); i <= j; ++i) {
        ++tally.tuples["half_lemma"];
        const auto c = check_half_lemma(space, i, j, k);
        if (!c.holds) record("half_lemma", {i, j, k}, c.lhs, c.rhs);
      }

  for (std::size_t i = 1; i <= two_n; ++i)
    for (std::size_t k = i; k <= two_n; ++k) {
      std::vector<Dyadic> profile;
      for (std::size_t j = i; j <= k; ++j) profile.push_back(between(space, i, j, k));
      for (std::size_t j = i; j <= k; ++j) {
        ++tally.tuples["inbetween_lemma"];
        if (profile[j - i] < profile.back()) record("inbetween_lemma", {i, j, k}, profile[j - i], profile.back());
      }
      ++tally.tuples["inbetween_unimodal"];
      if (!is_unimodal(profile)) record("inbetween_unimodal", {i, k}, profile.front(), profile.back());
    }

  for (std::size_t i = 1; i <= two_n; ++i)
    for (std::size_t j = i + 1; j <= two_n; ++j)
      for (std::size_t k = j + 1; k <= two_n; ++k) {
        ++tally.tuples["claim_monotone"];
        const auto c = check_claim_monotone(space, i, j, k);
        if (!c.low_sample.holds) record("claim_monotone", {i, j, k}, c.low_sample.lhs, c.low_sample.rhs);
        if (!c.high_sample.holds) record("claim_monotone", {i, j, k}, c.high_sample.lhs, c.high_sample.rhs);
      }

  // Case formula over every (y, j) it covers, not only those inside a claim triple.
  for (std::size_t y = 1; y <= two_n; ++y)
    for (std::size_t j = 2; y + j - 1 <= two_n; ++j) {
      ++tally.tuples["claim_case_formula"];
      const Dyadic exact = between(space, j - 1, y, j);
      const Dyadic formula = pairing_case_formula(scenario, y, j);
      if (!(exact == formula)) record("claim_case_formula", {y, j}, exact, formula);
    }

  for (std::size_t k = 1; k <= n; ++k)
    for (std::size_t j = 1; j <= two_n; ++j) {
      ++tally.tuples["main_inequality"];
      const auto c = check_main_inequality(space, k, j);
      if (!c.holds) record("main_inequality", {k, j}, c.lhs, c.rhs);
    }
  return tally;
}

}  // namespace detail

/// Runs every check over every scenario with 1..n_max pairs. Violations are
/// ordered by (n, canonical scenario index) whatever the thread count.
inline LemmaSweep verify_lemmas(std::size_t n_max, unsigned threads = 1) {
  if (n_max < 1) throw std::invalid_argument("verify_lemmas: need n_max >= 1");
  if (n_max > kMaxScenarioPairs) throw resource_error("verify_lemmas: n_max > 6 exceeds the enumeration budget");
  LemmaSweep sweep;
  sweep.n_max = n_max;
  for (const auto& name : lemma_names()) sweep.tuples_checked[name] = 0;
  for (std::size_t n = 1; n <= n_max; ++n) {
    const auto scenarios = all_scenarios(n);
    const auto tallies = run_indexed<detail::ScenarioTally>(scenarios.size(), threads, [&] {
      return [&](std::uint64_t idx) { return detail::sweep_scenario(scenarios[idx], idx); };
    });
    sweep.scenarios_checked += scenarios.size();
    for (const auto& t : tallies) {
      for (const auto& [name, count] : t.tuples) sweep.tuples_checked[name] += count;
      sweep.violations.insert(sweep.violations.end(), t.violations.begin(), t.violations.end());
    }
  }
  return sweep;
}

}  // namespace ssp::oracle
