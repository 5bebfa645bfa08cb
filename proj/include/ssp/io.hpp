#pragma once

// JSON (instances, policies) and CSV (report rows) encodings.

#include <cstdint>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <type_traits>
#include <variant>
#include <vector>

#include "json.hpp"
#include "ssp/errors.hpp"
#include "ssp/format.hpp"
#include "ssp/market.hpp"
#include "ssp/model.hpp"
#include "ssp/montecarlo.hpp"

namespace ssp::io {

using nlohmann::json;

inline json to_json(const DistributionSpec& spec) {
  return std::visit(
      [](const auto& f) -> json {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, Uniform>) {
          return {{"family", "uniform"}, {"lo", f.lo}, {"hi", f.hi}};
        } else if constexpr (std::is_same_v<T, Exponential>) {
          return {{"family", "exponential"}, {"rate", f.rate}};
        } else if constexpr (std::is_same_v<T, Pareto>) {
          return {{"family", "pareto"}, {"scale", f.scale}, {"shape", f.shape}};
        } else {
          return {{"family", "spike_mixture"}, {"base_lo", f.base_lo},   {"base_hi", f.base_hi},
                  {"spike_lo", f.spike_lo},    {"spike_hi", f.spike_hi}, {"spike_prob", f.spike_prob}};
        }
      },
      spec.family());
}

namespace detail {

inline double number_field(const json& j, const char* key) {
  if (!j.contains(key) || !j.at(key).is_number())
    throw config_error(std::string("missing or non-numeric field \"") + key + "\"");
  return j.at(key).get<double>();
}

inline std::size_t count_field(const json& j, const char* key) {
  if (!j.contains(key) || !j.at(key).is_number_integer() || j.at(key).get<long long>() < 0)
    throw config_error(std::string("missing or invalid integer field \"") + key + "\"");
  return j.at(key).get<std::size_t>();
}

}  // namespace detail

inline DistributionSpec distribution_from_json(const json& j) {
  if (!j.is_object() || !j.contains("family") || !j.at("family").is_string())
    throw config_error("distribution: expected an object with a string \"family\"");
  const auto family = j.at("family").get<std::string>();
  using detail::number_field;
  if (family == "uniform") return Uniform{number_field(j, "lo"), number_field(j, "hi")};
  if (family == "exponential") return Exponential{number_field(j, "rate")};
  if (family == "pareto") return Pareto{number_field(j, "scale"), number_field(j, "shape")};
  if (family == "spike_mixture")
    return SpikeMixture{number_field(j, "base_lo"), number_field(j, "base_hi"), number_field(j, "spike_lo"),
                        number_field(j, "spike_hi"), number_field(j, "spike_prob")};
  throw config_error("distribution: unknown family \"" + family + "\"");
}

inline json to_json(const Instance& instance) {
  json dists = json::array();
  for (const auto& d : instance.dists()) dists.push_back(to_json(d));
  return {{"k", instance.k()}, {"dists", std::move(dists)}};
}

inline Instance instance_from_json(const json& j) {
  if (!j.is_object() || !j.contains("dists") || !j.at("dists").is_array())
    throw config_error("instance: expected {\"k\": int, \"dists\": [...]}");
  std::vector<DistributionSpec> dists;
  for (const auto& d : j.at("dists")) dists.push_back(distribution_from_json(d));
  return Instance(std::move(dists), detail::count_field(j, "k"));
}

inline Instance parse_instance(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw config_error(std::string("instance JSON: ") + e.what());
  }
  return instance_from_json(j);
}

inline json to_json(const PricePolicy& policy) {
  return std::visit(
      [](const auto& rule) -> json {
        using T = std::decay_t<decltype(rule)>;
        if constexpr (std::is_same_v<T, SampleOrderStatistic>) return {{"rule", "sample_order_statistic"}, {"r", rule.r}};
        else if constexpr (std::is_same_v<T, FixedPrice>) return {{"rule", "fixed_price"}, {"p", rule.p}};
        else return {{"rule", "expected_demand_price"}, {"q", rule.q}};
      },
      policy);
}

inline PricePolicy policy_from_json(const json& j) {
  if (!j.is_object() || !j.contains("rule") || !j.at("rule").is_string())
    throw config_error("policy: expected an object with a string \"rule\"");
  const auto rule = j.at("rule").get<std::string>();
  if (rule == "sample_order_statistic") return SampleOrderStatistic{detail::count_field(j, "r")};
  if (rule == "fixed_price") return FixedPrice{detail::number_field(j, "p")};
  if (rule == "expected_demand_price") return ExpectedDemandPrice{detail::number_field(j, "q")};
  throw config_error("policy: unknown rule \"" + rule + "\"");
}

/// A CSV document: optional leading "# ..." comment lines, a header, rows.
struct CsvTable {
  std::vector<std::string> comments;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  /// Column index by name; throws if absent.
  std::size_t column(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i)
      if (header[i] == name) return i;
    throw std::out_of_range("csv: no column \"" + name + "\"");
  }
};

namespace detail {

inline std::vector<std::string> split_commas(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

inline void write_cells(std::ostream& out, const std::vector<std::string>& cells) {
  for (std::size_t i = 0; i < cells.size(); ++i) out << (i ? "," : "") << cells[i];
  out << '\n';
}

}  // namespace detail

inline void write_csv(std::ostream& out, const CsvTable& table) {
  for (const auto& c : table.comments) out << "# " << c << '\n';
  detail::write_cells(out, table.header);
  for (const auto& row : table.rows) detail::write_cells(out, row);
}

inline CsvTable read_csv(std::istream& in) {
  CsvTable table;
  std::string line;
  bool have_header = false;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (!have_header && line.rfind('#', 0) == 0) {
      table.comments.push_back(line.size() > 2 ? line.substr(2) : "");
      continue;
    }
    auto cells = detail::split_commas(line);
    if (!have_header) {
      table.header = std::move(cells);
      have_header = true;
    } else {
      if (cells.size() != table.header.size()) throw std::runtime_error("csv: ragged row");
      table.rows.push_back(std::move(cells));
    }
  }
  if (!have_header) throw std::runtime_error("csv: missing header");
  return table;
}

/// k, r_or_rule, n, trials, seed, mean_alg, mean_prophet, ratio, stderr,
/// ci_lo, ci_hi, picks_0..picks_k.
inline std::vector<std::string> report_header(std::size_t k) {
  std::vector<std::string> h{"k",     "r_or_rule", "n",      "trials", "seed", "mean_alg",
                             "mean_prophet", "ratio", "stderr", "ci_lo", "ci_hi"};
  for (std::size_t p = 0; p <= k; ++p) h.push_back("picks_" + std::to_string(p));
  return h;
}

/// CSV text for one JSON cell: null is empty, doubles use the shortest
/// round-trip form.
inline std::string render_cell(const json& cell) {
  if (cell.is_null()) return "";
  if (cell.is_string()) return cell.get<std::string>();
  if (cell.is_boolean()) return cell.get<bool>() ? "true" : "false";
  if (cell.is_number_unsigned()) return std::to_string(cell.get<std::uint64_t>());
  if (cell.is_number_integer()) return std::to_string(cell.get<std::int64_t>());
  if (cell.is_number_float()) return format_double(cell.get<double>());
  return cell.dump();
}

/// Cells in report_header order.
inline std::vector<json> report_cells(const SimReport& r) {
  std::vector<json> row{r.k,         r.rule,      r.n,     r.trials,       r.seed,  r.mean_alg,
                        r.mean_prophet, r.ratio, r.stderr_ratio, r.ci_lo, r.ci_hi};
  for (auto c : r.pick_histogram) row.emplace_back(c);
  return row;
}

inline std::vector<std::string> report_row(const SimReport& r) {
  std::vector<std::string> row;
  for (const auto& cell : report_cells(r)) row.push_back(render_cell(cell));
  return row;
}

inline json to_json(const SimReport& r) {
  return {{"k", r.k},
          {"r_or_rule", r.rule},
          {"n", r.n},
          {"trials", r.trials},
          {"seed", r.seed},
          {"ci_level", r.ci_level},
          {"mean_alg", r.mean_alg},
          {"mean_prophet", r.mean_prophet},
          {"ratio", r.ratio},
          {"stderr", r.stderr_ratio},
          {"ci_lo", r.ci_lo},
          {"ci_hi", r.ci_hi},
          {"pick_histogram", r.pick_histogram}};
}

}  // namespace ssp::io
