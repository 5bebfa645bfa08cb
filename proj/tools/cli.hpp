#pragma once

// The `ssp` command-line front end. Everything lives in run() so tests can
// drive the tool in-process.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "ssp/ssp.hpp"

namespace ssp::cli {

using nlohmann::json;

enum ExitCode : int { kOk = 0, kViolation = 1, kConfig = 2, kNumeric = 3 };

/// Column names plus rows of JSON cells; rendered as CSV or JSON.
struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<json>> rows;
};

/// Flag set that determined the output, in a fixed order. --threads and
/// --out are left out since they never change the bytes written.
struct Echo {
  std::string command;
  std::vector<std::pair<std::string, json>> flags;

  void add(std::string name, json value) { flags.emplace_back(std::move(name), std::move(value)); }

  std::string line() const {
    std::string s = "ssp " + command;
    for (const auto& [name, value] : flags) s += " --" + name + " " + io::render_cell(value);
    return s;
  }

  json object() const {
    json j = json::object();
    j["command"] = command;
    for (const auto& [name, value] : flags) j[name] = value;
    return j;
  }
};

struct CommonOptions {
  std::uint64_t seed = 1;
  std::uint64_t trials = 10000;
  unsigned threads = 1;
  double ci_level = 0.99;
  std::string out;
  std::string format = "csv";

  SimConfig sim() const { return {trials, seed, ci_level, threads}; }
};

struct InstanceOptions {
  std::string kind = "iid-uniform";
  std::size_t n = 20;
  std::size_t k = 1;
  double delta = 1e-3;
  std::string file;
  std::string inline_json;
};

struct PolicyOptions {
  std::optional<std::size_t> r;
  std::optional<double> price;
  std::optional<double> demand;
};

namespace detail {

inline void add_common(CLI::App* app, CommonOptions& o, bool simulation) {
  app->add_option("--seed", o.seed, "Base seed")->capture_default_str();
  app->add_option("--threads", o.threads, "Worker threads, 0 = all cores")->capture_default_str();
  app->add_option("--out", o.out, "Output file (written atomically); stdout if omitted");
  app->add_option("--format", o.format, "Output format")
      ->check(CLI::IsMember({"csv", "json"}))
      ->capture_default_str();
  if (simulation) {
    app->add_option("--trials", o.trials, "Monte Carlo trials")->capture_default_str();
    app->add_option("--ci-level", o.ci_level, "Two-sided confidence level")->capture_default_str();
  }
}

inline void add_instance(CLI::App* app, InstanceOptions& o) {
  app->add_option("--instance", o.kind, "iid-uniform | iid-exponential | hetero-exponential | half-tight | file | json")
      ->check(CLI::IsMember({"iid-uniform", "iid-exponential", "hetero-exponential", "half-tight", "file", "json"}))
      ->capture_default_str();
  app->add_option("--n", o.n, "Number of buyers")->capture_default_str();
  app->add_option("--k", o.k, "Units for sale")->capture_default_str();
  app->add_option("--delta", o.delta, "Base interval width (half-tight)")->capture_default_str();
  app->add_option("--instance-file", o.file, "Instance JSON file (--instance file)");
  app->add_option("--instance-json", o.inline_json, "Inline instance JSON (--instance json)");
}

inline void add_policy(CLI::App* app, PolicyOptions& o) {
  auto* r = app->add_option("--r", o.r, "Price at the r-th largest sample (default k)");
  auto* p = app->add_option("--price", o.price, "Fixed price");
  auto* q = app->add_option("--demand", o.demand, "Price with expected demand q");
  r->excludes(p)->excludes(q);
  p->excludes(q);
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw config_error("cannot read file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline Instance build_instance(const InstanceOptions& o, Echo& echo) {
  echo.add("instance", o.kind);
  if (o.kind == "file") {
    if (o.file.empty()) throw config_error("--instance file needs --instance-file");
    echo.add("instance-file", o.file);
    return io::parse_instance(read_file(o.file));
  }
  if (o.kind == "json") {
    if (o.inline_json.empty()) throw config_error("--instance json needs --instance-json");
    const auto instance = io::parse_instance(o.inline_json);
    echo.add("instance-json", io::to_json(instance).dump());
    return instance;
  }
  echo.add("n", o.n);
  echo.add("k", o.k);
  if (o.n < 1) throw config_error("--n must be >= 1");
  if (o.kind == "iid-uniform") return Instance::iid(Uniform{0.0, 1.0}, o.n, o.k);
  if (o.kind == "iid-exponential") return Instance::iid(Exponential{1.0}, o.n, o.k);
  if (o.kind == "hetero-exponential") {
    std::vector<DistributionSpec> dists;
    for (std::size_t i = 1; i <= o.n; ++i)
      dists.emplace_back(Exponential{static_cast<double>(i) / static_cast<double>(o.n)});
    return Instance(std::move(dists), o.k);
  }
  echo.add("delta", o.delta);
  return half_tight_instance(HardInstanceParams::half_tight(o.n, o.k, o.delta));
}

inline PricePolicy build_policy(const PolicyOptions& o, std::size_t k, Echo& echo) {
  if (o.price) {
    echo.add("price", *o.price);
    return FixedPrice{*o.price};
  }
  if (o.demand) {
    echo.add("demand", *o.demand);
    return ExpectedDemandPrice{*o.demand};
  }
  const std::size_t r = o.r.value_or(k);
  echo.add("r", r);
  return SampleOrderStatistic{r};
}

inline void echo_sim(const CommonOptions& c, Echo& echo) {
  echo.add("seed", c.seed);
  echo.add("trials", c.trials);
  echo.add("ci-level", c.ci_level);
}

inline std::string render(const Table& table, const Echo& echo, const std::string& format) {
  if (format == "json") {
    json rows = json::array();
    for (const auto& row : table.rows) {
      json obj = json::object();
      for (std::size_t i = 0; i < table.header.size(); ++i) obj[table.header[i]] = row[i];
      rows.push_back(std::move(obj));
    }
    return json{{"args", echo.object()}, {"columns", table.header}, {"rows", std::move(rows)}}.dump(2) + "\n";
  }
  io::CsvTable csv;
  csv.comments.push_back(echo.line());
  csv.header = table.header;
  for (const auto& row : table.rows) {
    std::vector<std::string> cells;
    for (const auto& cell : row) cells.push_back(io::render_cell(cell));
    csv.rows.push_back(std::move(cells));
  }
  std::ostringstream out;
  io::write_csv(out, csv);
  return out.str();
}

/// Writes to a sibling temporary file and renames it over the target.
inline void write_atomically(const std::string& path, const std::string& text) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  fs::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw config_error("cannot open output file: " + tmp.string());
    f << text;
    f.close();
    if (!f) throw config_error("failed writing output file: " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw config_error("cannot rename output into place: " + path);
  }
}

inline void emit(const std::string& text, const CommonOptions& c, std::ostream& out) {
  if (c.out.empty()) {
    out << text;
  } else {
    write_atomically(c.out, text);
  }
}

inline std::vector<std::uint64_t> sorted_unique(std::vector<std::uint64_t> ks) {
  if (ks.empty()) throw config_error("--k list must be non-empty");
  std::sort(ks.begin(), ks.end());
  ks.erase(std::unique(ks.begin(), ks.end()), ks.end());
  if (ks.front() < 1) throw config_error("--k values must be >= 1");
  return ks;
}

inline json join_list(const std::vector<std::uint64_t>& ks) {
  std::string s;
  for (auto k : ks) s += (s.empty() ? "" : ",") + std::to_string(k);
  return s;
}

inline std::vector<json> hard_cells(const HardInstanceReport& rep) {
  auto cells = io::report_cells(rep.sim);
  cells.emplace_back(rep.s);
  cells.emplace_back(rep.capacity_exhaust_prob);
  return cells;
}

inline std::vector<std::string> hard_header(std::size_t k) {
  auto h = io::report_header(k);
  h.emplace_back("s");
  h.emplace_back("capacity_exhaust_prob");
  return h;
}

inline json violation_json(const oracle::LemmaViolation& v) {
  json pairs = json::array();
  for (const auto& [a, b] : v.pairs) pairs.push_back({a, b});
  return {{"n", v.n},       {"scenario_index", v.scenario_index}, {"pairs", std::move(pairs)}, {"lemma", v.lemma},
          {"tuple", v.tuple}, {"lhs", v.lhs.str()},             {"rhs", v.rhs.str()}};
}

}  // namespace detail

inline int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Single-sample static pricing experiments for k-unit prophet inequalities", "ssp"};
  app.require_subcommand(1);

  CommonOptions common;
  InstanceOptions inst;
  PolicyOptions pol;

  auto* simulate = app.add_subcommand("simulate", "Estimate the competitive ratio of one pricing rule");
  detail::add_common(simulate, common, true);
  detail::add_instance(simulate, inst);
  detail::add_policy(simulate, pol);

  std::size_t r_max = 0;
  auto* sweep = app.add_subcommand("sweep-r", "Estimate the ratio for r = 1..r-max (row r seeded with seed ^ r)");
  detail::add_common(sweep, common, true);
  detail::add_instance(sweep, inst);
  sweep->add_option("--r-max", r_max, "Largest r (default k)");

  std::vector<std::uint64_t> ks{1, 10, 100, 1000, 10000, 100000};
  auto* bounds = app.add_subcommand("bound-table", "Closed-form bounds, asymptotes and Poisson fixed points per k");
  detail::add_common(bounds, common, false);
  bounds->add_option("--k", ks, "Capacities (comma separated)")->delimiter(',');

  std::size_t n_max = 5;
  auto* lemmas = app.add_subcommand("verify-lemmas", "Exhaustive exact check of the rank lemmas (JSON output)");
  detail::add_common(lemmas, common, false);
  lemmas->add_option("--n-max", n_max, "Largest number of sample pairs (<= 6)")->capture_default_str();

  std::string family = "half-tight";
  double epsilon = 0.1;
  double spike = 1000.0;
  std::vector<double> values{0.991, 0.993, 0.995};
  double radius = 1e-4;
  auto* hard = app.add_subcommand("hard-instance", "Run a pricing rule on an adversarial family");
  detail::add_common(hard, common, true);
  hard->add_option("--family", family, "half-tight | tightness | disjoint")
      ->check(CLI::IsMember({"half-tight", "tightness", "disjoint"}))
      ->capture_default_str();
  hard->add_option("--n", inst.n, "Number of buyers")->capture_default_str();
  hard->add_option("--k", inst.k, "Units for sale")->capture_default_str();
  hard->add_option("--delta", inst.delta, "Base interval width (half-tight)")->capture_default_str();
  hard->add_option("--epsilon", epsilon, "Tightness slack (tightness)")->capture_default_str();
  hard->add_option("--spike", spike, "Spike scale N: value N^2 with probability 1/N (tightness)")
      ->capture_default_str();
  hard->add_option("--values", values, "Interval centres (disjoint)")->delimiter(',');
  hard->add_option("--radius", radius, "Interval half-width (disjoint)")->capture_default_str();
  detail::add_policy(hard, pol);

  auto* poisson = app.add_subcommand("poisson-opt", "Poisson fixed point E[min(X,k)]/k = Pr(X <= k-1) per k");
  detail::add_common(poisson, common, false);
  poisson->add_option("--k", ks, "Capacities (comma separated)")->delimiter(',');

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kConfig;
  }

  try {
    Table table;
    Echo echo;
    int status = kOk;
    std::string text;

    if (simulate->parsed()) {
      echo.command = "simulate";
      const auto instance = detail::build_instance(inst, echo);
      const auto policy = detail::build_policy(pol, instance.k(), echo);
      detail::echo_sim(common, echo);
      const auto report = estimate_ratio(instance, policy, common.sim());
      table.header = io::report_header(instance.k());
      table.rows.push_back(io::report_cells(report));
    } else if (sweep->parsed()) {
      echo.command = "sweep-r";
      const auto instance = detail::build_instance(inst, echo);
      const std::size_t top = r_max == 0 ? instance.k() : r_max;
      echo.add("r-max", top);
      detail::echo_sim(common, echo);
      table.header = io::report_header(instance.k());
      for (const auto& row : sweep_r(instance, common.sim(), top)) table.rows.push_back(io::report_cells(row.report));
    } else if (bounds->parsed()) {
      echo.command = "bound-table";
      const auto list = detail::sorted_unique(ks);
      echo.add("k", detail::join_list(list));
      table.header = {"k",          "r",          "bound",          "status",         "asymptote",
                      "gap",        "unproven_bound", "exact_tail",   "moderate_dev_tail", "moderate_dev_regime",
                      "poisson_lambda", "poisson_ratio", "poisson_asymptote"};
      for (auto k : list) {
        const auto r = recommended_r(k);
        const double bound = single_sample_bound(r, k);
        const double asym = single_sample_asymptote(static_cast<double>(k));
        std::vector<json> row{k, r, bound, is_vacuous(bound) ? "vacuous" : "ok", asym, asym - bound,
                              unproven_bound(r, k)};
        try {
          const auto est = moderate_dev_estimate(k, 2.0);
          row.emplace_back(moderate_dev_exact_tail(est, k));
          row.emplace_back(est.tail);
          row.emplace_back(est.in_asymptotic_regime);
        } catch (const std::domain_error&) {
          row.insert(row.end(), 3, json());
        }
        const auto fp = poisson_optimal_lambda(k);
        row.emplace_back(fp.lambda);
        row.emplace_back(fp.ratio);
        row.emplace_back(full_information_asymptote(static_cast<double>(k)));
        table.rows.push_back(std::move(row));
      }
    } else if (lemmas->parsed()) {
      echo.command = "verify-lemmas";
      echo.add("n-max", n_max);
      const auto sweep_result = oracle::verify_lemmas(n_max, common.threads);
      json violations = json::array();
      for (const auto& v : sweep_result.violations) violations.push_back(detail::violation_json(v));
      json per_lemma = json::object();
      for (const auto& [name, count] : sweep_result.tuples_checked) per_lemma[name] = count;
      const json summary{{"args", echo.object()},
                         {"n", n_max},
                         {"scenarios_checked", sweep_result.scenarios_checked},
                         {"tuples_checked_per_lemma", std::move(per_lemma)},
                         {"violations", std::move(violations)}};
      text = summary.dump(2) + "\n";
      if (!sweep_result.violations.empty()) {
        status = kViolation;
        err << "verify-lemmas: " << sweep_result.violations.size() << " violation(s)\n";
      }
    } else if (hard->parsed()) {
      echo.command = "hard-instance";
      echo.add("family", family);
      HardInstanceReport rep;
      if (family == "half-tight") {
        echo.add("n", inst.n);
        echo.add("k", inst.k);
        echo.add("delta", inst.delta);
        const auto instance = half_tight_instance(HardInstanceParams::half_tight(inst.n, inst.k, inst.delta));
        const auto policy = detail::build_policy(pol, inst.k, echo);
        detail::echo_sim(common, echo);
        rep = run_hard_instance(instance, policy, inst.k, common.sim());
      } else if (family == "tightness") {
        echo.add("n", inst.n);
        echo.add("k", inst.k);
        echo.add("epsilon", epsilon);
        echo.add("spike", spike);
        const auto policy = detail::build_policy(pol, inst.k, echo);
        detail::echo_sim(common, echo);
        rep = tightness_experiment(inst.k, epsilon, inst.n, spike, policy, common.sim());
      } else {
        std::string list;
        for (double v : values) list += (list.empty() ? "" : ",") + format_double(v);
        echo.add("values", list);
        echo.add("radius", radius);
        echo.add("k", inst.k);
        const auto instance = disjoint_support_instance(values, radius, inst.k);
        const auto policy = detail::build_policy(pol, inst.k, echo);
        detail::echo_sim(common, echo);
        rep = run_hard_instance(instance, policy, inst.k, common.sim());
      }
      table.header = detail::hard_header(rep.sim.k);
      table.rows.push_back(detail::hard_cells(rep));
    } else if (poisson->parsed()) {
      echo.command = "poisson-opt";
      const auto list = detail::sorted_unique(ks);
      echo.add("k", detail::join_list(list));
      table.header = {"k", "lambda", "ratio", "residual", "normalized_gap", "asymptote"};
      for (auto k : list) {
        const auto fp = poisson_optimal_lambda(k);
        const double kd = static_cast<double>(k);
        json normalized = k > 1 ? json((1.0 - fp.ratio) * std::sqrt(kd / std::log(kd))) : json();
        table.rows.push_back({k, fp.lambda, fp.ratio, fp.residual, normalized, full_information_asymptote(kd)});
      }
    }

    if (text.empty()) text = detail::render(table, echo, common.format);
    detail::emit(text, common, out);
    return status;
  } catch (const numeric_error& e) {
    err << "numeric error: " << e.what() << "\n";
    return kNumeric;
  } catch (const std::invalid_argument& e) {
    err << "config error: " << e.what() << "\n";
    return kConfig;
  } catch (const std::domain_error& e) {
    err << "config error: " << e.what() << "\n";
    return kConfig;
  } catch (const std::length_error& e) {
    err << "config error: " << e.what() << "\n";
    return kConfig;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kNumeric;
  }
}

/// Convenience overload taking the arguments after the program name.
inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  std::vector<const char*> argv{"ssp"};
  for (const auto& a : args) argv.push_back(a.c_str());
  return run(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace ssp::cli
