#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "cli.hpp"
#include "ssp/io.hpp"

using namespace ssp;
using nlohmann::json;

namespace {

struct CliResult {
  int code = 0;
  std::string out;
  std::string err;
};

CliResult run_cli(const std::vector<std::string>& args) {
  std::ostringstream out;
  std::ostringstream err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

io::CsvTable parse_csv(const std::string& text) {
  std::istringstream in(text);
  return io::read_csv(in);
}

std::filesystem::path temp_path(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("ssp_test_" + name);
}

}  // namespace

TEST(Io, InstanceRoundTrip) {
  const Instance inst({Uniform{0.0, 1.0}, Exponential{2.5}, Pareto{1.0, 3.0},
                       SpikeMixture::at(0.999, 1.0, 100.0, 0.01)},
                      2);
  const auto text = io::to_json(inst).dump();
  EXPECT_EQ(io::parse_instance(text), inst);
  const auto j = json::parse(text);
  EXPECT_EQ(j.at("k"), 2);
  EXPECT_EQ(j.at("dists").at(0).at("family"), "uniform");
  EXPECT_EQ(j.at("dists").at(3).at("spike_prob"), 0.01);
}

TEST(Io, InstanceSchemaErrors) {
  EXPECT_THROW(io::parse_instance("{not json"), config_error);
  EXPECT_THROW(io::parse_instance(R"({"k": 1})"), config_error);
  EXPECT_THROW(io::parse_instance(R"({"k": 1, "dists": [{"family": "gamma"}]})"), config_error);
  EXPECT_THROW(io::parse_instance(R"({"k": 1, "dists": [{"family": "uniform", "lo": 0}]})"), config_error);
  EXPECT_THROW(io::parse_instance(R"({"k": -1, "dists": [{"family": "exponential", "rate": 1}]})"), config_error);
  EXPECT_THROW(io::parse_instance(R"({"k": 2, "dists": [{"family": "exponential", "rate": 1}]})"), config_error);
  EXPECT_THROW(io::parse_instance(R"({"k": 1, "dists": [{"family": "uniform", "lo": 1, "hi": 0}]})"),
               config_error);
}

TEST(Io, PolicyRoundTrip) {
  for (const PricePolicy& p :
       {PricePolicy{SampleOrderStatistic{3}}, PricePolicy{FixedPrice{0.7}}, PricePolicy{ExpectedDemandPrice{5.0}}})
    EXPECT_EQ(io::policy_from_json(json::parse(io::to_json(p).dump())), p);
  EXPECT_EQ(io::to_json(PricePolicy{SampleOrderStatistic{3}}), json::parse(R"({"rule": "sample_order_statistic", "r": 3})"));
  EXPECT_THROW(io::policy_from_json(json::parse(R"({"rule": "coin_flip"})")), config_error);
}

TEST(Io, ReportCsvRoundTrip) {
  const auto inst = Instance::iid(Uniform{0.0, 1.0}, 5, 2);
  const auto rep = estimate_ratio(inst, SampleOrderStatistic{2}, {3000, 4, 0.99, 1});
  io::CsvTable table;
  table.comments.push_back("example");
  table.header = io::report_header(2);
  table.rows.push_back(io::report_row(rep));
  std::ostringstream out;
  io::write_csv(out, table);
  const auto back = parse_csv(out.str());
  EXPECT_EQ(back.comments, table.comments);
  EXPECT_EQ(back.header, table.header);
  EXPECT_EQ(back.rows, table.rows);
  EXPECT_EQ(std::stod(back.rows[0][back.column("ratio")]), rep.ratio);
  EXPECT_EQ(back.header.back(), "picks_2");
}

TEST(Cli, SimulateMatchesLibraryAndIsDeterministic) {
  const std::vector<std::string> args{"simulate", "--instance", "iid-uniform", "--n",    "20",   "--k",
                                      "3",        "--r",        "3",           "--trials", "100000", "--seed", "7"};
  const auto a = run_cli(args);
  ASSERT_EQ(a.code, 0) << a.err;
  EXPECT_EQ(a.out, run_cli(args).out);
  auto threaded = args;
  threaded.insert(threaded.end(), {"--threads", "8"});
  EXPECT_EQ(a.out, run_cli(threaded).out);

  const auto table = parse_csv(a.out);
  ASSERT_EQ(table.comments.size(), 1u);
  EXPECT_NE(table.comments[0].find("--seed 7"), std::string::npos);
  ASSERT_EQ(table.rows.size(), 1u);
  const auto rep = estimate_ratio(Instance::iid(Uniform{0.0, 1.0}, 20, 3), SampleOrderStatistic{3},
                                  {100000, 7, 0.99, 1});
  EXPECT_EQ(table.rows[0], io::report_row(rep));
  EXPECT_GE(rep.ratio, 0.5 - 3.0 * rep.stderr_ratio);
}

TEST(Cli, ExitCodes) {
  EXPECT_EQ(run_cli({"simulate", "--n", "20", "--k", "3", "--r", "21"}).code, 2);
  EXPECT_EQ(run_cli({"simulate", "--n", "20", "--k", "30"}).code, 2);
  EXPECT_EQ(run_cli({"simulate", "--r", "1", "--price", "0.5"}).code, 2);
  EXPECT_EQ(run_cli({"simulate", "--instance", "bogus"}).code, 2);
  EXPECT_EQ(run_cli({"simulate", "--instance", "file", "--instance-file", "/nonexistent/x.json"}).code, 2);
  EXPECT_EQ(run_cli({"verify-lemmas", "--n-max", "7"}).code, 2);
  EXPECT_EQ(run_cli({"bound-table", "--k", "0"}).code, 2);
  EXPECT_EQ(run_cli({}).code, 2);
  EXPECT_EQ(run_cli({"--help"}).code, 0);
  EXPECT_EQ(run_cli({"simulate", "--trials", "0"}).code, 2);
}

TEST(Cli, InstanceFromFileAndInlineJson) {
  const auto path = temp_path("instance.json");
  const Instance inst({Exponential{1.0}, Exponential{0.5}, Uniform{0.0, 2.0}}, 2);
  {
    std::ofstream f(path);
    f << io::to_json(inst).dump(2);
  }
  const auto from_file = run_cli({"simulate", "--instance", "file", "--instance-file", path.string(), "--trials", "500"});
  ASSERT_EQ(from_file.code, 0) << from_file.err;
  const auto inline_json =
      run_cli({"simulate", "--instance", "json", "--instance-json", io::to_json(inst).dump(), "--trials", "500"});
  ASSERT_EQ(inline_json.code, 0) << inline_json.err;
  EXPECT_EQ(parse_csv(from_file.out).rows, parse_csv(inline_json.out).rows);
  EXPECT_EQ(parse_csv(from_file.out).rows[0],
            io::report_row(estimate_ratio(inst, SampleOrderStatistic{2}, {500, 1, 0.99, 1})));
  std::filesystem::remove(path);
}

TEST(Cli, AtomicOutputFile) {
  const auto path = temp_path("out.csv");
  std::filesystem::remove(path);
  const auto res = run_cli({"poisson-opt", "--k", "1,100", "--out", path.string()});
  ASSERT_EQ(res.code, 0) << res.err;
  EXPECT_TRUE(res.out.empty());
  std::ifstream f(path);
  std::stringstream ss;
  ss << f.rdbuf();
  EXPECT_EQ(ss.str(), run_cli({"poisson-opt", "--k", "1,100"}).out);
  EXPECT_FALSE(std::filesystem::exists(path.string() + ".tmp"));
  std::filesystem::remove(path);
}

TEST(Cli, BoundTable) {
  const auto res = run_cli({"bound-table", "--k", "10000,1,100"});
  ASSERT_EQ(res.code, 0) << res.err;
  const auto t = parse_csv(res.out);
  ASSERT_EQ(t.rows.size(), 3u);
  EXPECT_EQ(t.rows[0][t.column("k")], "1");
  EXPECT_EQ(t.rows[1][t.column("k")], "100");
  EXPECT_EQ(t.rows[2][t.column("k")], "10000");
  EXPECT_NEAR(std::stod(t.rows[0][t.column("poisson_ratio")]), 0.5, 1e-10);
  EXPECT_NEAR(std::stod(t.rows[0][t.column("poisson_lambda")]), std::log(2.0), 1e-10);
  EXPECT_EQ(t.rows[0][t.column("status")], "vacuous");
  EXPECT_EQ(t.rows[0][t.column("exact_tail")], "");
  EXPECT_EQ(t.rows[1][t.column("r")], "69");
  EXPECT_EQ(std::stod(t.rows[1][t.column("bound")]), single_sample_bound(69, 100));
  EXPECT_LT(std::stod(t.rows[2][t.column("bound")]), std::stod(t.rows[2][t.column("poisson_ratio")]));

  const auto as_json = run_cli({"bound-table", "--k", "100", "--format", "json"});
  const auto j = json::parse(as_json.out);
  EXPECT_EQ(j.at("rows").at(0).at("r"), 69);
  EXPECT_EQ(j.at("args").at("command"), "bound-table");
}

TEST(Cli, VerifyLemmasSummary) {
  const auto res = run_cli({"verify-lemmas", "--n-max", "3"});
  ASSERT_EQ(res.code, 0) << res.err;
  const auto j = json::parse(res.out);
  EXPECT_EQ(j.at("n"), 3);
  EXPECT_EQ(j.at("scenarios_checked"), 19);
  EXPECT_TRUE(j.at("violations").empty());
  EXPECT_EQ(j.at("tuples_checked_per_lemma").size(), oracle::lemma_names().size());
  EXPECT_EQ(res.out, run_cli({"verify-lemmas", "--n-max", "3", "--threads", "8"}).out);
}

TEST(Cli, HardInstanceColumns) {
  const auto res = run_cli({"hard-instance", "--family", "half-tight", "--n", "50", "--k", "3", "--trials", "2000"});
  ASSERT_EQ(res.code, 0) << res.err;
  const auto t = parse_csv(res.out);
  auto expected = io::report_header(3);
  expected.push_back("s");
  expected.push_back("capacity_exhaust_prob");
  EXPECT_EQ(t.header, expected);
  EXPECT_EQ(t.rows[0][t.column("s")], "3");

  const auto tight = run_cli({"hard-instance", "--family", "tightness", "--k", "3", "--n", "50"});
  EXPECT_EQ(tight.code, 2);
  const auto disjoint = run_cli({"hard-instance", "--family", "disjoint", "--k", "2", "--r", "2", "--trials", "500",
                                 "--format", "json"});
  ASSERT_EQ(disjoint.code, 0) << disjoint.err;
  EXPECT_EQ(json::parse(disjoint.out).at("rows").at(0).at("picks_0"), 0);
}

TEST(Cli, SweepAndJsonRoundTrip) {
  const auto res = run_cli({"sweep-r", "--instance", "hetero-exponential", "--n", "10", "--k", "3", "--trials", "800",
                            "--format", "json"});
  ASSERT_EQ(res.code, 0) << res.err;
  const auto j = json::parse(res.out);
  ASSERT_EQ(j.at("rows").size(), 3u);
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_EQ(j.at("rows").at(i).at("r_or_rule"), std::to_string(i + 1));
    EXPECT_EQ(j.at("rows").at(i).at("seed"), 1u ^ (i + 1));
  }
  EXPECT_EQ(j.at("args").at("r-max"), 3);
}
