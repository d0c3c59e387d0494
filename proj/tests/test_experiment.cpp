// Copyright 2026 The polymer-lab Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <string>

#include "polymer/experiment.hpp"

using namespace polymer;
using nlohmann::json;

namespace {

std::string error_of(const std::string& text) {
  try {
    ExperimentConfig::parse(text, "cfg");
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

bool contains(const std::string& s, const std::string& part) { return s.find(part) != std::string::npos; }

std::vector<json> strip_wall(const std::vector<ResultRecord>& rs) {
  std::vector<json> out;
  for (const auto& r : rs) {
    json j = r.to_json();
    j.erase("wall_ms");
    out.push_back(j);
  }
  return out;
}

ResultRecord rec(const std::string& kind, std::int64_t task, const std::string& metric, double value, json params,
                 json extra = json::object()) {
  ResultRecord r;
  r.experiment = kind;
  r.task = task;
  r.metric = metric;
  r.value = value;
  r.params = std::move(params);
  r.extra = std::move(extra);
  return r;
}

}  // namespace

TEST_CASE("config errors name their location") {
  CHECK(contains(error_of("{\"experiment\": \"green\""), "parse error at byte"));
  CHECK(contains(error_of("[]"), "top level"));
  CHECK(contains(error_of(R"({"experiment": "nope"})"), "unknown kind 'nope'"));
  CHECK(contains(error_of(R"({"experiment": "green", "colour": 1})"), "unknown key 'colour'"));
  CHECK(contains(error_of(R"({"experiment": "green", "params": {"dims": []}})"), "params.dims"));
  CHECK(contains(error_of(R"({"experiment": "green", "params": {"dimz": [3]}})"), "params.dimz: unknown key"));
  CHECK(contains(error_of(R"({"experiment": "green", "params": {"tol": "small"}})"), "params.tol: expected number"));
  CHECK(contains(error_of(R"({"experiment": "green", "budget": {"mc_walks": 0}})"), "budget.mc_walks"));
  CHECK(contains(error_of(R"({"experiment": "green", "seed": -3})"), "seed"));
  CHECK(contains(error_of(R"({"experiment": "green", "workers": 0})"), "workers"));
  CHECK(contains(error_of(R"({"experiment": "oracle_compare", "params": {"ns": [2, 9]}})"), "params.ns"));
  CHECK(contains(error_of(R"({"experiment": "tails_scan", "params": {"families": ["d5"]}})"), "params.families"));
  CHECK(contains(error_of(R"({"experiment": "level_sets", "params": {"n": 1.5}})"), "params.n: expected an integer"));
  CHECK(error_of(R"({"experiment": "green", "params": {"dims": [3]}, "seed": 9})").empty());
}

TEST_CASE("user values are merged over defaults") {
  const ExperimentConfig c =
      ExperimentConfig::parse(R"({"experiment": "tails_scan", "params": {"d3": {"n": 2048}}, "seed": 4})");
  CHECK(c.params["d3"]["n"] == 2048);
  CHECK(c.params["d3"]["delta0"] == 0.9);
  CHECK(c.budget["particles"] == 400);
  CHECK(c.seed == 4);
  CHECK(ExperimentConfig::parse(c.to_json().dump()).to_json() == c.to_json());
}

TEST_CASE("records round trip with non-finite values as null") {
  ResultRecord r = rec("green", 3, "m", std::nan(""), {{"d", 3}});
  r.std_error = 0.5;
  const json j = r.to_json();
  CHECK(j["value"].is_null());
  const ResultRecord back = ResultRecord::from_json(j);
  CHECK(std::isnan(back.value));
  CHECK(back.std_error == 0.5);
  CHECK(back.params == r.params);
}

TEST_CASE("identity suite finds no violations") {
  ExperimentConfig c = ExperimentConfig::parse(
      R"({"experiment": "identity_suite", "params": {"n_max": 100, "chunk": 250}, "budget": {"instances": 1000}})");
  const RunResult r = run_experiment(c);
  CHECK(r.failures.empty());
  const Verdict v = summarize("identity", r.records);
  CHECK(v.status == "pass");
  CHECK(v.metrics["instances"] == 1000.0);
  CHECK(summarize("variance", r.records).status == "pass");
}

TEST_CASE("records are identical across runs and worker counts") {
  const std::string text =
      R"({"experiment": "identity_suite", "params": {"n_max": 50, "chunk": 100}, "budget": {"instances": 400}, "seed": 77})";
  ExperimentConfig c = ExperimentConfig::parse(text);
  const auto a = strip_wall(run_experiment(c).records);
  const auto b = strip_wall(run_experiment(c).records);
  c.workers = 3;
  const auto w = strip_wall(run_experiment(c).records);
  CHECK(a == b);
  CHECK(a == w);
  c.seed = 78;
  c.workers = 1;
  ExperimentConfig g = ExperimentConfig::parse(
      R"({"experiment": "oracle_compare", "params": {"ns": [3]}, "budget": {"samples": 20000, "tail_samples": 1000}})");
  const auto g1 = strip_wall(run_experiment(g).records);
  g.workers = 2;
  CHECK(g1 == strip_wall(run_experiment(g).records));
}

TEST_CASE("oracle comparison at n = 4") {
  ExperimentConfig c = ExperimentConfig::parse(
      R"({"experiment": "oracle_compare", "params": {"ns": [4]}, "budget": {"samples": 200000, "tail_samples": 20000}})");
  const RunResult r = run_experiment(c);
  REQUIRE(r.failures.empty());
  double tv = 1.0;
  for (const auto& rec : r.records)
    if (rec.metric == "tv") tv = rec.value;
  CHECK(tv < 0.01);
}

TEST_CASE("write and read a run") {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "polymer_lab_test_run";
  fs::remove_all(dir);
  ExperimentConfig c = ExperimentConfig::parse(
      R"({"experiment": "identity_suite", "params": {"n_max": 20, "chunk": 50}, "budget": {"instances": 100}})");
  const RunResult r = run_experiment(c);
  write_run(c, r, dir.string());
  CHECK(fs::exists(dir / "records.jsonl"));
  CHECK(fs::exists(dir / "summary.txt"));
  CHECK(fs::exists(dir / "verdicts.json"));
  const auto back = read_records(dir.string());
  CHECK(strip_wall(back) == strip_wall(r.records));
  CHECK(read_records((dir / "absent").string()).empty());
  fs::remove_all(dir);
}

TEST_CASE("task failures are recorded and the run continues") {
  // An infeasible strategy cell throws inside its task.
  ExperimentConfig c = ExperimentConfig::parse(
      R"({"experiment": "tails_scan", "params": {"families": ["ordering"], "ordering": {"xs": [24]}},
          "budget": {"particles": 50, "replicates": 1, "naive_samples": 1000, "ordering_upper_walks": 100}})");
  const RunResult r = run_experiment(c);
  CHECK(r.failures.size() == 1);
  bool logged = false;
  for (const auto& rec : r.records) logged = logged || rec.metric == "task_failed";
  CHECK(logged);
  CHECK(summarize("ordering", r.records).status == "fail");
}

TEST_CASE("summaries") {
  CHECK(summarize("identity", {}).status == "missing");
  CHECK(summarize("exponents_d3", {}).status == "missing");
  CHECK_THROWS_AS(summarize("nonsense", {}), std::invalid_argument);
  CHECK(criterion_names().size() == 12);
  for (const auto& name : criterion_names()) {
    CHECK(summarize(name, {}).status == "missing");
    const auto kinds = criteria_for_kind(criterion_kind(name));
    CHECK(std::find(kinds.begin(), kinds.end(), name) != kinds.end());
  }
}

TEST_CASE("slope criterion on exact synthetic data") {
  std::vector<ResultRecord> rs;
  std::int64_t task = 0;
  for (double xi : {2.0, 4.0, 8.0, 16.0}) {
    const json p = {{"family", "d3_xi"}, {"n", 4096}, {"xi", xi}};
    rs.push_back(rec("tails_scan", task++, "neg_log_lower", 50.0 * std::pow(xi, 0.8), p));
    rs.push_back(rec("tails_scan", task++, "neg_log_upper", 2.0 * std::pow(xi, 0.8),
                     {{"family", "d3_upper"}, {"scan", "xi"}, {"n", 4096}, {"xi", xi}}));
  }
  for (double n : {1024.0, 2048.0, 4096.0, 8192.0, 16384.0}) {
    rs.push_back(rec("tails_scan", task++, "neg_log_lower", 10.0 * std::cbrt(n), {{"family", "d3_n"}, {"n", n}, {"xi", 4.0}}));
    rs.push_back(rec("tails_scan", task++, "neg_log_upper", 0.5 * std::cbrt(n),
                     {{"family", "d3_upper"}, {"scan", "n"}, {"n", n}, {"xi", 4.0}}));
  }
  const Verdict v = summarize("exponents_d3", rs);
  CHECK(v.status == "pass");
  CHECK(v.metrics["lower xi-scan"]["slope"].get<double>() == doctest::Approx(0.8));
  // Bracketing fails when the upper bound claims a larger exponent value than the lower bound.
  rs[1].value = 1e6;
  CHECK(summarize("exponents_d3", rs).status == "fail");
}

TEST_CASE("ordering verdict uses Clopper-Pearson bounds on zero hits") {
  const json p = {{"family", "ordering"}, {"x", 48.0}};
  std::vector<ResultRecord> rs = {
      rec("tails_scan", 0, "p_lower", 1e-15, p),
      rec("tails_scan", 0, "p_naive", 0.0, p, {{"status", "zero_hits"}, {"upper_95", 3.7e-6}}),
      rec("tails_scan", 0, "p_upper", 0.15, p)};
  CHECK(summarize("ordering", rs).status == "pass");
  rs[0].value = 1e-3;
  CHECK(summarize("ordering", rs).status == "fail");
}

TEST_CASE("shipped configs load and match the built-in defaults") {
  for (const auto& kind : experiment_kinds()) {
    const ExperimentConfig c = ExperimentConfig::load(std::string(POLYMER_LAB_SOURCE_DIR) + "/configs/" + kind + ".json");
    const ExperimentConfig d = ExperimentConfig::defaults(kind);
    CHECK(c.experiment == kind);
    CHECK(c.params == d.params);
    CHECK(c.budget == d.budget);
  }
}
