// Copyright 2026 The polymer-lab Authors
// SPDX-License-Identifier: Apache-2.0

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "polymer/experiment.hpp"

namespace {

enum Exit { kOk = 0, kConfig = 1, kPartial = 2, kCriterion = 3 };

std::optional<std::string> env(const char* name) {
  const char* v = std::getenv(name);
  if (v == nullptr || *v == '\0') return std::nullopt;
  return std::string(v);
}

std::uint64_t parse_u64(const std::string& text, const std::string& where) {
  std::size_t used = 0;
  unsigned long long v = 0;
  try {
    v = std::stoull(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != text.size() || text.empty() || text[0] == '-')
    throw polymer::ConfigError(where + ": expected a non-negative integer, got '" + text + "'");
  return v;
}

int run(const std::string& path, const std::optional<std::uint64_t>& seed,
        const std::optional<int>& workers, const std::optional<std::string>& out) {
  polymer::ExperimentConfig cfg;
  try {
    cfg = polymer::ExperimentConfig::load(path);
    if (auto s = env("POLYMER_LAB_SEED")) cfg.seed = parse_u64(*s, "POLYMER_LAB_SEED");
    if (auto w = env("POLYMER_LAB_WORKERS")) {
      const auto v = parse_u64(*w, "POLYMER_LAB_WORKERS");
      if (v < 1 || v > 1024) throw polymer::ConfigError("POLYMER_LAB_WORKERS: must lie in [1, 1024]");
      cfg.workers = static_cast<int>(v);
    }
    if (seed) cfg.seed = *seed;
    if (workers) {
      if (*workers < 1 || *workers > 1024) throw polymer::ConfigError("--workers: must lie in [1, 1024]");
      cfg.workers = *workers;
    }
    if (out) {
      if (out->empty()) throw polymer::ConfigError("--out: must be nonempty");
      cfg.output = *out;
    }
  } catch (const polymer::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfig;
  }
  const polymer::RunResult result = polymer::run_experiment(cfg);
  polymer::write_run(cfg, result, cfg.output);
  {
    std::ofstream resolved(cfg.output + "/config.json");
    resolved << cfg.to_json().dump(2) << "\n";
  }
  std::cout << cfg.experiment << ": " << result.tasks << " tasks, " << result.records.size() << " records, "
            << result.failures.size() << " failed tasks -> " << cfg.output << "\n";
  for (const auto& f : result.failures) std::cerr << "task failure: " << f << "\n";
  return result.failures.empty() ? kOk : kPartial;
}

int summarize(const std::string& dir, const std::vector<std::string>& criteria) {
  for (const auto& c : criteria) {
    try {
      polymer::criterion_kind(c);
    } catch (const std::invalid_argument& e) {
      std::cerr << "config error: " << e.what() << "\n";
      return kConfig;
    }
  }
  std::vector<polymer::ResultRecord> records;
  try {
    records = polymer::read_records(dir);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kConfig;
  }
  nlohmann::json table = nlohmann::json::array();
  bool failed = false;
  for (const auto& c : criteria) {
    const polymer::Verdict v = polymer::summarize(c, records);
    std::cout << c << ": " << v.status << "\n";
    for (const auto& line : v.lines) std::cout << "  " << line << "\n";
    failed = failed || v.status == "fail";
    table.push_back(v.to_json());
  }
  std::cout << table.dump() << "\n";
  return failed ? kCriterion : kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"polymer_lab: experiments on random walks with random charges"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<int> workers;
  std::optional<std::string> out;
  auto* run_cmd = app.add_subcommand("run", "Run the experiment described by a config file");
  run_cmd->add_option("config", config_path, "Config file (JSON)")->required();
  run_cmd->add_option("--seed", seed, "Master seed (overrides POLYMER_LAB_SEED and the config)");
  run_cmd->add_option("--workers", workers, "Worker threads (overrides POLYMER_LAB_WORKERS and the config)");
  run_cmd->add_option("--out", out, "Output directory (overrides the config)");

  std::string dir;
  std::vector<std::string> criteria;
  auto* sum_cmd = app.add_subcommand("summarize", "Evaluate acceptance criteria from result records");
  sum_cmd->add_option("dir", dir, "Result directory")->required();
  sum_cmd->add_option("--criterion", criteria, "Criterion name, repeatable; 'all' for every criterion")
      ->required();

  std::string kind;
  auto* def_cmd = app.add_subcommand("defaults", "Print the full default config of an experiment kind");
  def_cmd->add_option("kind", kind, "Experiment kind")->required()->check(CLI::IsMember(polymer::experiment_kinds()));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfig;
  }
  if (run_cmd->parsed()) return run(config_path, seed, workers, out);
  if (def_cmd->parsed()) {
    std::cout << polymer::ExperimentConfig::defaults(kind).to_json().dump(2) << "\n";
    return kOk;
  }
  if (criteria.size() == 1 && criteria.front() == "all") criteria = polymer::criterion_names();
  return summarize(dir, criteria);
}
