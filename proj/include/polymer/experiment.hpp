// Copyright 2026 The polymer-lab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

namespace polymer {

/// Invalid or malformed configuration; the message names the offending location.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Recognized experiment kinds.
const std::vector<std::string>& experiment_kinds();

/// Built-in parameter and budget defaults for a kind; user values are merged over them.
nlohmann::json default_params(const std::string& kind);
nlohmann::json default_budget(const std::string& kind);

struct ExperimentConfig {
  std::string experiment;
  nlohmann::json params = nlohmann::json::object();  // defaults merged with user values
  nlohmann::json budget = nlohmann::json::object();
  std::uint64_t seed = 1;
  int workers = 1;
  std::string output = "results";

  /// Parses and validates config text; `source` labels error messages.
  static ExperimentConfig parse(const std::string& text, const std::string& source = "config");
  static ExperimentConfig load(const std::string& path);
  /// Config for `kind` with default params and budget.
  static ExperimentConfig defaults(const std::string& kind);
  nlohmann::json to_json() const;
};

/// One metric of one task; self-describing through its parameter tuple and seed.
struct ResultRecord {
  std::string experiment;
  std::int64_t task = 0;
  std::uint64_t seed = 0;  // master seed; the task stream is Rng::for_task(seed, task)
  nlohmann::json params = nlohmann::json::object();
  std::string metric;
  double value = 0.0;  // NaN is written as null
  double std_error = 0.0;
  nlohmann::json extra = nlohmann::json::object();
  double wall_ms = 0.0;

  nlohmann::json to_json() const;
  static ResultRecord from_json(const nlohmann::json& j);
};

struct RunResult {
  std::vector<ResultRecord> records;  // in task order
  std::vector<std::string> failures;  // "task <i>: <message>"
  std::size_t tasks = 0;
};

/// Expands the config into independent tasks, runs them on cfg.workers threads
/// and merges the records in task order.
RunResult run_experiment(const ExperimentConfig& cfg);

/// Writes records.jsonl and summary.txt into `dir` (created if needed).
void write_run(const ExperimentConfig& cfg, const RunResult& result, const std::string& dir);

/// Reads every records.jsonl under `dir` (the directory itself and its direct
/// subdirectories); returns an empty list when none exist.
std::vector<ResultRecord> read_records(const std::string& dir);

// ---------------------------------------------------------------------------
// Acceptance verdicts, computed only from records

struct Verdict {
  std::string criterion;
  std::string status;  // "pass", "fail" or "missing"
  std::vector<std::string> lines;
  nlohmann::json metrics = nlohmann::json::object();

  nlohmann::json to_json() const;
};

const std::vector<std::string>& criterion_names();
/// Experiment kind whose records a criterion reads.
std::string criterion_kind(const std::string& criterion);
/// Criteria evaluated from one kind's records.
std::vector<std::string> criteria_for_kind(const std::string& kind);

/// Throws std::invalid_argument for an unknown criterion name.
Verdict summarize(const std::string& criterion, const std::vector<ResultRecord>& records);

}  // namespace polymer
