// Copyright 2026 The polymer-lab Authors
// SPDX-License-Identifier: Apache-2.0

// Runs every experiment kind with its default configuration, writes the
// records, reads them back and prints one verdict line per criterion.

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <string>

#include "polymer/experiment.hpp"

int main(int argc, char** argv) {
  namespace fs = std::filesystem;
  const fs::path root = argc > 1 ? fs::path(argv[1]) : fs::path("acceptance_out");
  int workers = 1;
  if (const char* w = std::getenv("POLYMER_LAB_WORKERS")) workers = std::max(1, std::atoi(w));

  std::map<std::string, polymer::Verdict> verdicts;
  for (const auto& kind : polymer::experiment_kinds()) {
    polymer::ExperimentConfig cfg = polymer::ExperimentConfig::defaults(kind);
    cfg.workers = workers;
    cfg.output = (root / kind).string();
    const auto start = std::chrono::steady_clock::now();
    const polymer::RunResult result = polymer::run_experiment(cfg);
    polymer::write_run(cfg, result, cfg.output);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::cerr << kind << ": " << result.tasks << " tasks, " << result.failures.size() << " failed, "
              << secs << " s\n";
    const auto records = polymer::read_records(cfg.output);
    for (const auto& c : polymer::criteria_for_kind(kind)) verdicts[c] = polymer::summarize(c, records);
  }

  bool complete = true;
  int index = 0;
  std::cout << "\nacceptance criteria\n";
  for (const auto& name : polymer::criterion_names()) {
    ++index;
    const auto it = verdicts.find(name);
    const std::string status = it == verdicts.end() ? "missing" : it->second.status;
    std::string tag = status == "pass" ? "PASS" : status == "fail" ? "FAIL" : "MISSING";
    std::cout << tag << "  " << index << " " << name << "\n";
    if (it != verdicts.end())
      for (const auto& line : it->second.lines) std::cout << "        " << line << "\n";
    complete = complete && status != "missing";
  }
  return complete ? 0 : 1;
}
