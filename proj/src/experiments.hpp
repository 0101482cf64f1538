#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "stats.hpp"

namespace firetree {

// Shared configuration for every named experiment. Exactly one of c (critical
// regime p = c ln n / n), subcrit_a (subcritical p = n^-a) or an explicit p
// should be given; defaults per experiment apply otherwise. n and trials fall
// back to per-experiment desk-scale defaults when left at 0.
struct ExperimentConfig {
  std::string name;
  std::uint64_t n = 0;
  std::optional<double> c;
  std::optional<double> p;
  std::optional<double> subcrit_a;
  std::uint64_t trials = 0;
  std::uint64_t seed = 1;
  unsigned workers = 1;
  unsigned K = 8;           // max fires recorded per trial
  std::string out_dir;      // when set, <out>/<name>.csv and <name>.json are written
};

struct ExperimentReport {
  std::string name;
  std::uint64_t n = 0;
  double resolved_p = 0.0;
  std::uint64_t trials = 0;
  std::uint64_t dropped_trials = 0;
  std::string csv;          // header line + rows, deterministic bytes
  std::string summary_json;
  std::vector<TestReport> tests;

  bool all_passed() const {
    for (const TestReport& t : tests) {
      if (!t.passed) return false;
    }
    return true;
  }
};

const std::vector<std::string>& experiment_names();

// Runs the named experiment; throws std::invalid_argument on unknown names or
// bad configuration. Identical (config, seed) produce byte-identical CSV and
// JSON regardless of the worker count.
ExperimentReport run_experiment(const ExperimentConfig& config);

}  // namespace firetree
