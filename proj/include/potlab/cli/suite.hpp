#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "potlab/cli/config.hpp"
#include "potlab/cli/experiments.hpp"

namespace potlab::cli {

/// One acceptance criterion: the experiment runs that decide it and the
/// runtime budget on one core.
struct Criterion {
  int id = 0;
  std::string title;
  std::vector<ExperimentConfig> runs;
  double budget_seconds = 0.0;
};

/// Criteria 1 to 11 with the given base seed. Criterion 12 (repeatability of
/// the whole suite) is decided by comparing two suite reports.
std::vector<Criterion> acceptance_battery(std::uint64_t seed);

struct CriterionResult {
  int id = 0;
  std::string title;
  bool pass = false;
  double seconds = 0.0;  // kept out of the report
  double budget_seconds = 0.0;
  std::string summary;   // first failing verdict, or the headline values
  std::string error;     // module error, if any
  Json report;
};

struct SuiteResult {
  std::vector<CriterionResult> criteria;
  std::string report;  // serialized JSON, deterministic for a fixed seed
  bool pass() const;
};

/// Runs the battery; `progress` (may be null) is called after each criterion.
SuiteResult run_suite(std::uint64_t seed, void (*progress)(const CriterionResult&) = nullptr);

}  // namespace potlab::cli
