#pragma once

#include "nfdm/config.hpp"

#include <json.hpp>

#include <string>
#include <vector>

namespace nfdm {

inline constexpr const char* kExperimentIds[] = {"ook-1soliton",      "signalset-a",    "signalset-b", "multisoliton-grid",
                                                 "contspec-rates",    "wdm-baseline",   "eig-noise"};

// Full default document for an experiment id; throws InvalidParams for unknown ids.
nlohmann::json experiment_preset(const std::string& id);

// Builds the typed parameters of the experiment, throwing InvalidParams on bad values.
void validate_experiment(const ExperimentConfig& cfg);

struct SummaryRow {
  double x = 0.0;  // sweep value
  double bits_per_symbol = 0.0;
  double rho = 0.0;
  long trials = 0;
};

struct ExperimentResult {
  std::string id;
  std::string sweep_name;
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;  // one per (sweep point, trial), formatted
  std::vector<SummaryRow> summary_rows;
  nlohmann::json summary;
};

// Runs the named pipeline. Trials run in parallel with seeds trial_seed(seed, point << 32 | trial);
// rows are collected in order, so the output does not depend on the thread count.
ExperimentResult run_experiment(const ExperimentConfig& cfg);

struct ExperimentFiles {
  std::string csv, summary_csv, summary_json;
};

// Writes <id>.csv, <id>_summary.csv and <id>_summary.json into cfg.output_dir.
ExperimentFiles write_experiment(const ExperimentResult& r, const ExperimentConfig& cfg);

}  // namespace nfdm
