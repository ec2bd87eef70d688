#pragma once

#include <json.hpp>

#include <cstdint>
#include <string>
#include <vector>

namespace nfdm {

struct ExperimentConfig {
  std::string id;
  std::uint64_t seed = 1;
  std::string output_dir = ".";
  int trials = 1;
  std::vector<double> sweep;
  nlohmann::json doc;  // preset merged with the user document
  std::string hash;    // FNV-1a 64 of the canonical dump without output_dir, 16 hex digits
};

std::uint64_t fnv1a64(const std::string& s);

// Merges `user` onto the preset named by user["experiment"]. Keys absent from the preset,
// type mismatches and invalid values raise InvalidParams before anything is computed.
ExperimentConfig parse_experiment_config(const nlohmann::json& user);
ExperimentConfig load_experiment_config(const std::string& path);

}  // namespace nfdm
