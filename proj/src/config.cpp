#include "nfdm/config.hpp"

#include "nfdm/core.hpp"
#include "nfdm/experiments.hpp"
#include "nfdm/io.hpp"

#include <cstdio>

namespace nfdm {

using nlohmann::json;

std::uint64_t fnv1a64(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

namespace {

const char* type_name(const json& j) {
  if (j.is_number()) return "number";
  return j.type_name();
}

bool same_kind(const json& a, const json& b) {
  if (a.is_number() && b.is_number()) return true;
  return a.type() == b.type();
}

// Every key of `user` must exist in `preset` with a compatible type; arrays replace wholesale.
void check_keys(const json& user, const json& preset, const std::string& path) {
  for (auto it = user.begin(); it != user.end(); ++it) {
    const std::string key = path.empty() ? it.key() : path + "." + it.key();
    if (!preset.contains(it.key())) throw NfdmError(ErrorCode::InvalidParams, "unknown key '" + key + "'");
    const json& p = preset[it.key()];
    if (!same_kind(*it, p))
      throw NfdmError(ErrorCode::InvalidParams,
                      "key '" + key + "' expects " + type_name(p) + ", got " + type_name(*it));
    if (it->is_object()) check_keys(*it, p, key);
  }
}

}  // namespace

ExperimentConfig parse_experiment_config(const json& user) {
  if (!user.is_object()) throw NfdmError(ErrorCode::InvalidParams, "config must be a JSON object");
  if (!user.contains("experiment") || !user["experiment"].is_string())
    throw NfdmError(ErrorCode::InvalidParams, "missing string key 'experiment'");
  const std::string id = user["experiment"].get<std::string>();
  json doc = experiment_preset(id);
  check_keys(user, doc, "");
  doc.merge_patch(user);

  ExperimentConfig cfg;
  cfg.id = id;
  cfg.doc = doc;
  try {
    cfg.seed = doc.at("seed").get<std::uint64_t>();
    cfg.output_dir = doc.at("output_dir").get<std::string>();
    cfg.trials = doc.at("trials").get<int>();
    cfg.sweep = doc.at("sweep").get<std::vector<double>>();
  } catch (const json::exception& e) {
    throw NfdmError(ErrorCode::InvalidParams, e.what());
  }
  if (cfg.trials < 1) throw NfdmError(ErrorCode::InvalidParams, "trials must be >= 1");
  if (cfg.sweep.empty()) throw NfdmError(ErrorCode::InvalidParams, "sweep must be non-empty");

  json hashed = doc;
  hashed.erase("output_dir");
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(fnv1a64(hashed.dump())));
  cfg.hash = buf;

  validate_experiment(cfg);
  return cfg;
}

ExperimentConfig load_experiment_config(const std::string& path) {
  json j;
  try {
    j = json::parse(read_text_file(path), nullptr, true, true);
  } catch (const json::parse_error& e) {
    throw NfdmError(ErrorCode::Parse, path + ": " + e.what());
  }
  return parse_experiment_config(j);
}

}  // namespace nfdm
