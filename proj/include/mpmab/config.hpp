#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mpmab/env.hpp"
#include "mpmab/reward.hpp"

namespace mpmab {

struct OracleConfig {
  enum class Kind { exact, approx } kind = Kind::exact;
  double alpha = 1.0;
  double beta = 1.0;
};

struct DumpConfig {
  bool csv = false;     // per-run trace csv
  bool binary = false;  // per-run binary trace
  bool epochs = false;  // per-run epoch diagnostics, json lines
  bool wire = false;    // per-run communication wire log
};

struct ExperimentConfig {
  std::string instance_name;  // builtin name, "matrix", "random" or "random_each"
  UtilityMatrix instance;     // shape only when instance_per_seed is set
  // every run seed draws its own i.i.d. instance; final regrets across runs
  // then form a histogram over instances rather than noise around one
  bool instance_per_seed = false;
  std::optional<Reward> reward;
  std::vector<std::string> algorithms;  // "beacon" | "cucb"
  int64_t horizon = 0;
  std::vector<uint64_t> seeds;
  OracleConfig oracle;
  int64_t sample_stride = 100;
  DumpConfig dumps;
};

// parses and validates a json experiment description; errors carry the path of
// the offending field, e.g. "config.reward.epsilon: must be > 0"
ExperimentConfig parse_config(const std::string& json_text);
ExperimentConfig load_config(const std::string& path);

}  // namespace mpmab
