#pragma once

// Experiment configuration: a flat "dotted.key = value" text file, parsed
// strictly. Unknown or repeated keys are errors.

#include <cstdint>
#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "landau/limit_solver.hpp"
#include "landau/simulation.hpp"

namespace landau {

/// Invalid configuration. The message starts with the offending key.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using KeyValues = std::map<std::string, std::string>;

/// Parses "key = value" lines; '#' starts a comment.
KeyValues parse_key_values(const std::string& text);

enum class PoolMode { particle1, all };

struct ExperimentConfig {
  SimConfig sim;
  std::size_t replicas = 1;

  std::vector<std::size_t> n_values;
  std::vector<double> sweep_times;

  Grid2D grid;
  double grid_dt = 0.0;  ///< 0 selects 0.9x the stability bound
  double grid_t_end = 1.0;
  std::vector<double> grid_output_times;
  bool self_consistent = false;
  bool positivity_limiter = true;

  double chaos_time = 0.5;
  PoolMode chaos_pool = PoolMode::particle1;
  std::size_t chaos_limit_samples = 100000;
  int chaos_n_proj = 64;
  int chaos_knn_k = 5;
  int chaos_l1_bins = 8;
  int chaos_null_trials = 16;

  /// Canonical key/value echo; parsing it again yields the same config.
  KeyValues to_key_values() const;
};

/// Builds a config from parsed pairs, applying defaults for absent keys.
ExperimentConfig config_from_key_values(const KeyValues& kv);

/// Reads a config file, or the "config" object of a run manifest (.json).
ExperimentConfig load_config(const std::filesystem::path& path);

/// All recognised keys, for usage messages.
const std::vector<std::string>& config_keys();

}  // namespace landau
