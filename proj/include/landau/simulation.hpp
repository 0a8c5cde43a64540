#pragma once

// Single-replica driver: sample, integrate, record.

#include <cstdint>
#include <string>
#include <vector>

#include "landau/particle_system.hpp"
#include "landau/statistics.hpp"

namespace landau {

struct SimConfig {
  int d = 2;
  std::size_t n = 1000;
  double dt = 1e-3;
  double t_end = 1.0;
  Scheme scheme = Scheme::fournier;
  std::uint64_t seed = 1;
  InitialLaw initial = InitialLaw::anisotropic_gaussian(Vec(1.0, 1.0));
  std::size_t record_every = 100;
  bool fast_path = true;
  bool exact_center = false;
  int moment_p = 6;
  /// When nonempty, replaces record_every: records at step 0, at the steps
  /// nearest to these times, and at the final step.
  std::vector<double> record_times;

  /// Throws std::invalid_argument naming the offending field.
  void validate() const;
  /// Number of steps, round(t_end / dt).
  std::size_t steps() const;
};

struct RunResult {
  std::vector<StatRecord> records;
  /// Set when a non-finite coordinate aborted the replica.
  bool blown_up = false;
  std::string diagnostic;
  /// Final state (the last finite one on blow-up).
  ParticleState final_state{2, 1};
};

/// Integrates one replica using NoiseSource(config.seed) for the initial
/// draw and then for every step. Records are emitted at step 0 and every
/// record_every steps (or at record_times), plus the final step.
RunResult run(const SimConfig& config, std::uint64_t replica_id = 0);

}  // namespace landau
