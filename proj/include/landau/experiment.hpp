#pragma once

// Experiment orchestration: replica pools, sweeps over N, limit solves and
// the artifact-writing commands behind the command-line tool.
//
// Seed rule, recorded in every manifest:
//   simulate / verify-moments: replica r uses stream_seed(master, r)
//   sweeps: replica r at particle count N uses
//           stream_seed(stream_seed(master, 2^32 + N), r)
//   auxiliary draws (limit samples, projections, null calibration) use
//           stream_seed(master, 2^63 + k) for fixed small k.

#include <atomic>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "landau/chaos_metrics.hpp"
#include "landau/config.hpp"
#include "landau/io.hpp"

namespace landau {

inline constexpr const char* kToolVersion = "landau-lab 1.0.0";

enum ExitCode : int {
  kExitOk = 0,
  kExitConfig = 2,
  kExitNumerical = 3,
  kExitGate = 4,
};

/// Runs fn(0..count-1) on up to `workers` threads. Results are stored by
/// index; the exception of the lowest failing index is rethrown.
template <class T, class Fn>
std::vector<T> parallel_indexed(std::size_t count, unsigned workers, Fn&& fn) {
  std::vector<std::optional<T>> slots(count);
  std::vector<std::exception_ptr> errors(count);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t k = next++; k < count; k = next++) {
      try {
        slots[k].emplace(fn(k));
      } catch (...) {
        errors[k] = std::current_exception();
      }
    }
  };
  const std::size_t threads =
      std::min<std::size_t>(std::max(1u, workers), std::max<std::size_t>(count, 1));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  std::vector<T> out;
  out.reserve(count);
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

std::uint64_t sweep_seed(std::uint64_t master, std::size_t n, std::size_t replica);
std::uint64_t aux_seed(std::uint64_t master, std::uint64_t k);

/// R independent replicas of `base`; replica r gets seed stream_seed(master, r).
std::vector<RunResult> run_replicas(const SimConfig& base, std::size_t replicas,
                                    std::uint64_t master, unsigned workers);

/// Columns time, M2, M4, M<p>, Psi_a, cross_ab, lln_value, hierarchy_*.
CsvTable stats_table(const std::vector<StatRecord>& records);

struct LlnRow {
  std::size_t n = 0;
  double time = 0.0;
  MeanSd value;
};
struct LlnSweep {
  std::vector<LlnRow> rows;
  /// One fit per sweep time, in the order of sweep.times.
  std::vector<std::pair<double, RateFit>> fits;
};
/// Replica-averaged lln_functional at sweep.times for every N. Needs at
/// least four N values.
LlnSweep lln_sweep(const ExperimentConfig& config, unsigned workers);

/// Limit solve of the configured initial law on the configured grid.
struct LimitSolve {
  MomentState moments;
  double dt = 0.0;
  SolveResult result;
};
/// grid.dt = 0 picks 0.9x the smaller stability bound at the two ends.
double auto_grid_dt(const Grid2D& grid, const MomentState& moments, double t_end);
LimitSolve solve_limit(const ExperimentConfig& config, double t_end,
                       const std::vector<double>& output_times);

struct ChaosRow {
  std::size_t n = 0;
  std::size_t pool_size = 0;
  double sliced_w2 = 0.0;
  double knn_kl = 0.0;
  double l1 = 0.0;
  double l1_debiased = 0.0;
  double ckp_margin = 0.0;
  double ckp_sigma = 0.0;
};
/// Limit-vs-limit draws of the same pool size: the estimator floor.
struct NullCalibration {
  std::size_t pool_size = 0;
  MeanSd sliced_w2;
  MeanSd knn_kl;
  MeanSd l1;
  MeanSd ckp_margin;
};
struct ChaosSweep {
  double acceptance_rate = 0.0;
  std::vector<ChaosRow> rows;
  std::vector<NullCalibration> nulls;
  std::optional<RateFit> w2_fit;
  std::optional<RateFit> kl_fit;
  std::string kl_fit_error;
  bool w2_decreasing = false;
  bool kl_slope_ok = false;
  bool ckp_ok = false;
};
inline constexpr double kChaosKlSlopeGate = -0.25;
/// Two-dimensional runs only.
ChaosSweep chaos_sweep(const ExperimentConfig& config, unsigned workers);

struct MomentCheckRow {
  std::size_t replica = 0;
  double time = 0.0;
  double mp = 0.0;
  double bound = 0.0;
  double margin = 0.0;
};
struct MomentCheck {
  std::vector<MomentCheckRow> rows;
  bool all_positive = true;
};
MomentCheck verify_moments(const ExperimentConfig& config, unsigned workers);

/// Mean energy (1/N) sum |v|^2 of coupled Fournier runs. Level k steps with
/// factors[k] * base.dt, driven by the Brownian increments of the finest
/// level (base.dt) summed in blocks, and all levels share the initial state.
struct CoupledEnergy {
  std::vector<int> factors;
  std::vector<double> initial;             ///< per replica
  std::vector<std::vector<double>> final;  ///< [level][replica]
};
CoupledEnergy coupled_energy_levels(const SimConfig& base,
                                    const std::vector<int>& factors,
                                    std::size_t replicas, std::uint64_t master,
                                    unsigned workers);

struct RunContext {
  std::filesystem::path out_dir = ".";
  unsigned workers = 1;
};

/// Each command writes its artifacts and a manifest.json into out_dir and
/// returns an exit code. ConfigError, SchemaError and NumericalFailure
/// propagate to the caller.
int cmd_simulate(const ExperimentConfig& config, const RunContext& ctx);
int cmd_solve(const ExperimentConfig& config, const RunContext& ctx);
int cmd_sweep_lln(const ExperimentConfig& config, const RunContext& ctx);
int cmd_sweep_chaos(const ExperimentConfig& config, const RunContext& ctx);
int cmd_verify_moments(const ExperimentConfig& config, const RunContext& ctx);

}  // namespace landau
