#pragma once

// Seeded noise streams and the replica seed-splitting rule.

#include <cstdint>
#include <random>
#include <span>

namespace landau {

/// SplitMix64 finalizer.
std::uint64_t splitmix64(std::uint64_t x);

/// Seed of stream `stream` derived from a master seed:
///   splitmix64(master + (stream + 1) * 0x9E3779B97F4A7C15).
/// Replica r of an experiment uses stream r; the derivation depends only on
/// (master, stream), so replicas can run in any order on any worker.
std::uint64_t stream_seed(std::uint64_t master, std::uint64_t stream);

/// A deterministic source of standard normal and uniform draws.
class NoiseSource {
 public:
  explicit NoiseSource(std::uint64_t seed) : engine_(seed) {}

  double normal() { return normal_(engine_); }
  double uniform() { return uniform_(engine_); }
  void fill_normal(std::span<double> out) {
    for (double& g : out) g = normal_(engine_);
  }
  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

}  // namespace landau
