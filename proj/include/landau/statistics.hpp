#pragma once

// Particle-level functionals: moments, directional temperatures, the law of
// large numbers functional and the mixed-moment hierarchy. Everything here is
// O(N d^2) via power-sum identities; brute-force pair/triple loops live in
// the test oracles.

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "landau/moments.hpp"
#include "landau/particle_system.hpp"

namespace landau {

/// (1/N) sum_i |v^i|^p for p in {2, 4, 6, 8}.
double empirical_moment(const ParticleState& state, int p);

/// Psi_a = (1/N) sum_i (v^i_a)^2, zero-based alpha.
double directional_temperature_emp(const ParticleState& state, int alpha);

/// (1/N) sum_i |a*f(v^i) - (1/N) sum_j a(v^i - v^j)|_F^2 with a*f taken from
/// the closed-form temperatures at time t.
double lln_functional(const ParticleState& state, double t,
                      const MomentState& moments);

using NamedValues = std::vector<std::pair<std::string, double>>;

/// Off-diagonal pair sums normalized by N^2 (triple sums by N^3), all over
/// distinct indices:
///   cross                  sum_{i!=j} v^i.v^j
///   alpha_cross_<a>        sum_{i!=j} v^i_a v^j_a
///   energy_energy          sum_{i!=j} |v^i|^2 |v^j|^2
///   dir_dir_<a>            sum_{i!=j} (v^i_a)^2 (v^j_a)^2
///   ab_cross_<a><b>        sum_{i!=j} v^i_a v^i_b v^j_a v^j_b
///   alpha_cross_energy_<a> sum_{i,j,k distinct} v^i_a v^j_a |v^k|^2
///   cross_energy           sum_{i,j,k distinct} v^i.v^j |v^k|^2
/// Indices in names are one-based. Requires N >= 2.
NamedValues mixed_moment_functionals(const ParticleState& state);

/// M_p(0) ((p+d-3)/(d-1))^{p/2} exp(p(p-2)t/N).
double moment_bound(double mp_0, int p, int d, std::size_t n, double t);
/// moment_bound(...) - mp_t; negative flags a violation.
double moment_bound_check(double mp_t, double mp_0, int p, int d,
                          std::size_t n, double t);

/// All tracked functionals of one replica at one time.
struct StatRecord {
  double time = 0.0;
  double m2 = 0.0;
  double m4 = 0.0;
  double mp = 0.0;
  int p = 6;
  std::vector<double> psi;
  /// (1/N) sum_i v^i_a v^i_b for a < b.
  std::vector<double> cross_moments;
  double lln_value = 0.0;
  NamedValues hierarchy;
  std::uint64_t replica_id = 0;
  Scheme scheme = Scheme::fournier;
};

StatRecord make_record(const ParticleState& state, const MomentState& moments,
                       int p, std::uint64_t replica_id, Scheme scheme);

/// Order-fixed pairwise summation.
double pairwise_sum(std::span<const double> x);

struct MeanSd {
  double mean = 0.0;
  double sd = 0.0;  ///< sample standard deviation (n - 1 denominator)
  std::size_t n = 0;
  double standard_error() const;
};
MeanSd mean_sd(std::span<const double> x);

}  // namespace landau
