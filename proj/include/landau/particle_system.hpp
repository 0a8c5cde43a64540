#pragma once

// Euler-Maruyama integration of the three interacting particle systems that
// share the Landau master equation:
//
//   fournier       dV^i = (2/N) sum_j b(V^i-V^j) dt
//                         + sqrt(2) ((1/N) sum_j a(V^i-V^j))^{1/2} dB^i
//   fgm            same drift, noise sqrt(2/N) sum_j a(V^i-V^j)^{1/2} dB^{ij}
//   environmental  same drift, noise sqrt(2/N) sum_j sum_{a<b}
//                         xi_ab(V^i-V^j) dB^{j,ab}
//
// Each step consumes a fixed number of standard normals (see noise_count)
// laid out as documented on the step functions. Coefficients are frozen at
// the start of the step.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "landau/kernels.hpp"
#include "landau/rng.hpp"

namespace landau {

/// N velocities in R^d plus the simulation clock.
class ParticleState {
 public:
  ParticleState(int d, std::size_t n, double time = 0.0);
  ParticleState(int d, std::vector<double> velocities, double time = 0.0);

  int dim() const { return d_; }
  std::size_t size() const { return v_.size() / static_cast<std::size_t>(d_); }
  double time() const { return time_; }
  void set_time(double t) { time_ = t; }

  Vec velocity(std::size_t i) const {
    return Vec::from(std::span<const double>(v_).subspan(i * d_, d_));
  }
  void set_velocity(std::size_t i, const Vec& v) {
    for (int a = 0; a < d_; ++a) v_[i * d_ + a] = v[a];
  }
  std::span<const double> data() const { return v_; }
  std::span<double> data() { return v_; }

  bool all_finite() const;

 private:
  int d_;
  std::vector<double> v_;
  double time_;
};

/// Empirical mean m, mean energy s and second-moment matrix M of a state.
struct SufficientStats {
  Vec m;
  double s = 0.0;
  Mat M;
};

enum class Scheme { fournier, fgm, environmental };

std::string_view to_string(Scheme s);
/// Throws std::invalid_argument for unknown names.
Scheme parse_scheme(std::string_view name);

inline constexpr std::size_t kFgmMaxParticles = 4096;

/// Normals consumed by one step: fournier N*d, fgm N*N*d,
/// environmental N*d(d-1)/2.
std::size_t noise_count(Scheme s, std::size_t n, int d);

SufficientStats sufficient_stats(const ParticleState& state);

/// (2/N) sum_j b(v^i - v^j), summed pair by pair.
Vec interaction_drift_ref(const ParticleState& state, std::size_t i);
/// -2(d-1)(v - m): the same sum reduced through the empirical mean.
Vec interaction_drift_fast(const SufficientStats& stats, const Vec& v);

/// (1/N) sum_j a(v^i - v^j), summed pair by pair.
Mat diffusion_matrix_ref(const ParticleState& state, std::size_t i);
/// (|v|^2 - 2 v.m + s) Id - (v(x)v - v(x)m - m(x)v + M).
Mat diffusion_matrix_fast(const SufficientStats& stats, const Vec& v);

/// Normals laid out as g[i*d + a].
ParticleState step_fournier(const ParticleState& state, double dt,
                            std::span<const double> normals, bool fast_path);
ParticleState step_fournier(const ParticleState& state, double dt,
                            NoiseSource& noise, bool fast_path);

/// Normals laid out as g[(i*N + j)*d + a]; O(N^2) with no fast path.
ParticleState step_fgm(const ParticleState& state, double dt,
                       std::span<const double> normals);
ParticleState step_fgm(const ParticleState& state, double dt,
                       NoiseSource& noise);

/// Normals laid out as g[j*P + p], p indexing the pairs alpha < beta; every
/// particle sees the same draws. The fast path aggregates
/// S_p = sum_j g^{j,p} and T_p = sum_j v^j g^{j,p}.
ParticleState step_environmental(const ParticleState& state, double dt,
                                 std::span<const double> normals,
                                 bool fast_path);
ParticleState step_environmental(const ParticleState& state, double dt,
                                 NoiseSource& noise, bool fast_path);

/// Dispatches on the scheme; fast_path is ignored for fgm.
ParticleState step(Scheme scheme, const ParticleState& state, double dt,
                   std::span<const double> normals, bool fast_path);
ParticleState step(Scheme scheme, const ParticleState& state, double dt,
                   NoiseSource& noise, bool fast_path);

/// Mixture of axis-aligned Gaussians. Admissible laws have unit mass, zero
/// mean, and directional temperatures E_a(0) in (0, d) summing to d.
struct InitialLaw {
  std::vector<double> weights;
  std::vector<Vec> centers;
  std::vector<Vec> variances;

  static InitialLaw anisotropic_gaussian(const Vec& variances);
  static InitialLaw gaussian_mixture(std::vector<double> weights,
                                     std::vector<Vec> centers,
                                     std::vector<Vec> variances);
  /// Symmetric two-bump preset with E(0) = (1.5, 0.5) in d = 2 and
  /// (1.5, 0.75, 0.75) in d = 3.
  static InitialLaw bimodal(int d);

  int dim() const { return centers.empty() ? 0 : centers.front().dim(); }
  bool is_gaussian() const { return weights.size() == 1; }
  /// E_a(0) = sum_k w_k (c_ka^2 + sigma_ka^2).
  Vec directional_temperatures() const;
  /// Throws std::invalid_argument when the law is not admissible.
  void validate() const;
};

/// N i.i.d. draws; exact_center subtracts the empirical mean afterwards.
ParticleState sample_initial(const InitialLaw& law, std::size_t n,
                             NoiseSource& noise, bool exact_center = false);

/// Thrown when a state stops being finite.
class NumericalFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace landau
