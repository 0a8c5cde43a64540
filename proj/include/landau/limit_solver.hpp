#pragma once

// Finite-volume solver for the two-dimensional limit equation
//
//   df/dt = div( abar(t, v) grad f + (d - 1) v f ),
//
// on a truncated square velocity grid with no-flux boundaries. Nodes carry
// dual cells (half cells on edges, quarter cells in corners), so the
// trapezoidal mass is conserved by flux telescoping.

#include <string>
#include <vector>

#include "landau/moments.hpp"
#include "landau/particle_system.hpp"

namespace landau {

/// Square grid [-L, L]^2 with n nodes per axis.
struct Grid2D {
  double L = 7.0;
  int n = 257;

  double h() const { return 2.0 * L / (n - 1); }
  double coord(int k) const { return -L + k * h(); }
  /// Throws std::invalid_argument unless n is odd and >= 3 and L >= 6.
  void validate() const;
};

/// Nodal density values, index i along v1 and j along v2 at values[i*n + j].
class DensityField {
 public:
  DensityField(Grid2D grid, double time = 0.0);
  DensityField(Grid2D grid, std::vector<double> values, double time);

  const Grid2D& grid() const { return grid_; }
  double time() const { return time_; }
  void set_time(double t) { time_ = t; }
  int n() const { return grid_.n; }
  double& at(int i, int j) { return values_[i * grid_.n + j]; }
  double at(int i, int j) const { return values_[i * grid_.n + j]; }
  const std::vector<double>& values() const { return values_; }
  std::vector<double>& values() { return values_; }

  /// Bilinear interpolation; zero outside the grid.
  double interpolate(double v1, double v2) const;
  double max_value() const;

 private:
  Grid2D grid_;
  std::vector<double> values_;
  double time_;
};

/// Samples the density of an initial law (mixture of axis-aligned Gaussians)
/// on the grid.
DensityField field_from_law(const Grid2D& grid, const InitialLaw& law);

/// Trapezoidal node weight along one axis: 1/2 at the ends, 1 elsewhere.
inline double trapezoid_weight(int k, int n) {
  return (k == 0 || k == n - 1) ? 0.5 : 1.0;
}

struct ConservedQuantities {
  double mass = 0.0;
  Vec momentum{0.0, 0.0};
  double energy = 0.0;
};
ConservedQuantities conserved_quantities(const DensityField& field);

/// int f v_a v_b by trapezoidal quadrature.
Mat second_moments(const DensityField& field);

inline constexpr double kCflConstant = 0.25;

/// c_cfl h^2 / max over nodes of the largest eigenvalue of abar at time t.
double max_stable_dt(const Grid2D& grid, const MomentState& moments, double t);

/// One explicit RK2 (Heun) step with closed-form temperatures. Rejects
/// (std::invalid_argument) a dt above the stability bound at either end of
/// the step.
///
/// The mixed-derivative stencil is not monotone where abar is strongly
/// anisotropic (the far field), so tiny negative values can appear there.
/// The positivity limiter scales down the outgoing face fluxes of any node
/// that a stage would drive below zero; fluxes stay antisymmetric, so mass
/// is still conserved exactly.
DensityField step_fp(const DensityField& field, double dt,
                     const MomentState& moments, bool positivity_limiter = true);

struct SelfConsistencyReport {
  Mat grid_moments;     ///< E_ab from quadrature
  Vec closed_form;      ///< 1 + D_aa exp(-4dt)
  double max_diag_deviation = 0.0;
  double max_offdiag = 0.0;
};
SelfConsistencyReport self_consistency(const DensityField& field, double t,
                                       const MomentState& moments);

inline constexpr double kLogRatioFloor = 1e-8;

/// max |grad_h log f| / (1 + sqrt(t) + |v|) over interior nodes whose
/// stencil stays above floor * max f.
double log_gradient_ratio(const DensityField& field, double t,
                          double floor = kLogRatioFloor);
/// max |hess_h log f|_F / (1 + t + |v|^2) with the same masking.
double log_hessian_ratio(const DensityField& field, double t,
                         double floor = kLogRatioFloor);

struct GaussianLowerFit {
  double c2 = 0.0;
  double c2_prime = 0.0;
  /// max over unmasked nodes of (envelope - log f); <= 0 by construction.
  double residual = 0.0;
};
/// Least-squares slope of log f against |v|^2/2, then the intercept lowered
/// until the envelope C2 exp(-C2' |v|^2 / 2) sits under every unmasked node.
GaussianLowerFit gaussian_lower_check(const DensityField& field, double t,
                                      double floor = kLogRatioFloor);

struct SolveDiagnostics {
  double time = 0.0;
  ConservedQuantities conserved;
  SelfConsistencyReport consistency;
  double log_gradient = 0.0;
  double log_hessian = 0.0;
};

struct SolveOptions {
  /// Times at which snapshots and diagnostics are taken; t = 0 and t_end
  /// are always included.
  std::vector<double> output_times;
  /// Recompute E_ab from the grid at every stage instead of the closed form.
  bool self_consistent = false;
  double log_floor = kLogRatioFloor;
  /// Negative values below -tol * max f abort the solve.
  double negativity_tol = 1e-12;
  bool positivity_limiter = true;
};

struct SolveResult {
  std::vector<DensityField> snapshots;
  std::vector<SolveDiagnostics> diagnostics;
  std::size_t steps = 0;
  /// Node updates whose outgoing fluxes the positivity limiter scaled.
  std::size_t limited_node_updates = 0;
};

/// Integrates from f0.time() to t_end with steps no longer than dt, hitting
/// every output time exactly. Throws NumericalFailure on negativity beyond
/// tolerance and std::invalid_argument on an unstable dt.
SolveResult solve(const DensityField& f0, double t_end, double dt,
                  const MomentState& moments, const SolveOptions& options = {});

SolveDiagnostics diagnose(const DensityField& field,
                          const MomentState& moments, double log_floor);

}  // namespace landau
