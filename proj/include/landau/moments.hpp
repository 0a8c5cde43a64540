#pragma once

// Closed-form moment layer of the limit equation.
//
// With unit mass, zero momentum and energy d, the directional temperatures
// E_a(t) = int f v_a^2 relax as 1 + D_aa exp(-4 d t) and the off-diagonal
// second moments stay zero, so a * f collapses to
//   abar(v, t) = d Id + (|v|^2 Id - v (x) v) - diag(E(t)).

#include "landau/kernels.hpp"

namespace landau {

/// E_a(t) = 1 + D_aa exp(-4 d t).
double directional_temperature(double d_aa, int d, double t);

/// eta = min_a min(1 + D_aa, d - 1 - D_aa). Throws std::domain_error when
/// eta <= 0 (data concentrated on a hyperplane) and std::invalid_argument
/// when the D_aa do not sum to zero within 1e-12.
double ellipticity_margin(const Vec& d_diag);

/// Initial anisotropy D_aa = E_a(0) - 1 together with its ellipticity margin.
class MomentState {
 public:
  /// Validates through ellipticity_margin.
  explicit MomentState(const Vec& d_diag);
  static MomentState from_temperatures(const Vec& e0);
  static MomentState equilibrium(int d) { return MomentState(Vec(d)); }

  int dim() const { return d_diag_.dim(); }
  const Vec& anisotropy() const { return d_diag_; }
  double eta() const { return eta_; }

  /// E(t) as a vector of diagonal entries.
  Vec temperatures(double t) const;

 private:
  Vec d_diag_;
  double eta_;
};

/// a * f evaluated from the closed-form temperatures.
Mat abar(const Vec& v, double t, const MomentState& moments);

}  // namespace landau
