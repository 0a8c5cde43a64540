#include "landau/moments.hpp"

#include <algorithm>
#include <limits>

namespace landau {

double directional_temperature(double d_aa, int d, double t) {
  if (t < 0.0) throw std::invalid_argument("time must be nonnegative");
  return 1.0 + d_aa * std::exp(-4.0 * d * t);
}

double ellipticity_margin(const Vec& d_diag) {
  const int d = d_diag.dim();
  require_dim(d);
  double sum = 0.0;
  double eta = std::numeric_limits<double>::infinity();
  for (int a = 0; a < d; ++a) {
    sum += d_diag[a];
    eta = std::min({eta, 1.0 + d_diag[a], d - 1.0 - d_diag[a]});
  }
  if (std::abs(sum) > 1e-12)
    throw std::invalid_argument("anisotropy D must have zero trace");
  if (!(eta > 0.0))
    throw std::domain_error(
        "ellipticity margin is not positive: initial data is concentrated "
        "on a hyperplane");
  return eta;
}

MomentState::MomentState(const Vec& d_diag)
    : d_diag_(d_diag), eta_(ellipticity_margin(d_diag)) {}

MomentState MomentState::from_temperatures(const Vec& e0) {
  Vec dd(e0.dim());
  for (int a = 0; a < e0.dim(); ++a) dd[a] = e0[a] - 1.0;
  return MomentState(dd);
}

Vec MomentState::temperatures(double t) const {
  Vec e(dim());
  for (int a = 0; a < dim(); ++a)
    e[a] = directional_temperature(d_diag_[a], dim(), t);
  return e;
}

Mat abar(const Vec& v, double t, const MomentState& moments) {
  const int d = v.dim();
  const Vec e = moments.temperatures(t);
  Mat out = coeff_a(v);
  for (int a = 0; a < d; ++a) out(a, a) += d - e[a];
  return out;
}

}  // namespace landau
