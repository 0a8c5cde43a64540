#include "landau/limit_solver.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace landau {

void Grid2D::validate() const {
  if (n < 3 || n % 2 == 0)
    throw std::invalid_argument("grid.n must be odd and >= 3");
  if (!(L >= 6.0)) throw std::invalid_argument("grid.L must be >= 6");
}

DensityField::DensityField(Grid2D grid, double time)
    : grid_(grid),
      values_(static_cast<std::size_t>(grid.n) * grid.n, 0.0),
      time_(time) {
  grid_.validate();
}

DensityField::DensityField(Grid2D grid, std::vector<double> values,
                           double time)
    : grid_(grid), values_(std::move(values)), time_(time) {
  grid_.validate();
  if (values_.size() != static_cast<std::size_t>(grid.n) * grid.n)
    throw std::invalid_argument("density values do not match the grid");
}

double DensityField::interpolate(double v1, double v2) const {
  const double h = grid_.h();
  const double x = (v1 + grid_.L) / h, y = (v2 + grid_.L) / h;
  if (!(x >= 0.0 && y >= 0.0 && x <= grid_.n - 1 && y <= grid_.n - 1))
    return 0.0;
  const int i = std::min(static_cast<int>(x), grid_.n - 2);
  const int j = std::min(static_cast<int>(y), grid_.n - 2);
  const double fx = x - i, fy = y - j;
  return (1 - fx) * (1 - fy) * at(i, j) + fx * (1 - fy) * at(i + 1, j) +
         (1 - fx) * fy * at(i, j + 1) + fx * fy * at(i + 1, j + 1);
}

double DensityField::max_value() const {
  return *std::max_element(values_.begin(), values_.end());
}

DensityField field_from_law(const Grid2D& grid, const InitialLaw& law) {
  law.validate();
  if (law.dim() != 2)
    throw std::invalid_argument("grid solver is two-dimensional");
  DensityField f(grid, 0.0);
  for (int i = 0; i < grid.n; ++i)
    for (int j = 0; j < grid.n; ++j) {
      const double v[2] = {grid.coord(i), grid.coord(j)};
      double sum = 0.0;
      for (std::size_t k = 0; k < law.weights.size(); ++k) {
        double logp = 0.0;
        for (int a = 0; a < 2; ++a) {
          const double var = law.variances[k][a];
          const double z = v[a] - law.centers[k][a];
          logp += -0.5 * z * z / var - 0.5 * std::log(2.0 * std::numbers::pi * var);
        }
        sum += law.weights[k] * std::exp(logp);
      }
      f.at(i, j) = sum;
    }
  return f;
}

ConservedQuantities conserved_quantities(const DensityField& field) {
  const Grid2D& g = field.grid();
  const double h2 = g.h() * g.h();
  ConservedQuantities q;
  for (int i = 0; i < g.n; ++i)
    for (int j = 0; j < g.n; ++j) {
      const double w = trapezoid_weight(i, g.n) * trapezoid_weight(j, g.n) * h2;
      const double f = field.at(i, j) * w;
      const double v1 = g.coord(i), v2 = g.coord(j);
      q.mass += f;
      q.momentum[0] += v1 * f;
      q.momentum[1] += v2 * f;
      q.energy += (v1 * v1 + v2 * v2) * f;
    }
  return q;
}

Mat second_moments(const DensityField& field) {
  const Grid2D& g = field.grid();
  const double h2 = g.h() * g.h();
  Mat e(2);
  for (int i = 0; i < g.n; ++i)
    for (int j = 0; j < g.n; ++j) {
      const double w = trapezoid_weight(i, g.n) * trapezoid_weight(j, g.n) * h2;
      const double f = field.at(i, j) * w;
      const double v1 = g.coord(i), v2 = g.coord(j);
      e(0, 0) += v1 * v1 * f;
      e(0, 1) += v1 * v2 * f;
      e(1, 1) += v2 * v2 * f;
    }
  e(1, 0) = e(0, 1);
  return e;
}

namespace {

constexpr int kDim = 2;

Mat closed_form_temperatures(const MomentState& moments, double t) {
  return Mat::diag(moments.temperatures(t));
}

double max_abar_eigenvalue(const Grid2D& grid, const Mat& e) {
  double best = 0.0;
  for (int i = 0; i < grid.n; ++i)
    for (int j = 0; j < grid.n; ++j) {
      const double v1 = grid.coord(i), v2 = grid.coord(j);
      const double a11 = kDim + v2 * v2 - e(0, 0);
      const double a22 = kDim + v1 * v1 - e(1, 1);
      const double a12 = -v1 * v2 - e(0, 1);
      const double mean = 0.5 * (a11 + a22), half = 0.5 * (a11 - a22);
      best = std::max(best, mean + std::hypot(half, a12));
    }
  return best;
}

double stable_dt(const Grid2D& grid, const Mat& e) {
  return kCflConstant * grid.h() * grid.h() / max_abar_eigenvalue(grid, e);
}

// Flux-form discretization with static coefficient parts precomputed per
// face; only the temperature matrix E changes between evaluations.
class FpOperator {
 public:
  explicit FpOperator(const Grid2D& grid)
      : grid_(grid), n_(grid.n), h_(grid.h()) {
    const std::size_t xf = static_cast<std::size_t>(n_ - 1) * n_;
    x_a11_.resize(xf);
    x_a12_.resize(xf);
    x_drift_.resize(xf);
    y_a22_.resize(xf);
    y_a21_.resize(xf);
    y_drift_.resize(xf);
    for (int i = 0; i + 1 < n_; ++i)
      for (int j = 0; j < n_; ++j) {
        // Face between (i, j) and (i + 1, j).
        const double v1 = -grid.L + (i + 0.5) * h_, v2 = grid.coord(j);
        const std::size_t k = static_cast<std::size_t>(i) * n_ + j;
        x_a11_[k] = kDim + v2 * v2;
        x_a12_[k] = -v1 * v2;
        x_drift_[k] = (kDim - 1) * v1;
      }
    for (int i = 0; i < n_; ++i)
      for (int j = 0; j + 1 < n_; ++j) {
        // Face between (i, j) and (i, j + 1).
        const double v1 = grid.coord(i), v2 = -grid.L + (j + 0.5) * h_;
        const std::size_t k = static_cast<std::size_t>(i) * (n_ - 1) + j;
        y_a22_[k] = kDim + v1 * v1;
        y_a21_[k] = -v1 * v2;
        y_drift_[k] = (kDim - 1) * v2;
      }
    inv_area_.resize(static_cast<std::size_t>(n_) * n_);
    for (int i = 0; i < n_; ++i)
      for (int j = 0; j < n_; ++j)
        inv_area_[static_cast<std::size_t>(i) * n_ + j] =
            1.0 / (trapezoid_weight(i, n_) * trapezoid_weight(j, n_) * h_ * h_);
    d1_.resize(inv_area_.size());
    d2_.resize(inv_area_.size());
    loss_.resize(inv_area_.size());
    theta_.resize(inv_area_.size());
    fx_.resize(xf);
    fy_.resize(xf);
  }

  // out = div(abar grad f + (d-1) v f) evaluated with temperatures e. With
  // limit_dt > 0 the outgoing face fluxes of every node are scaled down so
  // that f + limit_dt * out stays nonnegative; returns the number of nodes
  // whose fluxes were scaled.
  std::size_t apply(const std::vector<double>& f, const Mat& e,
                    std::vector<double>& out, double limit_dt = 0.0) {
    const int n = n_;
    const double h = h_, inv_h = 1.0 / h, inv_2h = 0.5 / h;
    auto F = [&](int i, int j) { return f[static_cast<std::size_t>(i) * n + j]; };

    // Nodal derivatives, central inside. The wall-normal derivative is zero
    // on the boundary.
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        const std::size_t k = static_cast<std::size_t>(i) * n + j;
        d1_[k] = (i == 0 || i == n - 1)
                     ? 0.0
                     : (F(i + 1, j) - F(i - 1, j)) * inv_2h;
        d2_[k] = (j == 0 || j == n - 1)
                     ? 0.0
                     : (F(i, j + 1) - F(i, j - 1)) * inv_2h;
      }

    // x-face k joins (i, j) and (i + 1, j); y-face kf joins (i, j), (i, j + 1).
    // A positive flux moves mass to the first node.
    const double e11 = e(0, 0), e22 = e(1, 1), e12 = e(0, 1);
    for (int i = 0; i + 1 < n; ++i) {
      const std::size_t row = static_cast<std::size_t>(i) * n;
      const std::size_t next = row + n;
      for (int j = 0; j < n; ++j) {
        const std::size_t k = row + j;
        const double len = h * trapezoid_weight(j, n);
        const double grad1 = (f[next + j] - f[k]) * inv_h;
        const double grad2 = 0.5 * (d2_[k] + d2_[next + j]);
        const double favg = 0.5 * (f[k] + f[next + j]);
        fx_[k] = ((x_a11_[k] - e11) * grad1 + (x_a12_[k] - e12) * grad2 +
                  x_drift_[k] * favg) *
                 len;
      }
    }
    for (int i = 0; i < n; ++i) {
      const std::size_t row = static_cast<std::size_t>(i) * n;
      const double len = h * trapezoid_weight(i, n);
      for (int j = 0; j + 1 < n; ++j) {
        const std::size_t k = row + j;
        const std::size_t kf = static_cast<std::size_t>(i) * (n - 1) + j;
        const double grad2 = (f[k + 1] - f[k]) * inv_h;
        const double grad1 = 0.5 * (d1_[k] + d1_[k + 1]);
        const double favg = 0.5 * (f[k] + f[k + 1]);
        fy_[kf] = ((y_a21_[kf] - e12) * grad1 + (y_a22_[kf] - e22) * grad2 +
                   y_drift_[kf] * favg) *
                  len;
      }
    }

    std::size_t limited = 0;
    if (limit_dt > 0.0) limited = limit_fluxes(f, limit_dt);

    std::fill(out.begin(), out.end(), 0.0);
    for (int i = 0; i + 1 < n; ++i)
      for (int j = 0; j < n; ++j) {
        const std::size_t k = static_cast<std::size_t>(i) * n + j;
        out[k] += fx_[k];
        out[k + n] -= fx_[k];
      }
    for (int i = 0; i < n; ++i)
      for (int j = 0; j + 1 < n; ++j) {
        const std::size_t k = static_cast<std::size_t>(i) * n + j;
        const double flux = fy_[static_cast<std::size_t>(i) * (n - 1) + j];
        out[k] += flux;
        out[k + 1] -= flux;
      }
    for (std::size_t k = 0; k < out.size(); ++k) out[k] *= inv_area_[k];
    return limited;
  }

 private:
  std::size_t limit_fluxes(const std::vector<double>& f, double dt) {
    const int n = n_;
    std::fill(loss_.begin(), loss_.end(), 0.0);
    auto lose = [&](std::size_t first, std::size_t second, double flux) {
      if (flux > 0.0) loss_[second] += flux;
      else loss_[first] -= flux;
    };
    for (int i = 0; i + 1 < n; ++i)
      for (int j = 0; j < n; ++j) {
        const std::size_t k = static_cast<std::size_t>(i) * n + j;
        lose(k, k + n, fx_[k]);
      }
    for (int i = 0; i < n; ++i)
      for (int j = 0; j + 1 < n; ++j) {
        const std::size_t k = static_cast<std::size_t>(i) * n + j;
        lose(k, k + 1, fy_[static_cast<std::size_t>(i) * (n - 1) + j]);
      }
    std::size_t limited = 0;
    for (std::size_t k = 0; k < loss_.size(); ++k) {
      const double removed = dt * inv_area_[k] * loss_[k];
      const double avail = std::max(f[k], 0.0);
      if (removed > avail) {
        theta_[k] = avail / removed;
        ++limited;
      } else {
        theta_[k] = 1.0;
      }
    }
    if (limited == 0) return 0;
    auto scale = [&](std::size_t first, std::size_t second, double& flux) {
      flux *= flux > 0.0 ? theta_[second] : theta_[first];
    };
    for (int i = 0; i + 1 < n; ++i)
      for (int j = 0; j < n; ++j) {
        const std::size_t k = static_cast<std::size_t>(i) * n + j;
        scale(k, k + n, fx_[k]);
      }
    for (int i = 0; i < n; ++i)
      for (int j = 0; j + 1 < n; ++j) {
        const std::size_t k = static_cast<std::size_t>(i) * n + j;
        scale(k, k + 1, fy_[static_cast<std::size_t>(i) * (n - 1) + j]);
      }
    return limited;
  }

  Grid2D grid_;
  int n_;
  double h_;
  std::vector<double> x_a11_, x_a12_, x_drift_;
  std::vector<double> y_a22_, y_a21_, y_drift_;
  std::vector<double> inv_area_;
  std::vector<double> d1_, d2_;
  std::vector<double> fx_, fy_;
  std::vector<double> loss_, theta_;
};

// Heun's method; advances `field` in place.
class Stepper {
 public:
  Stepper(const Grid2D& grid, const MomentState& moments, bool self_consistent,
          bool limiter)
      : op_(grid),
        grid_(grid),
        moments_(moments),
        self_consistent_(self_consistent),
        limiter_(limiter) {
    const std::size_t size = static_cast<std::size_t>(grid.n) * grid.n;
    k1_.resize(size);
    k2_.resize(size);
    stage_.resize(size);
  }

  Mat temperatures(const DensityField& f, double t) const {
    return self_consistent_ ? second_moments(f) : closed_form_temperatures(moments_, t);
  }

  void check_dt(const DensityField& f, double dt) const {
    const double t = f.time();
    const double limit = std::min(stable_dt(grid_, temperatures(f, t)),
                                  stable_dt(grid_, temperatures(f, t + dt)));
    if (dt > limit * (1.0 + 1e-12)) {
      std::ostringstream msg;
      msg.precision(6);
      msg << "time step " << dt << " violates the stability bound; "
          << "admissible dt <= " << limit;
      throw std::invalid_argument(msg.str());
    }
  }

  // Heun in its two-stage convex form; returns the number of limited node
  // updates.
  std::size_t advance(DensityField& f, double dt) {
    check_dt(f, dt);
    const double t = f.time();
    const double ldt = limiter_ ? dt : 0.0;
    auto& v = f.values();
    std::size_t limited = op_.apply(v, temperatures(f, t), k1_, ldt);
    for (std::size_t k = 0; k < v.size(); ++k) stage_[k] = v[k] + dt * k1_[k];
    Mat e2 = self_consistent_
                 ? second_moments(DensityField(grid_, stage_, t + dt))
                 : closed_form_temperatures(moments_, t + dt);
    limited += op_.apply(stage_, e2, k2_, ldt);
    for (std::size_t k = 0; k < v.size(); ++k)
      v[k] = 0.5 * v[k] + 0.5 * (stage_[k] + dt * k2_[k]);
    f.set_time(t + dt);
    return limited;
  }

 private:
  FpOperator op_;
  Grid2D grid_;
  MomentState moments_;
  bool self_consistent_;
  bool limiter_;
  std::vector<double> k1_, k2_, stage_;
};

void check_negativity(const DensityField& f, double tol) {
  const auto& v = f.values();
  const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
  if (*lo < -tol * *hi) {
    std::ostringstream msg;
    msg << "density went negative (" << *lo << " vs max " << *hi
        << ") at t=" << f.time();
    throw NumericalFailure(msg.str());
  }
  if (!std::isfinite(*lo) || !std::isfinite(*hi))
    throw NumericalFailure("density is not finite");
}

}  // namespace

double max_stable_dt(const Grid2D& grid, const MomentState& moments, double t) {
  return stable_dt(grid, closed_form_temperatures(moments, t));
}

DensityField step_fp(const DensityField& field, double dt,
                     const MomentState& moments, bool positivity_limiter) {
  if (!(dt > 0.0)) throw std::invalid_argument("time step must be positive");
  DensityField next = field;
  Stepper stepper(field.grid(), moments, false, positivity_limiter);
  stepper.advance(next, dt);
  return next;
}

SelfConsistencyReport self_consistency(const DensityField& field, double t,
                                       const MomentState& moments) {
  SelfConsistencyReport r;
  r.grid_moments = second_moments(field);
  r.closed_form = moments.temperatures(t);
  for (int a = 0; a < 2; ++a)
    r.max_diag_deviation = std::max(
        r.max_diag_deviation, std::abs(r.grid_moments(a, a) - r.closed_form[a]));
  r.max_offdiag = std::abs(r.grid_moments(0, 1));
  return r;
}

namespace {

// Log of the field with a mask of nodes whose full 3x3 stencil is above the
// floor.
struct MaskedLog {
  std::vector<double> log;
  std::vector<char> usable;
};

MaskedLog masked_log(const DensityField& field, double floor) {
  const int n = field.n();
  const double cut = floor * field.max_value();
  MaskedLog m;
  m.log.assign(field.values().size(), 0.0);
  m.usable.assign(field.values().size(), 0);
  std::vector<char> above(field.values().size(), 0);
  for (std::size_t k = 0; k < field.values().size(); ++k) {
    const double f = field.values()[k];
    above[k] = f > 0.0 && f >= cut;
    if (above[k]) m.log[k] = std::log(f);
  }
  for (int i = 1; i + 1 < n; ++i)
    for (int j = 1; j + 1 < n; ++j) {
      bool ok = true;
      for (int di = -1; di <= 1 && ok; ++di)
        for (int dj = -1; dj <= 1 && ok; ++dj)
          ok = above[static_cast<std::size_t>(i + di) * n + j + dj];
      m.usable[static_cast<std::size_t>(i) * n + j] = ok;
    }
  return m;
}

}  // namespace

double log_gradient_ratio(const DensityField& field, double t, double floor) {
  const int n = field.n();
  const Grid2D& g = field.grid();
  const double h = g.h();
  const MaskedLog m = masked_log(field, floor);
  auto L = [&](int i, int j) { return m.log[static_cast<std::size_t>(i) * n + j]; };
  double best = 0.0;
  for (int i = 1; i + 1 < n; ++i)
    for (int j = 1; j + 1 < n; ++j) {
      if (!m.usable[static_cast<std::size_t>(i) * n + j]) continue;
      const double g1 = (L(i + 1, j) - L(i - 1, j)) / (2 * h);
      const double g2 = (L(i, j + 1) - L(i, j - 1)) / (2 * h);
      const double v = std::hypot(g.coord(i), g.coord(j));
      best = std::max(best, std::hypot(g1, g2) / (1.0 + std::sqrt(t) + v));
    }
  return best;
}

double log_hessian_ratio(const DensityField& field, double t, double floor) {
  const int n = field.n();
  const Grid2D& g = field.grid();
  const double h = g.h();
  const MaskedLog m = masked_log(field, floor);
  auto L = [&](int i, int j) { return m.log[static_cast<std::size_t>(i) * n + j]; };
  double best = 0.0;
  for (int i = 1; i + 1 < n; ++i)
    for (int j = 1; j + 1 < n; ++j) {
      if (!m.usable[static_cast<std::size_t>(i) * n + j]) continue;
      const double h11 = (L(i + 1, j) - 2 * L(i, j) + L(i - 1, j)) / (h * h);
      const double h22 = (L(i, j + 1) - 2 * L(i, j) + L(i, j - 1)) / (h * h);
      const double h12 = (L(i + 1, j + 1) - L(i + 1, j - 1) - L(i - 1, j + 1) +
                          L(i - 1, j - 1)) /
                         (4 * h * h);
      const double fro = std::sqrt(h11 * h11 + h22 * h22 + 2 * h12 * h12);
      const double v2 = g.coord(i) * g.coord(i) + g.coord(j) * g.coord(j);
      best = std::max(best, fro / (1.0 + t + v2));
    }
  return best;
}

GaussianLowerFit gaussian_lower_check(const DensityField& field, double,
                                      double floor) {
  const int n = field.n();
  const Grid2D& g = field.grid();
  const double cut = floor * field.max_value();
  std::vector<double> xs, ys;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const double f = field.at(i, j);
      if (!(f > 0.0 && f >= cut)) continue;
      const double v1 = g.coord(i), v2 = g.coord(j);
      xs.push_back(0.5 * (v1 * v1 + v2 * v2));
      ys.push_back(std::log(f));
    }
  if (xs.size() < 3)
    throw std::invalid_argument("too few unmasked nodes for a Gaussian fit");
  double mx = 0.0, my = 0.0;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    mx += xs[k];
    my += ys[k];
  }
  mx /= xs.size();
  my /= xs.size();
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    sxy += (xs[k] - mx) * (ys[k] - my);
    sxx += (xs[k] - mx) * (xs[k] - mx);
  }
  const double slope = sxy / sxx;
  const double intercept = my - slope * mx;
  double shift = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < xs.size(); ++k)
    shift = std::max(shift, intercept + slope * xs[k] - ys[k]);
  GaussianLowerFit fit;
  fit.c2_prime = -slope;
  fit.c2 = std::exp(intercept - shift);
  double residual = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < xs.size(); ++k)
    residual = std::max(residual, std::log(fit.c2) + slope * xs[k] - ys[k]);
  fit.residual = residual;
  return fit;
}

SolveDiagnostics diagnose(const DensityField& field,
                          const MomentState& moments, double log_floor) {
  SolveDiagnostics d;
  d.time = field.time();
  d.conserved = conserved_quantities(field);
  d.consistency = self_consistency(field, field.time(), moments);
  d.log_gradient = log_gradient_ratio(field, field.time(), log_floor);
  d.log_hessian = log_hessian_ratio(field, field.time(), log_floor);
  return d;
}

SolveResult solve(const DensityField& f0, double t_end, double dt,
                  const MomentState& moments, const SolveOptions& options) {
  if (moments.dim() != 2)
    throw std::invalid_argument("grid solver needs a two-dimensional moment state");
  if (!(dt > 0.0)) throw std::invalid_argument("time step must be positive");
  const double t0 = f0.time();
  if (t_end < t0) throw std::invalid_argument("t_end precedes the initial time");
  const double scale = f0.max_value();
  const auto& v0 = f0.values();
  if (*std::min_element(v0.begin(), v0.end()) < -options.negativity_tol * scale)
    throw std::invalid_argument("initial density must be nonnegative");

  std::vector<double> outputs;
  for (double t : options.output_times)
    if (t > t0 && t < t_end) outputs.push_back(t);
  outputs.push_back(t_end);
  std::sort(outputs.begin(), outputs.end());
  outputs.erase(std::unique(outputs.begin(), outputs.end()), outputs.end());

  SolveResult result;
  result.snapshots.push_back(f0);
  result.diagnostics.push_back(diagnose(f0, moments, options.log_floor));
  if (t_end == t0) return result;

  Stepper stepper(f0.grid(), moments, options.self_consistent,
                  options.positivity_limiter);
  DensityField f = f0;
  for (double target : outputs) {
    const double span = target - f.time();
    if (span <= 0.0) continue;
    const auto count = static_cast<std::size_t>(std::ceil(span / dt - 1e-9));
    const double h = span / static_cast<double>(count);
    const double start = f.time();
    for (std::size_t k = 1; k <= count; ++k) {
      result.limited_node_updates += stepper.advance(f, h);
      f.set_time(start + static_cast<double>(k) * h);
      check_negativity(f, options.negativity_tol);
    }
    result.steps += count;
    f.set_time(target);
    result.snapshots.push_back(f);
    result.diagnostics.push_back(diagnose(f, moments, options.log_floor));
  }
  return result;
}

}  // namespace landau
