#include "landau/particle_system.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace landau {

ParticleState::ParticleState(int d, std::size_t n, double time)
    : d_(d), v_(n * static_cast<std::size_t>(d), 0.0), time_(time) {
  require_dim(d);
  if (n == 0) throw std::invalid_argument("ParticleState needs N >= 1");
}

ParticleState::ParticleState(int d, std::vector<double> velocities,
                             double time)
    : d_(d), v_(std::move(velocities)), time_(time) {
  require_dim(d);
  if (v_.empty() || v_.size() % static_cast<std::size_t>(d) != 0)
    throw std::invalid_argument(
        "ParticleState: velocity buffer must hold N >= 1 vectors");
}

bool ParticleState::all_finite() const {
  return std::all_of(v_.begin(), v_.end(),
                     [](double x) { return std::isfinite(x); });
}

std::string_view to_string(Scheme s) {
  switch (s) {
    case Scheme::fournier: return "fournier";
    case Scheme::fgm: return "fgm";
    case Scheme::environmental: return "environmental";
  }
  return "unknown";
}

Scheme parse_scheme(std::string_view name) {
  if (name == "fournier") return Scheme::fournier;
  if (name == "fgm") return Scheme::fgm;
  if (name == "environmental") return Scheme::environmental;
  throw std::invalid_argument("unknown scheme '" + std::string(name) + "'");
}

std::size_t noise_count(Scheme s, std::size_t n, int d) {
  switch (s) {
    case Scheme::fournier: return n * d;
    case Scheme::fgm: return n * n * d;
    case Scheme::environmental: return n * pair_count(d);
  }
  return 0;
}

SufficientStats sufficient_stats(const ParticleState& state) {
  const int d = state.dim();
  const std::size_t n = state.size();
  SufficientStats st{Vec(d), 0.0, Mat(d)};
  auto v = state.data();
  for (std::size_t i = 0; i < n; ++i) {
    const double* x = &v[i * d];
    for (int a = 0; a < d; ++a) {
      st.m[a] += x[a];
      for (int b = a; b < d; ++b) st.M(a, b) += x[a] * x[b];
    }
  }
  const double inv = 1.0 / static_cast<double>(n);
  st.m *= inv;
  for (int a = 0; a < d; ++a)
    for (int b = a; b < d; ++b) {
      st.M(a, b) *= inv;
      st.M(b, a) = st.M(a, b);
    }
  st.s = st.M.trace();
  return st;
}

Vec interaction_drift_ref(const ParticleState& state, std::size_t i) {
  const Vec vi = state.velocity(i);
  Vec sum(state.dim());
  for (std::size_t j = 0; j < state.size(); ++j)
    sum += coeff_b(vi - state.velocity(j));
  return (2.0 / static_cast<double>(state.size())) * sum;
}

Vec interaction_drift_fast(const SufficientStats& stats, const Vec& v) {
  const double k = -2.0 * (v.dim() - 1);
  return k * (v - stats.m);
}

Mat diffusion_matrix_ref(const ParticleState& state, std::size_t i) {
  const Vec vi = state.velocity(i);
  Mat sum(state.dim());
  for (std::size_t j = 0; j < state.size(); ++j)
    sum += coeff_a(vi - state.velocity(j));
  return (1.0 / static_cast<double>(state.size())) * sum;
}

Mat diffusion_matrix_fast(const SufficientStats& stats, const Vec& v) {
  const int d = v.dim();
  const double scalar = v.norm2() - 2.0 * dot(v, stats.m) + stats.s;
  Mat out(d);
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b)
      out(a, b) = (a == b ? scalar : 0.0) -
                  (v[a] * v[b] - v[a] * stats.m[b] - stats.m[a] * v[b] +
                   stats.M(a, b));
  return out;
}

namespace {

void require_dt(double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("time step must be positive");
}

void require_normals(std::span<const double> g, std::size_t expected) {
  if (g.size() != expected)
    throw std::invalid_argument("expected " + std::to_string(expected) +
                                " normals, got " + std::to_string(g.size()));
}

// Scale-aware tolerance for rooting averaged diffusion matrices.
double root_tol(const Mat& m) {
  return kPsdSqrtTol * std::max(1.0, m.frobenius());
}

}  // namespace

ParticleState step_fournier(const ParticleState& state, double dt,
                            std::span<const double> normals, bool fast_path) {
  require_dt(dt);
  const int d = state.dim();
  const std::size_t n = state.size();
  require_normals(normals, noise_count(Scheme::fournier, n, d));

  ParticleState next(d, n, state.time() + dt);
  const double amp = std::sqrt(2.0 * dt);
  const SufficientStats stats =
      fast_path ? sufficient_stats(state) : SufficientStats{};
  for (std::size_t i = 0; i < n; ++i) {
    const Vec v = state.velocity(i);
    const Vec drift = fast_path ? interaction_drift_fast(stats, v)
                                : interaction_drift_ref(state, i);
    const Mat diff = fast_path ? diffusion_matrix_fast(stats, v)
                               : diffusion_matrix_ref(state, i);
    const Mat root = psd_sqrt(diff, root_tol(diff));
    const Vec g = Vec::from(normals.subspan(i * d, d));
    next.set_velocity(i, v + dt * drift + amp * (root * g));
  }
  return next;
}

ParticleState step_fournier(const ParticleState& state, double dt,
                            NoiseSource& noise, bool fast_path) {
  std::vector<double> g(noise_count(Scheme::fournier, state.size(),
                                    state.dim()));
  noise.fill_normal(g);
  return step_fournier(state, dt, g, fast_path);
}

ParticleState step_fgm(const ParticleState& state, double dt,
                       std::span<const double> normals) {
  require_dt(dt);
  const int d = state.dim();
  const std::size_t n = state.size();
  if (n > kFgmMaxParticles)
    throw std::invalid_argument("fgm scheme is capped at N <= 4096");
  require_normals(normals, noise_count(Scheme::fgm, n, d));

  ParticleState next(d, n, state.time() + dt);
  const double amp = std::sqrt(2.0 * dt / static_cast<double>(n));
  const SufficientStats stats = sufficient_stats(state);
  auto v = state.data();
  for (std::size_t i = 0; i < n; ++i) {
    const Vec vi = state.velocity(i);
    Vec noise_sum(d);
    for (std::size_t j = 0; j < n; ++j) {
      // a(z)^{1/2} g = |z| g - z (z.g) / |z|
      Vec z(d);
      for (int a = 0; a < d; ++a) z[a] = vi[a] - v[j * d + a];
      const double r = z.norm();
      if (r == 0.0) continue;
      const double* g = &normals[(i * n + j) * d];
      double zg = 0.0;
      for (int a = 0; a < d; ++a) zg += z[a] * g[a];
      for (int a = 0; a < d; ++a) noise_sum[a] += r * g[a] - z[a] * zg / r;
    }
    // Shared drift with the fournier system, evaluated in closed form.
    const Vec drift = interaction_drift_fast(stats, vi);
    next.set_velocity(i, vi + dt * drift + amp * noise_sum);
  }
  return next;
}

ParticleState step_fgm(const ParticleState& state, double dt,
                       NoiseSource& noise) {
  std::vector<double> g(noise_count(Scheme::fgm, state.size(), state.dim()));
  noise.fill_normal(g);
  return step_fgm(state, dt, g);
}

ParticleState step_environmental(const ParticleState& state, double dt,
                                 std::span<const double> normals,
                                 bool fast_path) {
  require_dt(dt);
  const int d = state.dim();
  const int npairs = pair_count(d);
  const std::size_t n = state.size();
  require_normals(normals, noise_count(Scheme::environmental, n, d));

  ParticleState next(d, n, state.time() + dt);
  const double amp = std::sqrt(2.0 * dt / static_cast<double>(n));
  const SufficientStats stats = sufficient_stats(state);

  if (fast_path) {
    std::array<double, 3> S{};
    std::array<Vec, 3> T{Vec(d), Vec(d), Vec(d)};
    for (std::size_t j = 0; j < n; ++j) {
      const Vec vj = state.velocity(j);
      for (int p = 0; p < npairs; ++p) {
        const double g = normals[j * npairs + p];
        S[p] += g;
        T[p] += g * vj;
      }
    }
    for (std::size_t i = 0; i < n; ++i) {
      const Vec vi = state.velocity(i);
      Vec noise_sum(d);
      for (int p = 0; p < npairs; ++p) {
        const auto [a, b] = pair_at(d, p);
        // xi is linear: sum_j xi(v^i - v^j) g^j = xi(v^i) S - xi(T).
        noise_sum += S[p] * xi_field(vi, a, b) - xi_field(T[p], a, b);
      }
      const Vec drift = interaction_drift_fast(stats, vi);
      next.set_velocity(i, vi + dt * drift + amp * noise_sum);
    }
  } else {
    for (std::size_t i = 0; i < n; ++i) {
      const Vec vi = state.velocity(i);
      Vec noise_sum(d);
      for (std::size_t j = 0; j < n; ++j) {
        const Vec z = vi - state.velocity(j);
        for (int p = 0; p < npairs; ++p) {
          const auto [a, b] = pair_at(d, p);
          noise_sum += normals[j * npairs + p] * xi_field(z, a, b);
        }
      }
      const Vec drift = interaction_drift_ref(state, i);
      next.set_velocity(i, vi + dt * drift + amp * noise_sum);
    }
  }
  return next;
}

ParticleState step_environmental(const ParticleState& state, double dt,
                                 NoiseSource& noise, bool fast_path) {
  std::vector<double> g(
      noise_count(Scheme::environmental, state.size(), state.dim()));
  noise.fill_normal(g);
  return step_environmental(state, dt, g, fast_path);
}

ParticleState step(Scheme scheme, const ParticleState& state, double dt,
                   std::span<const double> normals, bool fast_path) {
  switch (scheme) {
    case Scheme::fournier:
      return step_fournier(state, dt, normals, fast_path);
    case Scheme::fgm:
      return step_fgm(state, dt, normals);
    case Scheme::environmental:
      return step_environmental(state, dt, normals, fast_path);
  }
  throw std::invalid_argument("unknown scheme");
}

ParticleState step(Scheme scheme, const ParticleState& state, double dt,
                   NoiseSource& noise, bool fast_path) {
  std::vector<double> g(noise_count(scheme, state.size(), state.dim()));
  noise.fill_normal(g);
  return step(scheme, state, dt, g, fast_path);
}

InitialLaw InitialLaw::anisotropic_gaussian(const Vec& variances) {
  return InitialLaw{{1.0}, {Vec(variances.dim())}, {variances}};
}

InitialLaw InitialLaw::gaussian_mixture(std::vector<double> weights,
                                        std::vector<Vec> centers,
                                        std::vector<Vec> variances) {
  return InitialLaw{std::move(weights), std::move(centers),
                    std::move(variances)};
}

InitialLaw InitialLaw::bimodal(int d) {
  require_dim(d);
  Vec c(d), var(d);
  c[0] = 1.0;
  var[0] = 0.5;
  for (int a = 1; a < d; ++a) var[a] = d == 2 ? 0.5 : 0.75;
  return gaussian_mixture({0.5, 0.5}, {c, -1.0 * c}, {var, var});
}

Vec InitialLaw::directional_temperatures() const {
  const int d = dim();
  Vec e(d);
  for (std::size_t k = 0; k < weights.size(); ++k)
    for (int a = 0; a < d; ++a)
      e[a] += weights[k] *
              (centers[k][a] * centers[k][a] + variances[k][a]);
  return e;
}

void InitialLaw::validate() const {
  if (weights.empty() || weights.size() != centers.size() ||
      weights.size() != variances.size())
    throw std::invalid_argument("initial law: component lists disagree");
  const int d = dim();
  require_dim(d);
  double mass = 0.0;
  Vec mean(d);
  for (std::size_t k = 0; k < weights.size(); ++k) {
    if (!(weights[k] > 0.0))
      throw std::invalid_argument("initial law: weights must be positive");
    if (centers[k].dim() != d || variances[k].dim() != d)
      throw std::invalid_argument("initial law: mixed dimensions");
    for (int a = 0; a < d; ++a)
      if (!(variances[k][a] > 0.0))
        throw std::invalid_argument("initial law: variances must be > 0");
    mass += weights[k];
    mean += weights[k] * centers[k];
  }
  if (std::abs(mass - 1.0) > 1e-12)
    throw std::invalid_argument("initial law: weights must sum to 1");
  if (mean.norm() > 1e-12)
    throw std::invalid_argument("initial law: mean must be zero");
  const Vec e = directional_temperatures();
  double energy = 0.0;
  for (int a = 0; a < d; ++a) {
    if (!(e[a] > 0.0 && e[a] < d))
      throw std::invalid_argument(
          "initial law: directional temperatures must lie in (0, d)");
    energy += e[a];
  }
  if (std::abs(energy - d) > 1e-12)
    throw std::invalid_argument("initial law: energy must equal d");
}

ParticleState sample_initial(const InitialLaw& law, std::size_t n,
                             NoiseSource& noise, bool exact_center) {
  law.validate();
  const int d = law.dim();
  ParticleState state(d, n);
  std::vector<double> cumulative(law.weights.size());
  std::partial_sum(law.weights.begin(), law.weights.end(),
                   cumulative.begin());
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t k = 0;
    if (law.weights.size() > 1) {
      const double u = noise.uniform();
      while (k + 1 < cumulative.size() && u >= cumulative[k]) ++k;
    }
    Vec v(d);
    for (int a = 0; a < d; ++a)
      v[a] = law.centers[k][a] + std::sqrt(law.variances[k][a]) * noise.normal();
    state.set_velocity(i, v);
  }
  if (exact_center) {
    const Vec m = sufficient_stats(state).m;
    for (std::size_t i = 0; i < n; ++i)
      state.set_velocity(i, state.velocity(i) - m);
  }
  return state;
}

}  // namespace landau
