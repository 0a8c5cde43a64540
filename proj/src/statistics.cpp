#include "landau/statistics.hpp"

#include <cmath>
#include <stdexcept>

namespace landau {

double empirical_moment(const ParticleState& state, int p) {
  if (p != 2 && p != 4 && p != 6 && p != 8)
    throw std::invalid_argument("empirical_moment: p must be 2, 4, 6 or 8");
  const int half = p / 2;
  double sum = 0.0;
  for (std::size_t i = 0; i < state.size(); ++i) {
    const double r2 = state.velocity(i).norm2();
    double term = 1.0;
    for (int k = 0; k < half; ++k) term *= r2;
    sum += term;
  }
  return sum / static_cast<double>(state.size());
}

double directional_temperature_emp(const ParticleState& state, int alpha) {
  if (alpha < 0 || alpha >= state.dim())
    throw std::invalid_argument("direction index out of range");
  double sum = 0.0;
  auto v = state.data();
  for (std::size_t i = 0; i < state.size(); ++i) {
    const double x = v[i * state.dim() + alpha];
    sum += x * x;
  }
  return sum / static_cast<double>(state.size());
}

double lln_functional(const ParticleState& state, double t,
                      const MomentState& moments) {
  const int d = state.dim();
  if (moments.dim() != d)
    throw std::invalid_argument("moment state dimension mismatch");
  const SufficientStats stats = sufficient_stats(state);
  double sum = 0.0;
  for (std::size_t i = 0; i < state.size(); ++i) {
    const Vec v = state.velocity(i);
    const Mat diff = abar(v, t, moments) - diffusion_matrix_fast(stats, v);
    const double fro = diff.frobenius();
    sum += fro * fro;
  }
  return sum / static_cast<double>(state.size());
}

NamedValues mixed_moment_functionals(const ParticleState& state) {
  const int d = state.dim();
  const std::size_t n = state.size();
  if (n < 2)
    throw std::invalid_argument("mixed moment functionals need N >= 2");

  // Power sums over particles.
  Vec s1(d), s2(d), s4(d), s1e(d), s2e(d);
  double se = 0.0, see = 0.0;
  const int npairs = pair_count(d);
  std::array<double, 3> pab{}, pab2{};
  for (std::size_t i = 0; i < n; ++i) {
    const Vec v = state.velocity(i);
    const double e = v.norm2();
    se += e;
    see += e * e;
    for (int a = 0; a < d; ++a) {
      const double x2 = v[a] * v[a];
      s1[a] += v[a];
      s2[a] += x2;
      s4[a] += x2 * x2;
      s1e[a] += v[a] * e;
      s2e[a] += x2 * e;
    }
    for (int p = 0; p < npairs; ++p) {
      const auto [a, b] = pair_at(d, p);
      const double x = v[a] * v[b];
      pab[p] += x;
      pab2[p] += x * x;
    }
  }

  const double nn = static_cast<double>(n);
  const double n2 = nn * nn, n3 = n2 * nn;
  NamedValues out;
  double cross = 0.0, cross_energy = 0.0;
  std::vector<double> alpha_cross(d), alpha_cross_energy(d);
  for (int a = 0; a < d; ++a) {
    alpha_cross[a] = (s1[a] * s1[a] - s2[a]) / n2;
    cross += alpha_cross[a];
    // sum over distinct (i, j, k) of x_i x_j z_k with x = v_a, z = |v|^2.
    alpha_cross_energy[a] = (s1[a] * s1[a] * se - s2[a] * se -
                             2.0 * s1e[a] * s1[a] + 2.0 * s2e[a]) /
                            n3;
    cross_energy += alpha_cross_energy[a];
  }
  out.emplace_back("cross", cross);
  for (int a = 0; a < d; ++a)
    out.emplace_back("alpha_cross_" + std::to_string(a + 1), alpha_cross[a]);
  out.emplace_back("energy_energy", (se * se - see) / n2);
  for (int a = 0; a < d; ++a)
    out.emplace_back("dir_dir_" + std::to_string(a + 1),
                     (s2[a] * s2[a] - s4[a]) / n2);
  for (int p = 0; p < npairs; ++p) {
    const auto [a, b] = pair_at(d, p);
    out.emplace_back("ab_cross_" + std::to_string(a + 1) + std::to_string(b + 1),
                     (pab[p] * pab[p] - pab2[p]) / n2);
  }
  for (int a = 0; a < d; ++a)
    out.emplace_back("alpha_cross_energy_" + std::to_string(a + 1),
                     alpha_cross_energy[a]);
  out.emplace_back("cross_energy", cross_energy);
  return out;
}

double moment_bound(double mp_0, int p, int d, std::size_t n, double t) {
  if (p <= 2) throw std::invalid_argument("moment bound needs p > 2");
  if (d < 2) throw std::invalid_argument("moment bound needs d >= 2");
  const double growth =
      std::pow((p + d - 3.0) / (d - 1.0), 0.5 * p);
  return mp_0 * growth * std::exp(p * (p - 2.0) * t / static_cast<double>(n));
}

double moment_bound_check(double mp_t, double mp_0, int p, int d,
                          std::size_t n, double t) {
  return moment_bound(mp_0, p, d, n, t) - mp_t;
}

StatRecord make_record(const ParticleState& state, const MomentState& moments,
                       int p, std::uint64_t replica_id, Scheme scheme) {
  const int d = state.dim();
  StatRecord rec;
  rec.time = state.time();
  rec.m2 = empirical_moment(state, 2);
  rec.m4 = empirical_moment(state, 4);
  rec.mp = empirical_moment(state, p);
  rec.p = p;
  const SufficientStats stats = sufficient_stats(state);
  for (int a = 0; a < d; ++a) rec.psi.push_back(stats.M(a, a));
  for (int q = 0; q < pair_count(d); ++q) {
    const auto [a, b] = pair_at(d, q);
    rec.cross_moments.push_back(stats.M(a, b));
  }
  rec.lln_value = lln_functional(state, state.time(), moments);
  if (state.size() >= 2) rec.hierarchy = mixed_moment_functionals(state);
  rec.replica_id = replica_id;
  rec.scheme = scheme;
  return rec;
}

double pairwise_sum(std::span<const double> x) {
  if (x.size() <= 8) {
    double s = 0.0;
    for (double v : x) s += v;
    return s;
  }
  const std::size_t half = x.size() / 2;
  return pairwise_sum(x.first(half)) + pairwise_sum(x.subspan(half));
}

double MeanSd::standard_error() const {
  return n > 0 ? sd / std::sqrt(static_cast<double>(n)) : 0.0;
}

MeanSd mean_sd(std::span<const double> x) {
  MeanSd out;
  out.n = x.size();
  if (x.empty()) return out;
  out.mean = pairwise_sum(x) / static_cast<double>(x.size());
  if (x.size() > 1) {
    std::vector<double> dev(x.size());
    for (std::size_t i = 0; i < x.size(); ++i)
      dev[i] = (x[i] - out.mean) * (x[i] - out.mean);
    out.sd = std::sqrt(pairwise_sum(dev) / static_cast<double>(x.size() - 1));
  }
  return out;
}

}  // namespace landau
