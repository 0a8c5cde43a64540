#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "landau/particle_system.hpp"
#include "landau/simulation.hpp"
#include "landau/statistics.hpp"
#include "oracles.hpp"

using namespace landau;

namespace {

ParticleState random_state(std::mt19937_64& rng, int d, std::size_t n,
                           double scale = 1.5) {
  std::normal_distribution<double> g(0.0, scale);
  std::vector<double> v(n * d);
  for (double& x : v) x = g(rng);
  return ParticleState(d, std::move(v));
}

double max_abs_diff(const ParticleState& a, const ParticleState& b) {
  double m = 0.0;
  for (std::size_t k = 0; k < a.data().size(); ++k)
    m = std::max(m, std::abs(a.data()[k] - b.data()[k]));
  return m;
}

double max_abs_diff(const Mat& a, const Mat& b) {
  double m = 0.0;
  for (int r = 0; r < a.dim(); ++r)
    for (int c = 0; c < a.dim(); ++c) m = std::max(m, std::abs(a(r, c) - b(r, c)));
  return m;
}

std::vector<double> normals(std::mt19937_64& rng, std::size_t count) {
  std::normal_distribution<double> g;
  std::vector<double> out(count);
  for (double& x : out) x = g(rng);
  return out;
}

const Scheme kSchemes[] = {Scheme::fournier, Scheme::fgm, Scheme::environmental};

}  // namespace

TEST_CASE("scheme names round trip") {
  for (Scheme s : kSchemes) CHECK(parse_scheme(to_string(s)) == s);
  CHECK_THROWS_AS(parse_scheme("milstein"), std::invalid_argument);
}

TEST_CASE("noise_count per scheme") {
  CHECK(noise_count(Scheme::fournier, 10, 3) == 30);
  CHECK(noise_count(Scheme::fgm, 10, 3) == 300);
  CHECK(noise_count(Scheme::environmental, 10, 2) == 10);
  CHECK(noise_count(Scheme::environmental, 10, 3) == 30);
}

TEST_CASE("sufficient_stats on a two-particle state") {
  const ParticleState s(2, {1.0, 0.0, -1.0, 2.0});
  const SufficientStats st = sufficient_stats(s);
  CHECK(st.m[0] == doctest::Approx(0.0));
  CHECK(st.m[1] == doctest::Approx(1.0));
  CHECK(st.s == doctest::Approx(3.0));
  CHECK(st.M(0, 0) == doctest::Approx(1.0));
  CHECK(st.M(0, 1) == doctest::Approx(-1.0));
  CHECK(st.M(1, 1) == doctest::Approx(2.0));
}

TEST_CASE("drift and diffusion examples") {
  // Two particles at (1,0) and (-1,0): z = (2,0) for particle 0.
  const ParticleState s(2, {1.0, 0.0, -1.0, 0.0});
  const Vec b = interaction_drift_ref(s, 0);
  CHECK(b[0] == doctest::Approx(-2.0));
  CHECK(b[1] == doctest::Approx(0.0));
  const Mat A = diffusion_matrix_ref(s, 0);
  CHECK(A(0, 0) == doctest::Approx(0.0));
  CHECK(A(1, 1) == doctest::Approx(2.0));
  CHECK(A(0, 1) == doctest::Approx(0.0));
}

TEST_CASE("reference and fast coefficients match the oracle") {
  std::mt19937_64 rng(11);
  for (int d : {2, 3})
    for (std::size_t n : {1u, 2u, 7u, 64u}) {
      const ParticleState s = random_state(rng, d, n);
      const SufficientStats st = sufficient_stats(s);
      for (std::size_t i = 0; i < n; ++i) {
        const Vec bo = oracle::drift(s, i);
        const Mat Ao = oracle::diffusion(s, i);
        const double scale = 1.0 + oracle::frob2(Ao);
        const Vec br = interaction_drift_ref(s, i);
        const Vec bf = interaction_drift_fast(st, s.velocity(i));
        for (int a = 0; a < d; ++a) {
          CHECK(std::abs(br[a] - bo[a]) <= 1e-10 * (1.0 + std::abs(bo[a])));
          CHECK(std::abs(bf[a] - bo[a]) <= 1e-10 * (1.0 + std::abs(bo[a])));
        }
        CHECK(max_abs_diff(diffusion_matrix_ref(s, i), Ao) <= 1e-10 * scale);
        CHECK(max_abs_diff(diffusion_matrix_fast(st, s.velocity(i)), Ao) <=
              1e-10 * scale);
      }
    }
}

TEST_CASE("fast and reference steps agree on identical normals") {
  std::mt19937_64 rng(12);
  for (int d : {2, 3})
    for (std::size_t n : {1u, 5u, 50u}) {
      const ParticleState s = random_state(rng, d, n);
      for (Scheme sc : {Scheme::fournier, Scheme::environmental}) {
        const auto g = normals(rng, noise_count(sc, n, d));
        const ParticleState a = step(sc, s, 0.01, g, true);
        const ParticleState b = step(sc, s, 0.01, g, false);
        CHECK(max_abs_diff(a, b) <= 1e-10);
      }
    }
}

TEST_CASE("single particle and coincident particles are fixed points") {
  std::mt19937_64 rng(13);
  for (Scheme sc : kSchemes)
    for (bool fast : {true, false}) {
      const ParticleState one(3, {0.3, -1.2, 2.0});
      const auto g1 = normals(rng, noise_count(sc, 1, 3));
      CHECK(max_abs_diff(step(sc, one, 0.1, g1, fast), one) == 0.0);

      const ParticleState same(2, {0.7, -0.4, 0.7, -0.4, 0.7, -0.4});
      const auto g3 = normals(rng, noise_count(sc, 3, 2));
      // The fast diffusion matrix carries O(eps) cancellation, whose square
      // root is O(sqrt(eps)).
      CHECK(max_abs_diff(step(sc, same, 0.1, g3, fast), same) <=
            (fast && sc != Scheme::fgm ? 1e-7 : 1e-14));
    }
}

TEST_CASE("zero noise leaves only the drift") {
  std::mt19937_64 rng(14);
  const ParticleState s = random_state(rng, 2, 9);
  for (Scheme sc : kSchemes) {
    const std::vector<double> zeros(noise_count(sc, 9, 2), 0.0);
    const ParticleState next = step(sc, s, 0.02, zeros, true);
    for (std::size_t i = 0; i < 9; ++i) {
      const Vec expected = s.velocity(i) + 0.02 * oracle::drift(s, i);
      for (int a = 0; a < 2; ++a)
        CHECK(next.velocity(i)[a] == doctest::Approx(expected[a]).epsilon(1e-12));
    }
  }
}

TEST_CASE("step consumes exactly noise_count normals") {
  const ParticleState s(2, {1.0, 0.0, 0.0, 1.0, -1.0, -1.0});
  for (Scheme sc : kSchemes) {
    NoiseSource a(99), b(99);
    (void)step(sc, s, 0.01, a, true);
    std::vector<double> skip(noise_count(sc, 3, 2));
    b.fill_normal(skip);
    CHECK(a.normal() == b.normal());
  }
}

TEST_CASE("one-step increment covariance is 2 dt A for every scheme") {
  const double dt = 0.01;
  const ParticleState s(2, {1.0, 0.5, -0.8, 0.2, 0.1, -1.1});
  const int reps = 40000;
  for (Scheme sc : kSchemes) {
    NoiseSource noise(1234);
    std::vector<double> sxx(3), syy(3), sxy(3), sx(3), sy(3);
    for (int r = 0; r < reps; ++r) {
      const ParticleState next = step(sc, s, dt, noise, true);
      for (std::size_t i = 0; i < 3; ++i) {
        const Vec mean = s.velocity(i) + dt * oracle::drift(s, i);
        const double x = next.velocity(i)[0] - mean[0];
        const double y = next.velocity(i)[1] - mean[1];
        sx[i] += x;
        sy[i] += y;
        sxx[i] += x * x;
        syy[i] += y * y;
        sxy[i] += x * y;
      }
    }
    for (std::size_t i = 0; i < 3; ++i) {
      const Mat C = 2.0 * dt * oracle::diffusion(s, i);
      const double cxx = sxx[i] / reps, cyy = syy[i] / reps, cxy = sxy[i] / reps;
      const double se_xx = std::sqrt(2.0 * C(0, 0) * C(0, 0) / reps);
      const double se_yy = std::sqrt(2.0 * C(1, 1) * C(1, 1) / reps);
      const double se_xy = std::sqrt((C(0, 0) * C(1, 1) + C(0, 1) * C(0, 1)) / reps);
      CAPTURE(to_string(sc));
      CHECK(std::abs(cxx - C(0, 0)) <= 5.0 * se_xx);
      CHECK(std::abs(cyy - C(1, 1)) <= 5.0 * se_yy);
      CHECK(std::abs(cxy - C(0, 1)) <= 5.0 * se_xy);
      CHECK(std::abs(sx[i] / reps) <= 5.0 * std::sqrt(C(0, 0) / reps));
    }
  }
}

TEST_CASE("sample_initial matches the law's second moments") {
  NoiseSource noise(5);
  const InitialLaw law = InitialLaw::anisotropic_gaussian(Vec(1.5, 0.5));
  const ParticleState s = sample_initial(law, 100000, noise);
  CHECK(directional_temperature_emp(s, 0) == doctest::Approx(1.5).epsilon(0.02));
  CHECK(directional_temperature_emp(s, 1) == doctest::Approx(0.5).epsilon(0.02));

  const InitialLaw bi = InitialLaw::bimodal(3);
  const Vec e = bi.directional_temperatures();
  CHECK(e[0] == doctest::Approx(1.5));
  CHECK(e[1] == doctest::Approx(0.75));
  CHECK(e[2] == doctest::Approx(0.75));
  const ParticleState t = sample_initial(bi, 100000, noise, true);
  const SufficientStats st = sufficient_stats(t);
  for (int a = 0; a < 3; ++a) CHECK(std::abs(st.m[a]) <= 1e-12);
  CHECK(directional_temperature_emp(t, 0) == doctest::Approx(1.5).epsilon(0.02));
}

TEST_CASE("inadmissible initial laws are rejected") {
  CHECK_THROWS_AS(InitialLaw::anisotropic_gaussian(Vec(1.5, 0.6)).validate(),
                  std::invalid_argument);
  CHECK_THROWS_AS(InitialLaw::anisotropic_gaussian(Vec(2.0, 0.0)).validate(),
                  std::invalid_argument);
  CHECK_THROWS_AS(InitialLaw::gaussian_mixture({0.5, 0.5}, {Vec(1.0, 0.0), Vec(0.0, 0.0)},
                                               {Vec(0.5, 1.0), Vec(0.5, 1.0)})
                      .validate(),
                  std::invalid_argument);
}

TEST_CASE("run with t_end = 0 records the initial state once") {
  SimConfig c;
  c.n = 50;
  c.t_end = 0.0;
  const RunResult r = run(c);
  REQUIRE(r.records.size() == 1);
  CHECK(r.records[0].time == 0.0);
  CHECK_FALSE(r.blown_up);
}

TEST_CASE("run is deterministic and fast path matches reference") {
  SimConfig c;
  c.n = 64;
  c.dt = 0.01;
  c.t_end = 0.2;
  c.record_every = 5;
  c.initial = InitialLaw::anisotropic_gaussian(Vec(1.5, 0.5));
  for (Scheme sc : {Scheme::fournier, Scheme::environmental}) {
    c.scheme = sc;
    c.fast_path = true;
    const RunResult a = run(c), b = run(c);
    CHECK(max_abs_diff(a.final_state, b.final_state) == 0.0);
    c.fast_path = false;
    const RunResult ref = run(c);
    CHECK(max_abs_diff(a.final_state, ref.final_state) <= 1e-8);
    REQUIRE(a.records.size() == ref.records.size());
    CHECK(a.records.size() == 5);
  }
}

TEST_CASE("record_times selects the nearest steps") {
  SimConfig c;
  c.n = 10;
  c.dt = 0.01;
  c.t_end = 0.5;
  c.record_times = {0.1, 0.25};
  const RunResult r = run(c);
  REQUIRE(r.records.size() == 4);
  CHECK(r.records[1].time == doctest::Approx(0.1));
  CHECK(r.records[2].time == doctest::Approx(0.25));
  CHECK(r.records[3].time == doctest::Approx(0.5));
  c.record_times = {0.7};
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
}

TEST_CASE("invalid configurations name the field") {
  SimConfig c;
  c.d = 4;
  CHECK_THROWS_WITH_AS(c.validate(), doctest::Contains("d:"), std::invalid_argument);
  c = SimConfig{};
  c.dt = 0.0;
  CHECK_THROWS_WITH_AS(c.validate(), doctest::Contains("dt"), std::invalid_argument);
  c = SimConfig{};
  c.scheme = Scheme::fgm;
  c.n = 5000;
  CHECK_THROWS_WITH_AS(c.validate(), doctest::Contains("n:"), std::invalid_argument);
}

TEST_CASE("a diverging run is flagged instead of throwing") {
  SimConfig c;
  c.n = 8;
  c.dt = 50.0;
  c.t_end = 50.0 * 400;
  c.record_every = 1000;
  const RunResult r = run(c);
  CHECK(r.blown_up);
  CHECK(r.diagnostic.find("non-finite") != std::string::npos);
  CHECK(r.final_state.all_finite());
}

TEST_CASE("the three schemes share the same law at N = 200") {
  SimConfig c;
  c.n = 200;
  c.dt = 0.01;
  c.t_end = 0.5;
  c.record_every = 1000;
  c.initial = InitialLaw::anisotropic_gaussian(Vec(1.5, 0.5));
  const int reps = 12;
  std::vector<MeanSd> psi, m4;
  for (Scheme sc : kSchemes) {
    c.scheme = sc;
    std::vector<double> p, q;
    for (int r = 0; r < reps; ++r) {
      c.seed = stream_seed(77, r);
      const RunResult res = run(c, r);
      p.push_back(res.records.back().psi[0]);
      q.push_back(res.records.back().m4);
    }
    psi.push_back(mean_sd(p));
    m4.push_back(mean_sd(q));
  }
  for (int k = 1; k < 3; ++k) {
    const double sp = std::hypot(psi[0].standard_error(), psi[k].standard_error());
    const double sq = std::hypot(m4[0].standard_error(), m4[k].standard_error());
    CHECK(std::abs(psi[k].mean - psi[0].mean) <= 4.0 * sp + 0.02);
    CHECK(std::abs(m4[k].mean - m4[0].mean) <= 4.0 * sq + 0.1);
  }
  // The environmental noise is shared by all particles, so its empirical
  // functionals fluctuate at O(1) and only significance-based checks apply.
  const double expected = 1.0 + 0.5 * std::exp(-8.0 * 0.5);
  for (const MeanSd& m : psi)
    CHECK(std::abs(m.mean - expected) <= 4.0 * m.standard_error() + 0.02);
}
