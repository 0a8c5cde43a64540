#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <numbers>

#include "landau/field_io.hpp"
#include "landau/limit_solver.hpp"
#include "landau/moments.hpp"

using namespace landau;

namespace {

// Axis-aligned Gaussian density sampled at the nodes; unlike field_from_law
// it accepts laws that are not admissible initial data.
DensityField gaussian_field(const Grid2D& g, double var1, double var2,
                            double mu1 = 0.0, double mu2 = 0.0) {
  DensityField f(g);
  const double norm = 1.0 / (2.0 * std::numbers::pi * std::sqrt(var1 * var2));
  for (int i = 0; i < g.n; ++i)
    for (int j = 0; j < g.n; ++j) {
      const double x = g.coord(i) - mu1, y = g.coord(j) - mu2;
      f.at(i, j) = norm * std::exp(-0.5 * (x * x / var1 + y * y / var2));
    }
  return f;
}

double sup_diff(const DensityField& a, const DensityField& b) {
  double m = 0.0;
  for (std::size_t k = 0; k < a.values().size(); ++k)
    m = std::max(m, std::abs(a.values()[k] - b.values()[k]));
  return m;
}

double stable_dt(const Grid2D& g, const MomentState& ms, double t) {
  return 0.9 * std::min(max_stable_dt(g, ms, t), max_stable_dt(g, ms, t + 1.0));
}

}  // namespace

TEST_CASE("directional temperature closed form") {
  CHECK(directional_temperature(0.0, 2, 0.7) == 1.0);
  CHECK(directional_temperature(0.5, 2, 0.25) == doctest::Approx(1.06767).epsilon(1e-5));
  double prev = directional_temperature(0.5, 3, 0.0);
  for (double t = 0.1; t < 3.0; t += 0.1) {
    const double e = directional_temperature(0.5, 3, t);
    CHECK(e < prev);
    CHECK(e > 1.0);
    prev = e;
  }
}

TEST_CASE("ellipticity margin") {
  CHECK(ellipticity_margin(Vec(0.0, 0.0)) == doctest::Approx(1.0));
  CHECK(ellipticity_margin(Vec(0.5, -0.5)) == doctest::Approx(0.5));
  CHECK_THROWS_AS(ellipticity_margin(Vec(-1.0, 1.0)), std::domain_error);
  CHECK_THROWS_AS(ellipticity_margin(Vec(0.5, 0.0)), std::invalid_argument);
  CHECK(MomentState::from_temperatures(Vec(1.5, 0.75, 0.75)).eta() ==
        doctest::Approx(0.75));
}

TEST_CASE("abar examples") {
  const MomentState eq = MomentState::equilibrium(2);
  const Mat a0 = abar(Vec(0.0, 0.0), 0.4, eq);
  CHECK(a0(0, 0) == doctest::Approx(1.0));
  CHECK(a0(1, 1) == doctest::Approx(1.0));
  CHECK(a0(0, 1) == 0.0);
  const Mat a1 = abar(Vec(1.0, 0.0), 0.0, eq);
  CHECK(a1(0, 0) == doctest::Approx(1.0));
  CHECK(a1(1, 1) == doctest::Approx(2.0));
  CHECK(a1(0, 1) == 0.0);

  const MomentState ms(Vec(0.5, -0.5));
  for (double r : {3.0, 10.0, 50.0}) {
    const Mat a = abar(Vec(r, -0.3 * r), 0.0, ms);
    const SymEigen e = sym_eigen(a);
    CHECK(e.values[0] >= 2.0 - 1.5 - 1e-9);
  }
}

TEST_CASE("grid validation") {
  CHECK_NOTHROW(Grid2D{7.0, 129}.validate());
  CHECK_THROWS_AS((Grid2D{7.0, 128}.validate()), std::invalid_argument);
  CHECK_THROWS_AS((Grid2D{5.0, 129}.validate()), std::invalid_argument);
  CHECK_THROWS_AS((Grid2D{7.0, 1}.validate()), std::invalid_argument);
}

TEST_CASE("conserved quantities of sampled Gaussians") {
  const Grid2D g{6.0, 129};
  DensityField f = gaussian_field(g, 1.0, 1.0);
  const ConservedQuantities c = conserved_quantities(f);
  CHECK(std::abs(c.mass - 1.0) <= 1e-6);
  CHECK(std::abs(c.momentum[0]) <= 1e-9);
  CHECK(std::abs(c.momentum[1]) <= 1e-9);
  CHECK(std::abs(c.energy - 2.0) <= 1e-4);

  for (double& x : f.values()) x *= 2.0;
  const ConservedQuantities c2 = conserved_quantities(f);
  CHECK(c2.mass == doctest::Approx(2.0 * c.mass));
  CHECK(c2.energy == doctest::Approx(2.0 * c.energy));

  const ConservedQuantities s = conserved_quantities(gaussian_field(g, 1.0, 1.0, 0.5, -0.25));
  CHECK(s.momentum[0] == doctest::Approx(0.5).epsilon(1e-6));
  CHECK(s.momentum[1] == doctest::Approx(-0.25).epsilon(1e-6));
}

TEST_CASE("interpolation") {
  const Grid2D g{6.0, 33};
  const DensityField f = gaussian_field(g, 1.0, 1.0);
  CHECK(f.interpolate(g.coord(4), g.coord(7)) == f.at(4, 7));
  CHECK(f.interpolate(10.0, 0.0) == 0.0);
  const double mid = f.interpolate(0.5 * (g.coord(3) + g.coord(4)), g.coord(7));
  CHECK(mid == doctest::Approx(0.5 * (f.at(3, 7) + f.at(4, 7))));
}

TEST_CASE("one step conserves mass and parity") {
  const Grid2D g{7.0, 65};
  const MomentState ms(Vec(0.5, -0.5));
  const DensityField f = gaussian_field(g, 1.5, 0.5);
  const double m0 = conserved_quantities(f).mass;
  DensityField cur = f;
  const double dt = stable_dt(g, ms, 0.0);
  for (int k = 0; k < 20; ++k) {
    const DensityField next = step_fp(cur, dt, ms);
    const double before = conserved_quantities(cur).mass;
    CHECK(std::abs(conserved_quantities(next).mass - before) <= 1e-13 * before);
    cur = next;
  }
  CHECK(cur.time() == doctest::Approx(20 * dt));
  CHECK(std::abs(conserved_quantities(cur).mass - m0) <= 1e-12);
  const int n = g.n;
  double asym = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      asym = std::max(asym, std::abs(cur.at(i, j) - cur.at(n - 1 - i, n - 1 - j)));
      asym = std::max(asym, std::abs(cur.at(i, j) - cur.at(n - 1 - i, j)));
    }
  CHECK(asym <= 1e-15);
}

TEST_CASE("unstable time steps are rejected") {
  const Grid2D g{7.0, 65};
  const MomentState eq = MomentState::equilibrium(2);
  const DensityField f = gaussian_field(g, 1.0, 1.0);
  const double bound = max_stable_dt(g, eq, 0.0);
  CHECK(bound == doctest::Approx(kCflConstant * g.h() * g.h() /
                                  sym_eigen(abar(Vec(7.0, 7.0), 0.0, eq)).values[1]));
  CHECK_THROWS_WITH_AS(step_fp(f, 2.0 * bound, eq), doctest::Contains("dt"),
                       std::invalid_argument);
}

TEST_CASE("the equilibrium is a fixed point up to O(h^2)") {
  const MomentState eq = MomentState::equilibrium(2);
  double prev = 0.0;
  for (int n : {33, 65, 129}) {
    const Grid2D g{6.0, n};
    const DensityField f = gaussian_field(g, 1.0, 1.0);
    const double dt = stable_dt(g, eq, 0.0);
    const double rate = sup_diff(step_fp(f, dt, eq), f) / dt;
    MESSAGE("n=", n, " residual rate ", rate);
    CHECK(rate <= 0.1);
    if (prev > 0.0) CHECK(prev / rate >= 3.0);
    prev = rate;
  }
}

TEST_CASE("field_from_law matches the analytic density") {
  const Grid2D g{7.0, 33};
  const DensityField a =
      field_from_law(g, InitialLaw::anisotropic_gaussian(Vec(1.5, 0.5)));
  CHECK(sup_diff(a, gaussian_field(g, 1.5, 0.5)) <= 1e-15);
}

TEST_CASE("solve with t_end = 0 echoes the input") {
  const Grid2D g{6.0, 33};
  const DensityField f = gaussian_field(g, 1.0, 1.0);
  const SolveResult r = solve(f, 0.0, 1e-3, MomentState::equilibrium(2));
  REQUIRE(r.snapshots.size() == 1);
  CHECK(sup_diff(r.snapshots[0], f) == 0.0);
  CHECK(r.steps == 0);
}

TEST_CASE("grid temperatures converge at second order") {
  const MomentState ms(Vec(0.5, -0.5));
  const double t_end = 0.02;
  std::vector<double> dev;
  for (int n : {33, 65, 129}) {
    const Grid2D g{6.0, n};
    const DensityField f = gaussian_field(g, 1.5, 0.5);
    SolveOptions opt;
    const SolveResult r = solve(f, t_end, stable_dt(g, ms, 0.0), ms, opt);
    const SelfConsistencyReport rep = self_consistency(r.snapshots.back(), t_end, ms);
    MESSAGE("n=", n, " diag deviation ", rep.max_diag_deviation, " offdiag ",
            rep.max_offdiag);
    CHECK(rep.max_offdiag <= 1e-6);
    dev.push_back(rep.max_diag_deviation);
  }
  CHECK(dev[0] / dev[1] >= 3.0);
  CHECK(dev[1] / dev[2] >= 3.0);
}

TEST_CASE("self-consistent mode matches the closed form") {
  const Grid2D g{7.0, 65};
  const MomentState ms(Vec(0.5, -0.5));
  const DensityField f = gaussian_field(g, 1.5, 0.5);
  SolveOptions opt;
  opt.self_consistent = true;
  const SolveResult a = solve(f, 0.05, stable_dt(g, ms, 0.0), ms, opt);
  opt.self_consistent = false;
  const SolveResult b = solve(f, 0.05, stable_dt(g, ms, 0.0), ms, opt);
  CHECK(sup_diff(a.snapshots.back(), b.snapshots.back()) <= 1e-3 * f.max_value());
}

TEST_CASE("output times are hit exactly") {
  const Grid2D g{6.0, 33};
  const MomentState eq = MomentState::equilibrium(2);
  SolveOptions opt;
  opt.output_times = {0.0123, 0.05};
  const SolveResult r = solve(gaussian_field(g, 1.0, 1.0), 0.06, 2e-4, eq, opt);
  REQUIRE(r.snapshots.size() == 4);
  CHECK(r.snapshots[1].time() == doctest::Approx(0.0123).epsilon(1e-12));
  CHECK(r.snapshots[2].time() == doctest::Approx(0.05).epsilon(1e-12));
  CHECK(r.snapshots[3].time() == doctest::Approx(0.06).epsilon(1e-12));
  CHECK(r.diagnostics.size() == r.snapshots.size());
}

TEST_CASE("positivity limiter") {
  const Grid2D g{7.0, 65};
  const MomentState ms(Vec(0.5, -0.5));
  const DensityField f = gaussian_field(g, 1.5, 0.5);
  const double dt = stable_dt(g, ms, 0.0);
  SolveOptions opt;
  opt.output_times = {};
  const SolveResult with = solve(f, 0.2, dt, ms, opt);
  CHECK(with.limited_node_updates > 0);
  double lo = 0.0;
  for (double x : with.snapshots.back().values()) lo = std::min(lo, x);
  CHECK(lo >= 0.0);
  CHECK(std::abs(with.diagnostics.back().conserved.mass -
                 with.diagnostics.front().conserved.mass) <= 1e-12);

  opt.positivity_limiter = false;
  CHECK_THROWS_AS(solve(f, 0.2, dt, ms, opt), NumericalFailure);
}

TEST_CASE("log ratio examples") {
  const Grid2D g{7.0, 129};
  const DensityField std_gauss = gaussian_field(g, 1.0, 1.0);
  const double gr = log_gradient_ratio(std_gauss, 0.0);
  CHECK(gr < 1.0);
  CHECK(gr > 0.5);
  const DensityField narrow = gaussian_field(g, 0.5, 0.5);
  CHECK(log_gradient_ratio(narrow, 0.0) <= 2.0);
  CHECK(log_gradient_ratio(narrow, 0.0) > 1.0);

  const double hr = log_hessian_ratio(std_gauss, 0.0);
  CHECK(hr == doctest::Approx(std::sqrt(2.0)).epsilon(1e-2));
  CHECK(log_hessian_ratio(std_gauss, 1.0) == doctest::Approx(std::sqrt(2.0) / 2.0).epsilon(1e-2));
  // Hessian diag(-1/E1, -1/E2); the ratio peaks at v = 0.
  const DensityField aniso = gaussian_field(g, 1.5, 0.5);
  CHECK(log_hessian_ratio(aniso, 0.0) ==
        doctest::Approx(std::hypot(1.0 / 1.5, 1.0 / 0.5)).epsilon(1e-2));
}

TEST_CASE("gaussian lower bound fit") {
  const Grid2D g{7.0, 129};
  const GaussianLowerFit s = gaussian_lower_check(gaussian_field(g, 1.0, 1.0), 0.0);
  CHECK(s.c2_prime == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(s.c2 == doctest::Approx(1.0 / (2.0 * std::numbers::pi)).epsilon(1e-6));
  CHECK(std::abs(s.residual) <= 1e-9);
  const GaussianLowerFit w = gaussian_lower_check(gaussian_field(g, 2.0, 2.0), 0.0);
  CHECK(w.c2_prime == doctest::Approx(0.5).epsilon(1e-6));
  CHECK(w.residual <= 1e-12);
}

TEST_CASE("field snapshots round trip bit for bit") {
  const Grid2D g{7.0, 33};
  const MomentState ms(Vec(0.5, -0.5));
  DensityField f = gaussian_field(g, 1.5, 0.5);
  f.set_time(0.1 + 0.2);
  const auto dir = std::filesystem::temp_directory_path() / "landau_field_io";
  std::filesystem::create_directories(dir);
  write_field(dir / "snap", f, &ms);
  const FieldFile back = read_field(dir / "snap.json");
  CHECK(back.field.time() == f.time());
  CHECK(back.field.grid().n == g.n);
  CHECK(back.field.grid().L == g.L);
  CHECK(back.field.values() == f.values());
  REQUIRE(back.anisotropy.has_value());
  CHECK((*back.anisotropy)[0] == 0.5);
  const FieldFile csv = read_field(dir / "snap.csv");
  CHECK(csv.field.values() == f.values());
  std::filesystem::remove_all(dir);
}
