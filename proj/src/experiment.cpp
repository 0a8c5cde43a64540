#include "landau/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <map>

#include <json.hpp>

#include "landau/field_io.hpp"

namespace landau {

namespace {

using json = nlohmann::ordered_json;
using Clock = std::chrono::steady_clock;

constexpr std::uint64_t kSweepBase = 1ull << 32;
constexpr std::uint64_t kAuxBase = 1ull << 63;
constexpr std::uint64_t kLimitStream = 0;
constexpr std::uint64_t kProjectionStream = 1;
constexpr std::uint64_t kNullStream = 16;

constexpr const char* kSeedRule =
    "stream_seed(m, s) = splitmix64(m + (s + 1) * 0x9E3779B97F4A7C15); "
    "replica r: stream_seed(master, r); sweep replica r at N: "
    "stream_seed(stream_seed(master, 2^32 + N), r); auxiliary k: "
    "stream_seed(master, 2^63 + k)";

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string utc_now() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

class Manifest {
 public:
  Manifest(std::string command, const ExperimentConfig& config)
      : start_(Clock::now()) {
    doc_["tool_version"] = kToolVersion;
    doc_["command"] = std::move(command);
    doc_["master_seed"] = config.sim.seed;
    doc_["seed_rule"] = kSeedRule;
    json cfg = json::object();
    for (const auto& [k, v] : config.to_key_values()) cfg[k] = v;
    doc_["config"] = cfg;
    doc_["started_at"] = utc_now();
    doc_["stage_seconds"] = json::object();
    doc_["artifacts"] = json::array();
  }

  json& operator[](const char* key) { return doc_[key]; }
  void stage(const std::string& name, Clock::time_point t0) {
    doc_["stage_seconds"][name] = seconds_since(t0);
  }
  void artifact(const std::filesystem::path& p) {
    doc_["artifacts"].push_back(p.filename().string());
  }
  void write(const std::filesystem::path& dir) {
    doc_["wall_clock_seconds"] = seconds_since(start_);
    std::ofstream out(dir / "manifest.json");
    if (!out) throw std::runtime_error("cannot write manifest in " + dir.string());
    out << doc_.dump(2) << '\n';
  }

 private:
  json doc_;
  Clock::time_point start_;
};

void ensure_dir(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir))
    throw ConfigError("out: cannot create directory " + dir.string());
}

std::string numbered(const char* prefix, std::size_t k, const char* ext) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%s_%04zu%s", prefix, k, ext);
  return buf;
}

json fit_json(const RateFit& fit) {
  json j;
  j["slope"] = fit.slope;
  j["intercept"] = fit.intercept;
  j["r_squared"] = fit.r_squared;
  json pts = json::array();
  for (const auto& [n, v] : fit.points) pts.push_back({n, v});
  j["points"] = pts;
  return j;
}

void write_json(const std::filesystem::path& p, const json& j) {
  std::ofstream out(p);
  if (!out) throw std::runtime_error("cannot write " + p.string());
  out << j.dump(2) << '\n';
}

struct ReplicaJob {
  std::size_t level;
  std::size_t replica;
};

std::vector<ReplicaJob> sweep_jobs(std::size_t levels, std::size_t replicas) {
  std::vector<ReplicaJob> jobs;
  for (std::size_t l = 0; l < levels; ++l)
    for (std::size_t r = 0; r < replicas; ++r) jobs.push_back({l, r});
  return jobs;
}

json sweep_seed_json(const ExperimentConfig& config) {
  json seeds = json::array();
  for (std::size_t n : config.n_values) {
    json s = json::array();
    for (std::size_t r = 0; r < config.replicas; ++r)
      s.push_back(sweep_seed(config.sim.seed, n, r));
    seeds.push_back({{"n", n}, {"seeds", s}});
  }
  return seeds;
}

}  // namespace

std::uint64_t sweep_seed(std::uint64_t master, std::size_t n, std::size_t replica) {
  return stream_seed(stream_seed(master, kSweepBase + n), replica);
}

std::uint64_t aux_seed(std::uint64_t master, std::uint64_t k) {
  return stream_seed(master, kAuxBase + k);
}

std::vector<RunResult> run_replicas(const SimConfig& base, std::size_t replicas,
                                    std::uint64_t master, unsigned workers) {
  base.validate();
  return parallel_indexed<RunResult>(replicas, workers, [&](std::size_t r) {
    SimConfig cfg = base;
    cfg.seed = stream_seed(master, r);
    return run(cfg, r);
  });
}

CsvTable stats_table(const std::vector<StatRecord>& records) {
  CsvTable t;
  t.kind = "stats";
  if (records.empty()) return t;
  const StatRecord& first = records.front();
  const int d = static_cast<int>(first.psi.size());
  t.columns = {"time", "M2", "M4"};
  const bool extra = first.p != 2 && first.p != 4;
  if (extra) t.columns.push_back("M" + std::to_string(first.p));
  for (int a = 0; a < d; ++a) t.columns.push_back("Psi_" + std::to_string(a + 1));
  for (int a = 0; a < d; ++a)
    for (int b = a + 1; b < d; ++b)
      t.columns.push_back("cross_" + std::to_string(a + 1) + std::to_string(b + 1));
  t.columns.push_back("lln_value");
  for (const auto& [name, v] : first.hierarchy) t.columns.push_back("hierarchy_" + name);
  for (const StatRecord& r : records) {
    std::vector<double> row = {r.time, r.m2, r.m4};
    if (extra) row.push_back(r.mp);
    row.insert(row.end(), r.psi.begin(), r.psi.end());
    row.insert(row.end(), r.cross_moments.begin(), r.cross_moments.end());
    row.push_back(r.lln_value);
    for (const auto& [name, v] : r.hierarchy) row.push_back(v);
    t.rows.push_back(std::move(row));
  }
  return t;
}

LlnSweep lln_sweep(const ExperimentConfig& config, unsigned workers) {
  if (config.n_values.size() < 4)
    throw ConfigError("sweep.n_values: at least 4 values are required");
  std::vector<double> times = config.sweep_times;
  if (times.empty()) times.push_back(config.sim.t_end);
  const double t_end = *std::max_element(times.begin(), times.end());

  const auto jobs = sweep_jobs(config.n_values.size(), config.replicas);
  const auto values = parallel_indexed<std::vector<double>>(
      jobs.size(), workers, [&](std::size_t k) {
        SimConfig cfg = config.sim;
        cfg.n = config.n_values[jobs[k].level];
        cfg.t_end = t_end;
        cfg.record_times = times;
        cfg.seed = sweep_seed(config.sim.seed, cfg.n, jobs[k].replica);
        const RunResult res = run(cfg, jobs[k].replica);
        if (res.blown_up) throw NumericalFailure(res.diagnostic);
        std::vector<double> out;
        for (double t : times) {
          const auto it = std::find_if(
              res.records.begin(), res.records.end(), [&](const StatRecord& r) {
                return std::abs(r.time - t) <= 0.5 * cfg.dt;
              });
          out.push_back(it->lln_value);
        }
        return out;
      });

  LlnSweep sweep;
  for (std::size_t ti = 0; ti < times.size(); ++ti) {
    std::vector<std::pair<double, double>> points;
    for (std::size_t l = 0; l < config.n_values.size(); ++l) {
      std::vector<double> xs;
      for (std::size_t k = 0; k < jobs.size(); ++k)
        if (jobs[k].level == l) xs.push_back(values[k][ti]);
      LlnRow row{config.n_values[l], times[ti], mean_sd(xs)};
      points.emplace_back(static_cast<double>(row.n), row.value.mean);
      sweep.rows.push_back(row);
    }
    sweep.fits.emplace_back(times[ti], convergence_slope(points));
  }
  return sweep;
}

double auto_grid_dt(const Grid2D& grid, const MomentState& moments, double t_end) {
  return 0.9 * std::min(max_stable_dt(grid, moments, 0.0),
                        max_stable_dt(grid, moments, t_end));
}

LimitSolve solve_limit(const ExperimentConfig& config, double t_end,
                       const std::vector<double>& output_times) {
  if (config.sim.d != 2)
    throw ConfigError("sim.d: the limit solver is two-dimensional");
  const InitialLaw& law = config.sim.initial;
  LimitSolve out{MomentState::from_temperatures(law.directional_temperatures()),
                 0.0, {}};
  out.dt = config.grid_dt > 0.0 ? config.grid_dt
                                : auto_grid_dt(config.grid, out.moments, t_end);
  SolveOptions opts;
  opts.output_times = output_times;
  opts.self_consistent = config.self_consistent;
  opts.positivity_limiter = config.positivity_limiter;
  try {
    out.result = solve(field_from_law(config.grid, law), t_end, out.dt,
                       out.moments, opts);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("grid.dt: ") + e.what());
  }
  return out;
}

ChaosSweep chaos_sweep(const ExperimentConfig& config, unsigned workers) {
  if (config.sim.d != 2)
    throw ConfigError("sim.d: chaos metrics are computed in two dimensions");
  if (config.n_values.size() < 3)
    throw ConfigError("sweep.n_values: at least 3 values are required");
  const std::uint64_t master = config.sim.seed;

  const LimitSolve limit = solve_limit(config, config.chaos_time, {});
  const DensityField& field = limit.result.snapshots.back();
  NoiseSource limit_noise(aux_seed(master, kLimitStream));
  const FieldSamples limit_draws =
      sample_from_field(field, config.chaos_limit_samples, limit_noise);
  const SampleSet& reference = limit_draws.samples;

  // Particle pools.
  const auto jobs = sweep_jobs(config.n_values.size(), config.replicas);
  const auto pieces = parallel_indexed<std::vector<double>>(
      jobs.size(), workers, [&](std::size_t k) {
        SimConfig cfg = config.sim;
        cfg.n = config.n_values[jobs[k].level];
        cfg.t_end = config.chaos_time;
        cfg.record_times.clear();
        cfg.record_every = std::max<std::size_t>(cfg.steps(), 1);
        cfg.seed = sweep_seed(master, cfg.n, jobs[k].replica);
        const RunResult res = run(cfg, jobs[k].replica);
        if (res.blown_up) throw NumericalFailure(res.diagnostic);
        const ParticleState& s = res.final_state;
        if (config.chaos_pool == PoolMode::particle1) {
          const Vec v = s.velocity(0);
          return std::vector<double>{v[0], v[1]};
        }
        return std::vector<double>(s.data().begin(), s.data().end());
      });
  std::vector<SampleSet> pools(config.n_values.size());
  for (auto& p : pools) {
    p.d = 2;
    p.source = "particles";
  }
  for (std::size_t k = 0; k < jobs.size(); ++k) {
    auto& pts = pools[jobs[k].level].points;
    pts.insert(pts.end(), pieces[k].begin(), pieces[k].end());
  }

  auto project_noise = [&] { return NoiseSource(aux_seed(master, kProjectionStream)); };

  // Null calibration per distinct pool size.
  ChaosSweep sweep;
  sweep.acceptance_rate = limit_draws.acceptance_rate;
  std::map<std::size_t, std::size_t> null_index;
  for (const SampleSet& p : pools) {
    const std::size_t m = p.size();
    if (null_index.count(m)) continue;
    struct Trial {
      double w2, kl, l1;
    };
    const auto trials = parallel_indexed<Trial>(
        config.chaos_null_trials, workers, [&](std::size_t t) {
          NoiseSource noise(aux_seed(master, kNullStream + t));
          const SampleSet draw = sample_from_field(field, m, noise).samples;
          NoiseSource proj = project_noise();
          return Trial{sliced_w2(draw, reference, config.chaos_n_proj, proj),
                       knn_kl(draw, reference, config.chaos_knn_k),
                       l1_to_field(draw, field, config.chaos_l1_bins)};
        });
    std::vector<double> w2, kl, l1, margin;
    for (const Trial& t : trials) {
      w2.push_back(t.w2);
      kl.push_back(t.kl);
      l1.push_back(t.l1);
    }
    NullCalibration cal{m, mean_sd(w2), mean_sd(kl), mean_sd(l1), {}};
    for (const Trial& t : trials)
      margin.push_back(ckp_check(t.kl, t.l1 - cal.l1.mean, 1));
    cal.ckp_margin = mean_sd(margin);
    null_index[m] = sweep.nulls.size();
    sweep.nulls.push_back(cal);
  }

  sweep.rows = parallel_indexed<ChaosRow>(pools.size(), workers, [&](std::size_t l) {
    const SampleSet& pool = pools[l];
    const NullCalibration& cal = sweep.nulls[null_index.at(pool.size())];
    NoiseSource proj = project_noise();
    ChaosRow row;
    row.n = config.n_values[l];
    row.pool_size = pool.size();
    row.sliced_w2 = sliced_w2(pool, reference, config.chaos_n_proj, proj);
    row.knn_kl = knn_kl(pool, reference, config.chaos_knn_k);
    row.l1 = l1_to_field(pool, field, config.chaos_l1_bins);
    row.l1_debiased = row.l1 - cal.l1.mean;
    row.ckp_margin = ckp_check(row.knn_kl, row.l1_debiased, 1);
    row.ckp_sigma = cal.ckp_margin.sd;
    return row;
  });

  std::vector<std::pair<double, double>> w2_pts, kl_pts;
  sweep.w2_decreasing = true;
  sweep.ckp_ok = true;
  for (std::size_t l = 0; l < sweep.rows.size(); ++l) {
    const ChaosRow& r = sweep.rows[l];
    w2_pts.emplace_back(static_cast<double>(r.n), r.sliced_w2);
    kl_pts.emplace_back(static_cast<double>(r.n), r.knn_kl);
    if (l > 0 && !(r.sliced_w2 < sweep.rows[l - 1].sliced_w2))
      sweep.w2_decreasing = false;
    if (r.ckp_margin < -4.0 * r.ckp_sigma) sweep.ckp_ok = false;
  }
  sweep.w2_fit = convergence_slope(w2_pts);
  try {
    sweep.kl_fit = convergence_slope(kl_pts);
    sweep.kl_slope_ok = sweep.kl_fit->slope <= kChaosKlSlopeGate;
  } catch (const std::invalid_argument& e) {
    sweep.kl_fit_error = e.what();
    sweep.kl_slope_ok = false;
  }
  return sweep;
}

MomentCheck verify_moments(const ExperimentConfig& config, unsigned workers) {
  const auto results =
      run_replicas(config.sim, config.replicas, config.sim.seed, workers);
  MomentCheck check;
  for (std::size_t r = 0; r < results.size(); ++r) {
    if (results[r].blown_up) throw NumericalFailure(results[r].diagnostic);
    const auto& recs = results[r].records;
    const double mp0 = recs.front().mp;
    for (const StatRecord& rec : recs) {
      MomentCheckRow row{r, rec.time, rec.mp,
                         moment_bound(mp0, rec.p, config.sim.d, config.sim.n, rec.time),
                         0.0};
      row.margin = row.bound - row.mp;
      if (!(row.margin > 0.0)) check.all_positive = false;
      check.rows.push_back(row);
    }
  }
  return check;
}

CoupledEnergy coupled_energy_levels(const SimConfig& base,
                                    const std::vector<int>& factors,
                                    std::size_t replicas, std::uint64_t master,
                                    unsigned workers) {
  base.validate();
  const std::size_t fine_steps = base.steps();
  for (int f : factors)
    if (f < 1 || fine_steps % static_cast<std::size_t>(f) != 0)
      throw std::invalid_argument("factors must divide the number of fine steps");

  struct Out {
    double initial;
    std::vector<double> final;
  };
  const auto outs = parallel_indexed<Out>(replicas, workers, [&](std::size_t r) {
    NoiseSource noise(stream_seed(master, r));
    const ParticleState s0 =
        sample_initial(base.initial, base.n, noise, base.exact_center);
    const std::size_t count = base.n * static_cast<std::size_t>(base.d);
    std::vector<ParticleState> states(factors.size(), s0);
    std::vector<std::vector<double>> acc(factors.size(),
                                         std::vector<double>(count, 0.0));
    std::vector<double> g(count), scaled(count);
    for (std::size_t k = 1; k <= fine_steps; ++k) {
      noise.fill_normal(g);
      for (std::size_t l = 0; l < factors.size(); ++l) {
        auto& a = acc[l];
        for (std::size_t c = 0; c < count; ++c) a[c] += g[c];
        const auto f = static_cast<std::size_t>(factors[l]);
        if (k % f != 0) continue;
        const double norm = 1.0 / std::sqrt(static_cast<double>(f));
        for (std::size_t c = 0; c < count; ++c) {
          scaled[c] = a[c] * norm;
          a[c] = 0.0;
        }
        states[l] = step_fournier(states[l], base.dt * static_cast<double>(f),
                                  scaled, base.fast_path);
        if (!states[l].all_finite())
          throw NumericalFailure("non-finite velocity in coupled run");
      }
    }
    Out o{empirical_moment(s0, 2), {}};
    for (const auto& s : states) o.final.push_back(empirical_moment(s, 2));
    return o;
  });

  CoupledEnergy res;
  res.factors = factors;
  res.final.assign(factors.size(), {});
  for (const Out& o : outs) {
    res.initial.push_back(o.initial);
    for (std::size_t l = 0; l < factors.size(); ++l) res.final[l].push_back(o.final[l]);
  }
  return res;
}

int cmd_simulate(const ExperimentConfig& config, const RunContext& ctx) {
  ensure_dir(ctx.out_dir);
  Manifest manifest("simulate", config);
  json seeds = json::array();
  for (std::size_t r = 0; r < config.replicas; ++r)
    seeds.push_back(stream_seed(config.sim.seed, r));
  manifest["replica_seeds"] = seeds;

  auto t0 = Clock::now();
  const auto results =
      run_replicas(config.sim, config.replicas, config.sim.seed, ctx.workers);
  manifest.stage("simulate", t0);

  t0 = Clock::now();
  json flagged = json::array();
  for (std::size_t r = 0; r < results.size(); ++r) {
    const auto path = ctx.out_dir / numbered("replica", r, ".csv");
    write_csv(path, stats_table(results[r].records));
    manifest.artifact(path);
    if (results[r].blown_up)
      flagged.push_back({{"replica", r}, {"diagnostic", results[r].diagnostic}});
  }
  manifest.stage("write", t0);
  manifest["blown_up"] = flagged;
  manifest.write(ctx.out_dir);
  return flagged.empty() ? kExitOk : kExitNumerical;
}

int cmd_solve(const ExperimentConfig& config, const RunContext& ctx) {
  ensure_dir(ctx.out_dir);
  Manifest manifest("solve", config);
  auto t0 = Clock::now();
  const LimitSolve limit =
      solve_limit(config, config.grid_t_end, config.grid_output_times);
  manifest.stage("solve", t0);
  manifest["grid_dt"] = limit.dt;
  manifest["steps"] = limit.result.steps;
  manifest["limited_node_updates"] = limit.result.limited_node_updates;

  t0 = Clock::now();
  CsvTable diag;
  diag.kind = "diagnostics";
  diag.columns = {"time",     "mass",     "momentum_1", "momentum_2",
                  "energy",   "E11_grid", "E22_grid",   "E12_grid",
                  "E11_closed", "E22_closed", "max_diag_deviation",
                  "log_gradient", "log_hessian"};
  for (const SolveDiagnostics& d : limit.result.diagnostics) {
    const auto& c = d.consistency;
    diag.rows.push_back({d.time, d.conserved.mass, d.conserved.momentum[0],
                         d.conserved.momentum[1], d.conserved.energy,
                         c.grid_moments(0, 0), c.grid_moments(1, 1),
                         c.grid_moments(0, 1), c.closed_form[0], c.closed_form[1],
                         c.max_diag_deviation, d.log_gradient, d.log_hessian});
  }
  const auto diag_path = ctx.out_dir / "diagnostics.csv";
  write_csv(diag_path, diag);
  manifest.artifact(diag_path);
  for (std::size_t k = 0; k < limit.result.snapshots.size(); ++k) {
    const auto stem = ctx.out_dir / numbered("snapshot", k, "");
    write_field(stem, limit.result.snapshots[k], &limit.moments);
    auto csv = stem;
    csv += ".csv";
    manifest.artifact(csv);
  }
  manifest.stage("write", t0);
  manifest.write(ctx.out_dir);
  return kExitOk;
}

int cmd_sweep_lln(const ExperimentConfig& config, const RunContext& ctx) {
  ensure_dir(ctx.out_dir);
  Manifest manifest("sweep-lln", config);
  manifest["replica_seeds"] = sweep_seed_json(config);
  auto t0 = Clock::now();
  const LlnSweep sweep = lln_sweep(config, ctx.workers);
  manifest.stage("sweep", t0);

  CsvTable t;
  t.kind = "lln_rate";
  t.columns = {"N", "time", "mean", "sd", "standard_error", "replicas"};
  for (const LlnRow& r : sweep.rows)
    t.rows.push_back({static_cast<double>(r.n), r.time, r.value.mean, r.value.sd,
                      r.value.standard_error(), static_cast<double>(r.value.n)});
  const auto csv = ctx.out_dir / "lln_rate.csv";
  write_csv(csv, t);
  manifest.artifact(csv);

  json fits = json::array();
  for (const auto& [time, fit] : sweep.fits) {
    json j = fit_json(fit);
    j["time"] = time;
    fits.push_back(j);
  }
  const auto fit_path = ctx.out_dir / "lln_fit.json";
  write_json(fit_path, fits);
  manifest.artifact(fit_path);
  manifest.write(ctx.out_dir);
  return kExitOk;
}

int cmd_sweep_chaos(const ExperimentConfig& config, const RunContext& ctx) {
  ensure_dir(ctx.out_dir);
  Manifest manifest("sweep-chaos", config);
  manifest["replica_seeds"] = sweep_seed_json(config);
  auto t0 = Clock::now();
  const ChaosSweep sweep = chaos_sweep(config, ctx.workers);
  manifest.stage("sweep", t0);

  CsvTable t;
  t.kind = "chaos";
  t.columns = {"N",  "pool_size",   "sliced_w2",  "knn_kl",
               "l1", "l1_debiased", "ckp_margin", "ckp_sigma"};
  for (const ChaosRow& r : sweep.rows)
    t.rows.push_back({static_cast<double>(r.n), static_cast<double>(r.pool_size),
                      r.sliced_w2, r.knn_kl, r.l1, r.l1_debiased, r.ckp_margin,
                      r.ckp_sigma});
  const auto csv = ctx.out_dir / "chaos.csv";
  write_csv(csv, t);
  manifest.artifact(csv);

  CsvTable nt;
  nt.kind = "chaos_null";
  nt.columns = {"pool_size",   "trials",      "sliced_w2_mean", "sliced_w2_sd",
                "knn_kl_mean", "knn_kl_sd",   "l1_mean",        "l1_sd",
                "ckp_margin_mean", "ckp_margin_sd"};
  for (const NullCalibration& c : sweep.nulls)
    nt.rows.push_back({static_cast<double>(c.pool_size),
                       static_cast<double>(c.l1.n), c.sliced_w2.mean,
                       c.sliced_w2.sd, c.knn_kl.mean, c.knn_kl.sd, c.l1.mean,
                       c.l1.sd, c.ckp_margin.mean, c.ckp_margin.sd});
  const auto null_csv = ctx.out_dir / "chaos_null.csv";
  write_csv(null_csv, nt);
  manifest.artifact(null_csv);

  json fits;
  fits["limit_acceptance_rate"] = sweep.acceptance_rate;
  if (sweep.w2_fit) fits["sliced_w2"] = fit_json(*sweep.w2_fit);
  if (sweep.kl_fit) fits["knn_kl"] = fit_json(*sweep.kl_fit);
  else fits["knn_kl_error"] = sweep.kl_fit_error;
  fits["gates"] = {{"sliced_w2_decreasing", sweep.w2_decreasing},
                   {"knn_kl_slope_ok", sweep.kl_slope_ok},
                   {"ckp_ok", sweep.ckp_ok}};
  const auto fit_path = ctx.out_dir / "chaos_fit.json";
  write_json(fit_path, fits);
  manifest.artifact(fit_path);
  manifest.write(ctx.out_dir);
  return kExitOk;
}

int cmd_verify_moments(const ExperimentConfig& config, const RunContext& ctx) {
  ensure_dir(ctx.out_dir);
  Manifest manifest("verify-moments", config);
  json seeds = json::array();
  for (std::size_t r = 0; r < config.replicas; ++r)
    seeds.push_back(stream_seed(config.sim.seed, r));
  manifest["replica_seeds"] = seeds;
  auto t0 = Clock::now();
  const MomentCheck check = verify_moments(config, ctx.workers);
  manifest.stage("verify", t0);

  CsvTable t;
  t.kind = "moments";
  t.columns = {"replica", "time", "mp", "bound", "margin"};
  for (const MomentCheckRow& r : check.rows)
    t.rows.push_back({static_cast<double>(r.replica), r.time, r.mp, r.bound, r.margin});
  const auto csv = ctx.out_dir / "moments.csv";
  write_csv(csv, t);
  manifest.artifact(csv);
  manifest["gate_passed"] = check.all_positive;
  manifest.write(ctx.out_dir);
  return check.all_positive ? kExitOk : kExitGate;
}

}  // namespace landau
