#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "landau/config.hpp"
#include "landau/experiment.hpp"
#include "landau/io.hpp"
#include "landau/report.hpp"

using namespace landau;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("landau_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void spit(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

int run_tool(const std::string& args) {
  const std::string cmd = std::string(LANDAU_LAB_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

ExperimentConfig parse(const std::string& text) {
  return config_from_key_values(parse_key_values(text));
}

}  // namespace

TEST_CASE("config parsing") {
  const ExperimentConfig c = parse(
      "# comment\n"
      "sim.d = 3\n"
      "sim.n = 250   # trailing comment\n"
      "sim.scheme = environmental\n"
      "sim.seed = 18446744073709551615\n"
      "initial.anisotropy = 0.5, -0.25, -0.25\n"
      "sweep.n_values = 100,200,400,800\n");
  CHECK(c.sim.d == 3);
  CHECK(c.sim.n == 250);
  CHECK(c.sim.scheme == Scheme::environmental);
  CHECK(c.sim.seed == 18446744073709551615ull);
  CHECK(c.sim.initial.directional_temperatures()[0] == doctest::Approx(1.5));
  CHECK(c.n_values.size() == 4);
}

TEST_CASE("config errors name the offending key") {
  CHECK_THROWS_WITH_AS(parse("sim.bogus = 1\n"), doctest::Contains("sim.bogus"), ConfigError);
  CHECK_THROWS_WITH_AS(parse("sim.n = 5\nsim.n = 6\n"), doctest::Contains("sim.n"),
                       ConfigError);
  CHECK_THROWS_WITH_AS(parse("sim.dt = -1\n"), doctest::Contains("sim.dt"), ConfigError);
  CHECK_THROWS_WITH_AS(parse("sim.n = ten\n"), doctest::Contains("sim.n"), ConfigError);
  CHECK_THROWS_WITH_AS(parse("sim.scheme = verlet\n"), doctest::Contains("sim.scheme"),
                       ConfigError);
  CHECK_THROWS_WITH_AS(parse("initial.anisotropy = 1.2,-1.2\n"),
                       doctest::Contains("initial"), ConfigError);
  CHECK_THROWS_AS(parse("just some words\n"), ConfigError);
  CHECK_THROWS_AS(load_config("/nonexistent/landau.cfg"), ConfigError);
}

TEST_CASE("config key/value echo round trips") {
  const ExperimentConfig c = parse(
      "sim.n = 77\nsim.dt = 0.0025\ninitial.kind = bimodal\ngrid.n = 65\n"
      "chaos.pool = all\nsweep.times = 0.1,0.3\n");
  const KeyValues kv = c.to_key_values();
  const ExperimentConfig back = config_from_key_values(kv);
  CHECK(back.to_key_values() == kv);
  CHECK(back.sim.dt == 0.0025);
  CHECK(back.chaos_pool == PoolMode::all);
  for (const auto& [k, v] : kv) {
    CAPTURE(k);
    CHECK(std::find(config_keys().begin(), config_keys().end(), k) != config_keys().end());
  }
}

TEST_CASE("csv tables round trip and reject other versions") {
  const fs::path dir = fresh_dir("csv");
  CsvTable t;
  t.kind = "stats";
  t.columns = {"time", "M2"};
  t.rows = {{0.0, 0.1 + 0.2}, {1e-300, -3.5e12}};
  write_csv(dir / "a.csv", t);
  const CsvTable back = read_csv(dir / "a.csv", "stats");
  CHECK(back.rows == t.rows);
  CHECK(back.columns == t.columns);
  CHECK(peek_kind(dir / "a.csv") == "stats");
  CHECK_THROWS_AS(read_csv(dir / "a.csv", "chaos"), SchemaError);
  CHECK_THROWS_AS(back.column("M4"), SchemaError);

  std::string text = slurp(dir / "a.csv");
  spit(dir / "v2.csv", "# landau-lab stats v2" + text.substr(text.find('\n')));
  CHECK_THROWS_AS(read_csv(dir / "v2.csv"), SchemaError);
  spit(dir / "bad.csv", "# landau-lab stats v1\ntime,M2\n0,abc\n");
  CHECK_THROWS_AS(read_csv(dir / "bad.csv"), SchemaError);
  spit(dir / "ragged.csv", "# landau-lab stats v1\ntime,M2\n0\n");
  CHECK_THROWS_AS(read_csv(dir / "ragged.csv"), SchemaError);
  spit(dir / "noheader.csv", "time,M2\n0,1\n");
  CHECK_THROWS_AS(read_csv(dir / "noheader.csv"), SchemaError);

  for (double x : {0.1, 1.0 / 3.0, 6.02214076e23, -0.0, 5e-324})
    CHECK(parse_double(format_double(x)) == x);
  fs::remove_all(dir);
}

TEST_CASE("simulate with t_end = 0 writes one row per replica") {
  const fs::path dir = fresh_dir("sim0");
  ExperimentConfig c = parse("sim.n = 20\nsim.t_end = 0\nsim.replicas = 3\n");
  CHECK(cmd_simulate(c, {dir, 1}) == kExitOk);
  for (int r = 0; r < 3; ++r) {
    char name[32];
    std::snprintf(name, sizeof name, "replica_%04d.csv", r);
    const CsvTable t = read_csv(dir / name, "stats");
    CHECK(t.rows.size() == 1);
    CHECK(t.values("time")[0] == 0.0);
  }
  const auto manifest = nlohmann::json::parse(slurp(dir / "manifest.json"));
  CHECK(manifest.at("command") == "simulate");
  CHECK(manifest.at("tool_version") == kToolVersion);
  CHECK(manifest.contains("seed_rule"));
  CHECK(manifest.at("config").at("sim.n") == "20");
  fs::remove_all(dir);
}

TEST_CASE("replica results do not depend on the worker count") {
  SimConfig base;
  base.n = 40;
  base.dt = 0.01;
  base.t_end = 0.1;
  base.record_every = 5;
  const auto serial = run_replicas(base, 8, 123, 1);
  const auto parallel = run_replicas(base, 8, 123, 4);
  REQUIRE(serial.size() == 8);
  for (std::size_t r = 0; r < 8; ++r) {
    const auto a = serial[r].final_state.data(), b = parallel[r].final_state.data();
    CHECK(std::equal(a.begin(), a.end(), b.begin(), b.end()));
    CHECK(serial[r].records.back().m4 == parallel[r].records.back().m4);
  }
  CHECK(serial[0].final_state.data()[0] != serial[1].final_state.data()[0]);
}

TEST_CASE("seed derivation") {
  CHECK(stream_seed(1, 0) != stream_seed(1, 1));
  CHECK(stream_seed(1, 0) == splitmix64(1 + 0x9E3779B97F4A7C15ull));
  CHECK(sweep_seed(9, 500, 3) == stream_seed(stream_seed(9, (1ull << 32) + 500), 3));
  CHECK(aux_seed(9, 1) == stream_seed(9, (1ull << 63) + 1));
}

TEST_CASE("parallel_indexed keeps order and reports the first failure") {
  const auto v = parallel_indexed<int>(50, 4, [](std::size_t k) { return int(k * k); });
  for (int k = 0; k < 50; ++k) CHECK(v[k] == k * k);
  CHECK_THROWS_WITH(parallel_indexed<int>(10, 3,
                                          [](std::size_t k) -> int {
                                            if (k == 4 || k == 7)
                                              throw std::runtime_error("boom " + std::to_string(k));
                                            return 0;
                                          }),
                    "boom 4");
}

TEST_CASE("the tool reproduces a run from its manifest") {
  const fs::path dir = fresh_dir("repro");
  spit(dir / "run.cfg",
       "sim.n = 64\nsim.dt = 0.01\nsim.t_end = 0.2\nsim.replicas = 4\n"
       "sim.record_every = 5\nsim.seed = 42\ninitial.kind = bimodal\n");
  REQUIRE(run_tool("simulate --config " + (dir / "run.cfg").string() + " --out " +
                   (dir / "a").string() + " --workers 1") == 0);
  REQUIRE(run_tool("simulate --config " + (dir / "a/manifest.json").string() + " --out " +
                   (dir / "b").string() + " --workers 4") == 0);
  for (int r = 0; r < 4; ++r) {
    char name[32];
    std::snprintf(name, sizeof name, "replica_%04d.csv", r);
    CHECK(slurp(dir / "a" / name) == slurp(dir / "b" / name));
  }
  REQUIRE(run_tool("simulate --config " + (dir / "run.cfg").string() + " --out " +
                   (dir / "c").string() + " --seed 43") == 0);
  CHECK(slurp(dir / "a/replica_0000.csv") != slurp(dir / "c/replica_0000.csv"));
  fs::remove_all(dir);
}

TEST_CASE("tool exit codes") {
  const fs::path dir = fresh_dir("exit");
  spit(dir / "bad.cfg", "sim.nn = 3\n");
  CHECK(run_tool("simulate --config " + (dir / "bad.cfg").string() + " --out " +
                 (dir / "o").string()) == kExitConfig);
  CHECK(run_tool("simulate") == kExitConfig);
  CHECK(run_tool("frobnicate") == kExitConfig);
  CHECK(run_tool("--version") == 0);
  CHECK(run_tool("report --out " + (dir / "r").string() + " " + (dir / "nothing").string()) ==
        kExitConfig);

  spit(dir / "boom.cfg", "sim.n = 8\nsim.dt = 50\nsim.t_end = 20000\nsim.record_every = 1000\n");
  CHECK(run_tool("simulate --config " + (dir / "boom.cfg").string() + " --out " +
                 (dir / "boom").string()) == kExitNumerical);
  const auto manifest = nlohmann::json::parse(slurp(dir / "boom/manifest.json"));
  CHECK(manifest.at("blown_up").size() == 1);

  spit(dir / "one.cfg", "sim.n = 20\nsweep.n_values = 100\n");
  CHECK(run_tool("sweep-lln --config " + (dir / "one.cfg").string() + " --out " +
                 (dir / "lln").string()) == kExitConfig);
  fs::remove_all(dir);
}

TEST_CASE("LLN sweep rejects degenerate N grids") {
  CHECK_THROWS_AS(lln_sweep(parse("sweep.n_values = 100\n"), 1), ConfigError);
  CHECK_THROWS_AS(lln_sweep(parse("sweep.n_values = 100,200,400\n"), 1), ConfigError);
  CHECK_THROWS_AS(parse("sweep.n_values = 100,100,200,400\n"), ConfigError);
}

TEST_CASE("report fits synthetic c/N data") {
  const fs::path dir = fresh_dir("report");
  CsvTable t;
  t.kind = "lln_rate";
  t.columns = {"N", "time", "mean", "sd", "stderr", "replicas"};
  for (double n : {250.0, 500.0, 1000.0, 2000.0})
    t.rows.push_back({n, 0.5, 3.0 / n, 0.1 / n, 0.01 / n, 16.0});
  write_csv(dir / "lln_rate.csv", t);
  RunContext ctx{dir / "out", 1};
  CHECK(cmd_report({dir / "lln_rate.csv"}, ctx) == kExitOk);
  CHECK(fs::exists(dir / "out/lln_rate.svg"));
  const auto summary = nlohmann::json::parse(slurp(dir / "out/summary.json"));
  const std::string dump = summary.dump();
  CAPTURE(dump);
  bool found = false;
  for (const auto& table : summary.at("tables"))
    for (const auto& [label, fit] : table.at("slopes").items()) {
      CHECK(fit.at("slope").get<double>() == doctest::Approx(-1.0).epsilon(1e-9));
      CHECK(fit.at("r_squared").get<double>() == doctest::Approx(1.0));
      found = true;
    }
  CHECK(found);
  fs::remove_all(dir);
}

TEST_CASE("report input errors") {
  const fs::path dir = fresh_dir("report_err");
  RunContext ctx{dir / "out", 1};
  CHECK_THROWS_AS(cmd_report({}, ctx), ConfigError);
  CsvTable t;
  t.kind = "lln_rate";
  t.columns = {"N", "time"};
  t.rows = {{100, 0.5}};
  write_csv(dir / "missing.csv", t);
  CHECK_THROWS_AS(cmd_report({dir / "missing.csv"}, ctx), SchemaError);
  t.columns = {"N", "time", "mean", "sd", "stderr", "replicas"};
  t.rows.clear();
  write_csv(dir / "empty.csv", t);
  CHECK_THROWS_AS(cmd_report({dir / "empty.csv"}, ctx), SchemaError);
  fs::create_directories(dir / "blank");
  CHECK_THROWS_AS(cmd_report({dir / "blank"}, ctx), SchemaError);
  fs::remove_all(dir);
}

TEST_CASE("rendered SVG matches the golden file") {
  Plot p;
  p.title = "Synthetic decay";
  p.x_label = "N";
  p.y_label = "value";
  p.log_x = p.log_y = true;
  Series a{"measured", {100, 200, 400, 800}, {0.031, 0.0148, 0.0077, 0.0039}, false, true};
  Series b{"slope -1", {100, 800}, {0.03, 0.00375}, true, false};
  p.series = {a, b};
  const std::string svg = render_svg(p);
  CHECK(svg == render_svg(p));
  const fs::path golden = fs::path(LANDAU_GOLDEN_DIR) / "decay_plot.svg";
  if (std::getenv("LANDAU_UPDATE_GOLDEN")) spit(golden, svg);
  REQUIRE(fs::exists(golden));
  CHECK(svg == slurp(golden));
}
