// Command-line front end: landau-lab <command> [--config PATH] [--out DIR]
// [--workers K] [--seed U64].

#include <cstdint>
#include <iostream>
#include <optional>
#include <thread>

#include <CLI11.hpp>

#include "landau/report.hpp"

namespace {

struct Options {
  std::string config;
  std::string out = ".";
  unsigned workers = 1;
  std::optional<std::uint64_t> seed;
  std::vector<std::string> inputs;
};

void add_common(CLI::App* cmd, Options& opt, bool needs_config) {
  auto* c = cmd->add_option("--config", opt.config, "experiment config or run manifest");
  if (needs_config) c->required();
  cmd->add_option("--out", opt.out, "output directory");
  cmd->add_option("--workers", opt.workers, "worker threads")
      ->check(CLI::Range(1u, 1024u));
  cmd->add_option("--seed", opt.seed, "master seed (overrides the config)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Particle systems and limit solver for the Landau equation with Maxwellian molecules"};
  app.set_version_flag("--version", landau::kToolVersion);
  app.require_subcommand(1);
  Options opt;

  struct Entry {
    const char* name;
    const char* help;
    int (*fn)(const landau::ExperimentConfig&, const landau::RunContext&);
  };
  const Entry entries[] = {
      {"simulate", "run replicas and write per-replica statistics", landau::cmd_simulate},
      {"solve", "integrate the limit equation on a grid", landau::cmd_solve},
      {"sweep-lln", "law of large numbers functional across N", landau::cmd_sweep_lln},
      {"sweep-chaos", "marginal distances to the limit across N", landau::cmd_sweep_chaos},
      {"verify-moments", "check the moment bound along trajectories", landau::cmd_verify_moments},
  };
  for (const Entry& e : entries) add_common(app.add_subcommand(e.name, e.help), opt, true);
  auto* report = app.add_subcommand("report", "plot tables and summarize fits");
  add_common(report, opt, false);
  report->add_option("inputs", opt.inputs, "tables or directories")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : landau::kExitConfig;
  }

  const landau::RunContext ctx{opt.out, opt.workers};
  try {
    if (report->parsed()) {
      std::vector<std::filesystem::path> in(opt.inputs.begin(), opt.inputs.end());
      return landau::cmd_report(in, ctx);
    }
    for (const Entry& e : entries) {
      if (!app.got_subcommand(e.name)) continue;
      landau::ExperimentConfig config = landau::load_config(opt.config);
      if (opt.seed) config.sim.seed = *opt.seed;
      const int code = e.fn(config, ctx);
      if (code == landau::kExitNumerical)
        std::cerr << "numerical failure: see manifest.json\n";
      else if (code == landau::kExitGate)
        std::cerr << "acceptance gate failed\n";
      return code;
    }
  } catch (const landau::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return landau::kExitConfig;
  } catch (const landau::SchemaError& e) {
    std::cerr << "schema error: " << e.what() << '\n';
    return landau::kExitConfig;
  } catch (const landau::NumericalFailure& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return landau::kExitNumerical;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid input: " << e.what() << '\n';
    return landau::kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
