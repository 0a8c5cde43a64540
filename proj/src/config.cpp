#include "landau/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "landau/io.hpp"

namespace landau {

namespace {

const std::vector<std::string> kKeys = {
    "sim.d",           "sim.n",
    "sim.dt",          "sim.t_end",
    "sim.scheme",      "sim.seed",
    "sim.replicas",    "sim.record_every",
    "sim.record_times", "sim.fast_path",
    "sim.exact_center", "moments.p",
    "initial.kind",    "initial.anisotropy",
    "initial.variances", "initial.weights",
    "initial.centers", "sweep.n_values",
    "sweep.times",     "grid.L",
    "grid.n",          "grid.dt",
    "grid.t_end",      "grid.output_times",
    "grid.self_consistent", "grid.limiter",
    "chaos.time",
    "chaos.pool",      "chaos.limit_samples",
    "chaos.n_proj",    "chaos.knn_k",
    "chaos.l1_bins",   "chaos.null_trials",
};

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void bad(const std::string& key, const std::string& what) {
  throw ConfigError(key + ": " + what);
}

double to_double(const std::string& key, const std::string& v) {
  try {
    return parse_double(v);
  } catch (const SchemaError&) {
    bad(key, "expected a number, got '" + v + "'");
  }
}

std::uint64_t to_u64(const std::string& key, const std::string& v) {
  std::uint64_t x = 0;
  const auto res = std::from_chars(v.data(), v.data() + v.size(), x);
  if (res.ec != std::errc() || res.ptr != v.data() + v.size())
    bad(key, "expected a nonnegative integer, got '" + v + "'");
  return x;
}

int to_int(const std::string& key, const std::string& v) {
  const std::uint64_t x = to_u64(key, v);
  if (x > 1u << 30) bad(key, "value too large");
  return static_cast<int>(x);
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true") return true;
  if (v == "false") return false;
  bad(key, "expected true or false, got '" + v + "'");
}

std::vector<double> to_list(const std::string& key, const std::string& v) {
  std::vector<double> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(to_double(key, trim(item)));
  if (out.empty()) bad(key, "expected a comma-separated list");
  return out;
}

std::string join(const std::vector<double>& xs) {
  std::string s;
  for (std::size_t k = 0; k < xs.size(); ++k)
    s += (k ? "," : "") + format_double(xs[k]);
  return s;
}

std::vector<Vec> chunk(const std::string& key, const std::vector<double>& xs,
                       int d, std::size_t count) {
  if (xs.size() != count * static_cast<std::size_t>(d))
    bad(key, "expected " + std::to_string(count * d) + " values");
  std::vector<Vec> out;
  for (std::size_t k = 0; k < count; ++k)
    out.push_back(Vec::from(std::span<const double>(xs).subspan(k * d, d)));
  return out;
}

InitialLaw build_initial(const KeyValues& kv, int d) {
  auto get = [&](const std::string& k) -> const std::string* {
    const auto it = kv.find(k);
    return it == kv.end() ? nullptr : &it->second;
  };
  const std::string kind = get("initial.kind") ? *get("initial.kind") : "gaussian";
  if (kind == "gaussian") {
    if (get("initial.weights") || get("initial.centers"))
      bad("initial.kind", "gaussian takes no weights or centers");
    if (get("initial.variances") && get("initial.anisotropy"))
      bad("initial.variances", "give either variances or anisotropy");
    Vec var(d);
    if (const auto* v = get("initial.variances")) {
      var = chunk("initial.variances", to_list("initial.variances", *v), d, 1)[0];
    } else if (const auto* a = get("initial.anisotropy")) {
      const Vec aniso =
          chunk("initial.anisotropy", to_list("initial.anisotropy", *a), d, 1)[0];
      for (int k = 0; k < d; ++k) var[k] = 1.0 + aniso[k];
    } else {
      for (int k = 0; k < d; ++k) var[k] = 1.0;
    }
    return InitialLaw::anisotropic_gaussian(var);
  }
  if (kind == "bimodal") {
    for (const char* k : {"initial.weights", "initial.centers",
                          "initial.variances", "initial.anisotropy"})
      if (get(k)) bad(k, "not used by the bimodal preset");
    return InitialLaw::bimodal(d);
  }
  if (kind == "mixture") {
    if (get("initial.anisotropy")) bad("initial.anisotropy", "not used by mixtures");
    for (const char* k : {"initial.weights", "initial.centers", "initial.variances"})
      if (!get(k)) bad(k, "required for a mixture");
    const auto w = to_list("initial.weights", *get("initial.weights"));
    return InitialLaw::gaussian_mixture(
        w, chunk("initial.centers", to_list("initial.centers", *get("initial.centers")), d, w.size()),
        chunk("initial.variances", to_list("initial.variances", *get("initial.variances")), d, w.size()));
  }
  bad("initial.kind", "expected gaussian, bimodal or mixture, got '" + kind + "'");
}

}  // namespace

const std::vector<std::string>& config_keys() { return kKeys; }

KeyValues parse_key_values(const std::string& text) {
  KeyValues kv;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (std::find(kKeys.begin(), kKeys.end(), key) == kKeys.end())
      bad(key, "unknown key");
    if (value.empty()) bad(key, "empty value");
    if (!kv.emplace(key, value).second) bad(key, "given more than once");
  }
  return kv;
}

ExperimentConfig config_from_key_values(const KeyValues& kv) {
  for (const auto& [k, v] : kv)
    if (std::find(kKeys.begin(), kKeys.end(), k) == kKeys.end())
      bad(k, "unknown key");
  ExperimentConfig c;
  auto has = [&](const char* k) { return kv.count(k) > 0; };
  auto val = [&](const char* k) { return kv.at(k); };

  if (has("sim.d")) c.sim.d = to_int("sim.d", val("sim.d"));
  if (c.sim.d != 2 && c.sim.d != 3) bad("sim.d", "must be 2 or 3");
  if (has("sim.n")) c.sim.n = to_u64("sim.n", val("sim.n"));
  if (has("sim.dt")) c.sim.dt = to_double("sim.dt", val("sim.dt"));
  if (has("sim.t_end")) c.sim.t_end = to_double("sim.t_end", val("sim.t_end"));
  if (has("sim.scheme")) {
    try {
      c.sim.scheme = parse_scheme(val("sim.scheme"));
    } catch (const std::invalid_argument& e) {
      bad("sim.scheme", e.what());
    }
  }
  if (has("sim.seed")) c.sim.seed = to_u64("sim.seed", val("sim.seed"));
  if (has("sim.replicas")) c.replicas = to_u64("sim.replicas", val("sim.replicas"));
  if (has("sim.record_every"))
    c.sim.record_every = to_u64("sim.record_every", val("sim.record_every"));
  if (has("sim.record_times"))
    c.sim.record_times = to_list("sim.record_times", val("sim.record_times"));
  if (has("sim.fast_path")) c.sim.fast_path = to_bool("sim.fast_path", val("sim.fast_path"));
  if (has("sim.exact_center"))
    c.sim.exact_center = to_bool("sim.exact_center", val("sim.exact_center"));
  if (has("moments.p")) c.sim.moment_p = to_int("moments.p", val("moments.p"));
  try {
    c.sim.initial = build_initial(kv, c.sim.d);
  } catch (const std::invalid_argument& e) {
    bad("initial", e.what());
  }

  if (has("sweep.n_values"))
    for (double x : to_list("sweep.n_values", val("sweep.n_values"))) {
      if (!(x >= 2.0) || x != std::floor(x))
        bad("sweep.n_values", "entries must be integers >= 2");
      c.n_values.push_back(static_cast<std::size_t>(x));
    }
  if (has("sweep.times")) c.sweep_times = to_list("sweep.times", val("sweep.times"));

  if (has("grid.L")) c.grid.L = to_double("grid.L", val("grid.L"));
  if (has("grid.n")) c.grid.n = to_int("grid.n", val("grid.n"));
  if (has("grid.dt")) c.grid_dt = to_double("grid.dt", val("grid.dt"));
  if (has("grid.t_end")) c.grid_t_end = to_double("grid.t_end", val("grid.t_end"));
  if (has("grid.output_times"))
    c.grid_output_times = to_list("grid.output_times", val("grid.output_times"));
  if (has("grid.self_consistent"))
    c.self_consistent = to_bool("grid.self_consistent", val("grid.self_consistent"));

  if (has("grid.limiter"))
    c.positivity_limiter = to_bool("grid.limiter", val("grid.limiter"));
  if (has("chaos.time")) c.chaos_time = to_double("chaos.time", val("chaos.time"));
  if (has("chaos.pool")) {
    const std::string p = val("chaos.pool");
    if (p == "particle1") c.chaos_pool = PoolMode::particle1;
    else if (p == "all") c.chaos_pool = PoolMode::all;
    else bad("chaos.pool", "expected particle1 or all");
  }
  if (has("chaos.limit_samples"))
    c.chaos_limit_samples = to_u64("chaos.limit_samples", val("chaos.limit_samples"));
  if (has("chaos.n_proj")) c.chaos_n_proj = to_int("chaos.n_proj", val("chaos.n_proj"));
  if (has("chaos.knn_k")) c.chaos_knn_k = to_int("chaos.knn_k", val("chaos.knn_k"));
  if (has("chaos.l1_bins")) c.chaos_l1_bins = to_int("chaos.l1_bins", val("chaos.l1_bins"));
  if (has("chaos.null_trials"))
    c.chaos_null_trials = to_int("chaos.null_trials", val("chaos.null_trials"));

  try {
    c.sim.validate();
  } catch (const std::invalid_argument& e) {
    const std::string msg = e.what();
    if (msg.rfind("initial", 0) == 0) throw ConfigError(msg);
    if (msg.rfind("moment_p", 0) == 0) throw ConfigError("moments.p" + msg.substr(8));
    throw ConfigError("sim." + msg);
  }
  if (c.replicas < 1) bad("sim.replicas", "must be >= 1");
  for (std::size_t k = 1; k < c.n_values.size(); ++k)
    if (c.n_values[k] <= c.n_values[k - 1])
      bad("sweep.n_values", "must be strictly increasing");
  for (double t : c.sweep_times)
    if (!(t >= 0.0)) bad("sweep.times", "entries must be >= 0");
  try {
    c.grid.validate();
  } catch (const std::invalid_argument& e) {
    bad("grid", e.what());
  }
  if (!(c.grid_dt >= 0.0)) bad("grid.dt", "must be >= 0");
  if (!(c.grid_t_end >= 0.0)) bad("grid.t_end", "must be >= 0");
  for (double t : c.grid_output_times)
    if (!(t >= 0.0) || t > c.grid_t_end)
      bad("grid.output_times", "entries must lie in [0, grid.t_end]");
  if (!(c.chaos_time > 0.0)) bad("chaos.time", "must be > 0");
  if (c.chaos_limit_samples < 2) bad("chaos.limit_samples", "must be >= 2");
  if (c.chaos_n_proj < 32) bad("chaos.n_proj", "must be >= 32");
  if (c.chaos_knn_k < 1) bad("chaos.knn_k", "must be >= 1");
  if (c.chaos_l1_bins < 1) bad("chaos.l1_bins", "must be >= 1");
  if (c.chaos_null_trials < 2) bad("chaos.null_trials", "must be >= 2");
  return c;
}

KeyValues ExperimentConfig::to_key_values() const {
  KeyValues kv;
  kv["sim.d"] = std::to_string(sim.d);
  kv["sim.n"] = std::to_string(sim.n);
  kv["sim.dt"] = format_double(sim.dt);
  kv["sim.t_end"] = format_double(sim.t_end);
  kv["sim.scheme"] = std::string(to_string(sim.scheme));
  kv["sim.seed"] = std::to_string(sim.seed);
  kv["sim.replicas"] = std::to_string(replicas);
  kv["sim.record_every"] = std::to_string(sim.record_every);
  if (!sim.record_times.empty()) kv["sim.record_times"] = join(sim.record_times);
  kv["sim.fast_path"] = sim.fast_path ? "true" : "false";
  kv["sim.exact_center"] = sim.exact_center ? "true" : "false";
  kv["moments.p"] = std::to_string(sim.moment_p);

  const InitialLaw& law = sim.initial;
  const bool centred_gaussian =
      law.is_gaussian() && law.centers.front().norm2() == 0.0;
  std::vector<double> w = law.weights, c, v;
  for (const Vec& x : law.centers)
    for (int a = 0; a < x.dim(); ++a) c.push_back(x[a]);
  for (const Vec& x : law.variances)
    for (int a = 0; a < x.dim(); ++a) v.push_back(x[a]);
  kv["initial.kind"] = centred_gaussian ? "gaussian" : "mixture";
  kv["initial.variances"] = join(v);
  if (!centred_gaussian) {
    kv["initial.weights"] = join(w);
    kv["initial.centers"] = join(c);
  }

  if (!n_values.empty()) {
    std::vector<double> ns(n_values.begin(), n_values.end());
    kv["sweep.n_values"] = join(ns);
  }
  if (!sweep_times.empty()) kv["sweep.times"] = join(sweep_times);
  kv["grid.L"] = format_double(grid.L);
  kv["grid.n"] = std::to_string(grid.n);
  kv["grid.dt"] = format_double(grid_dt);
  kv["grid.t_end"] = format_double(grid_t_end);
  if (!grid_output_times.empty()) kv["grid.output_times"] = join(grid_output_times);
  kv["grid.self_consistent"] = self_consistent ? "true" : "false";
  kv["grid.limiter"] = positivity_limiter ? "true" : "false";
  kv["chaos.time"] = format_double(chaos_time);
  kv["chaos.pool"] = chaos_pool == PoolMode::particle1 ? "particle1" : "all";
  kv["chaos.limit_samples"] = std::to_string(chaos_limit_samples);
  kv["chaos.n_proj"] = std::to_string(chaos_n_proj);
  kv["chaos.knn_k"] = std::to_string(chaos_knn_k);
  kv["chaos.l1_bins"] = std::to_string(chaos_l1_bins);
  kv["chaos.null_trials"] = std::to_string(chaos_null_trials);
  return kv;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot read " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  if (path.extension() != ".json") return config_from_key_values(parse_key_values(ss.str()));

  nlohmann::json manifest;
  try {
    manifest = nlohmann::json::parse(ss.str());
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config: " + std::string(e.what()));
  }
  if (!manifest.contains("config") || !manifest["config"].is_object())
    throw ConfigError("config: manifest has no config object");
  KeyValues kv;
  for (const auto& [k, v] : manifest["config"].items()) {
    if (!v.is_string()) bad(k, "manifest values must be strings");
    kv[k] = v.get<std::string>();
  }
  return config_from_key_values(kv);
}

}  // namespace landau
