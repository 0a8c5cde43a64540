#include "landau/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace landau {

void SimConfig::validate() const {
  auto fail = [](const std::string& what) {
    throw std::invalid_argument(what);
  };
  if (d != 2 && d != 3) fail("d: must be 2 or 3");
  if (n < 1) fail("n: must be >= 1");
  if (!(dt > 0.0)) fail("dt: must be > 0");
  if (!(t_end >= 0.0)) fail("t_end: must be >= 0");
  if (record_every < 1) fail("record_every: must be >= 1");
  if (scheme == Scheme::fgm && n > kFgmMaxParticles)
    fail("n: fgm scheme is capped at 4096 particles");
  if (moment_p != 2 && moment_p != 4 && moment_p != 6 && moment_p != 8)
    fail("moment_p: must be 2, 4, 6 or 8");
  for (double t : record_times)
    if (!(t >= 0.0) || t > t_end + 0.5 * dt)
      fail("record_times: entries must lie in [0, t_end]");
  if (initial.dim() != d) fail("initial: dimension differs from d");
  try {
    initial.validate();
  } catch (const std::invalid_argument& e) {
    fail(std::string("initial: ") + e.what());
  }
}

std::size_t SimConfig::steps() const {
  return static_cast<std::size_t>(std::llround(t_end / dt));
}

RunResult run(const SimConfig& config, std::uint64_t replica_id) {
  config.validate();
  NoiseSource noise(config.seed);
  const MomentState moments =
      MomentState::from_temperatures(config.initial.directional_temperatures());

  RunResult result;
  ParticleState state =
      sample_initial(config.initial, config.n, noise, config.exact_center);
  auto record = [&](const ParticleState& s) {
    result.records.push_back(
        make_record(s, moments, config.moment_p, replica_id, config.scheme));
  };
  record(state);

  const std::size_t steps = config.steps();
  std::vector<std::size_t> marks;
  for (double t : config.record_times)
    marks.push_back(static_cast<std::size_t>(std::llround(t / config.dt)));
  std::sort(marks.begin(), marks.end());
  auto due = [&](std::size_t k) {
    if (k == steps) return true;
    if (marks.empty()) return k % config.record_every == 0;
    return std::binary_search(marks.begin(), marks.end(), k);
  };
  for (std::size_t k = 1; k <= steps; ++k) {
    auto blow_up = [&](const std::string& what) {
      std::ostringstream msg;
      msg << what << " at step " << k << " (t=" << static_cast<double>(k) * config.dt
          << ")";
      result.blown_up = true;
      result.diagnostic = msg.str();
    };
    ParticleState next{config.d, 1};
    try {
      next = step(config.scheme, state, config.dt, noise, config.fast_path);
    } catch (const std::domain_error& e) {
      // Overflowing coordinates surface first as a broken diffusion matrix.
      blow_up(std::string("non-finite diffusion matrix (") + e.what() + ")");
      break;
    }
    // Avoid clock drift from repeated addition.
    next.set_time(static_cast<double>(k) * config.dt);
    if (!next.all_finite()) {
      blow_up("non-finite velocity");
      break;
    }
    state = std::move(next);
    if (due(k)) record(state);
  }
  result.final_state = std::move(state);
  return result;
}

}  // namespace landau
