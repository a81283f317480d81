#include "lsst/simulator.hpp"

#include "lsst/rng.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace lsst {
namespace {

void require_fraction(double v, const char* name) {
  if (!(v >= 0.0 && v <= 1.0)) throw std::invalid_argument(std::string(name) + " must lie in [0, 1]");
}

void require_nonnegative(double v, const char* name) {
  if (!(v >= 0.0) || !std::isfinite(v)) throw std::invalid_argument(std::string(name) + " must be >= 0");
}

}  // namespace

void SimulatorConfig::validate() const {
  require_fraction(growth_rate, "growth_rate");
  require_fraction(death_rate, "death_rate");
  require_fraction(thin_fraction, "thin_fraction");
  require_fraction(mpb_kill_rate, "mpb_kill_rate");
  require_fraction(mpb_spread_fraction, "mpb_spread_fraction");
  require_nonnegative(birth_rate, "birth_rate");
  require_nonnegative(seedlings, "seedlings");
  require_nonnegative(mpb_growth_factor, "mpb_growth_factor");
  require_nonnegative(mpb_per_host, "mpb_per_host");
  require_nonnegative(noise_scale, "noise_scale");
  if (growth_rate + death_rate > 1.0) throw std::invalid_argument("growth_rate + death_rate must not exceed 1");
}

void InitialStateConfig::validate() const {
  if (age_mean.empty()) throw std::invalid_argument("at least one age class is required");
  if (age_spread.size() != age_mean.size())
    throw std::invalid_argument("age_spread must have one entry per age class");
  for (double v : age_mean) require_nonnegative(v, "age_mean");
  for (double v : age_spread) require_nonnegative(v, "age_spread");
  require_nonnegative(mpb_mean, "mpb_mean");
  require_nonnegative(mpb_spread, "mpb_spread");
  require_fraction(infested_fraction, "infested_fraction");
}

LandscapeState initial_state(const InitialStateConfig& config, const GridTopology& topology,
                             double spread_fraction, std::uint64_t seed) {
  config.validate();
  LandscapeState state(topology, config.schema());
  const auto& sch = state.schema;
  Rng rng(seed);
  for (auto& s : state.cells) {
    for (std::size_t k = 0; k < sch.age_classes; ++k) {
      s[sch.age(k)] = std::max(0.0, config.age_mean[k] + config.age_spread[k] * rng.normal());
    }
    if (rng.bernoulli(config.infested_fraction)) {
      s[sch.mpb()] = std::max(1.0, config.mpb_mean + config.mpb_spread * rng.normal());
    }
  }
  return refresh_spatial_features(std::move(state), spread_fraction);
}

LandscapeState step(const LandscapeState& state, const LandscapeAction& action,
                    const SimulatorConfig& config, std::uint64_t seed) {
  if (action.size() != state.cell_count()) throw std::invalid_argument("action and state cell counts differ");
  config.validate();

  const auto& sch = state.schema;
  const std::size_t n = state.cell_count();
  const std::size_t classes = sch.age_classes;
  const std::size_t host0 = sch.first_host_class();

  LandscapeState next = state;
  std::vector<double> mpb(n);

  for (CellId c = 0; c < n; ++c) {
    auto& s = next.cells[c];
    double harvested = 0.0;

    // (a)
    switch (action[c]) {
      case CellAction::ClearCut:
        for (std::size_t k = 0; k < classes; ++k) {
          harvested += s[sch.age(k)];
          s[sch.age(k)] = 0.0;
        }
        s[sch.age(0)] = config.seedlings;
        s[sch.mpb()] = 0.0;
        break;
      case CellAction::Thin:
        for (std::size_t k = 0; k < classes; ++k) {
          const double cut = config.thin_fraction * s[sch.age(k)];
          harvested += cut;
          s[sch.age(k)] -= cut;
        }
        break;
      case CellAction::DoNothing:
        break;
    }
    next.harvested[c] = harvested;

    // (b)
    double killed = 0.0;
    double m = s[sch.mpb()];
    if (m > 0.0) {
      double hosts = 0.0;
      for (std::size_t k = host0; k < classes; ++k) hosts += s[sch.age(k)];
      const double capacity = config.mpb_per_host * hosts;
      const double pressure = capacity > 0.0 ? std::min(1.0, m / capacity) : 1.0;
      const double rate = config.mpb_kill_rate * pressure;
      double survivors = 0.0;
      for (std::size_t k = host0; k < classes; ++k) {
        const double dead = rate * s[sch.age(k)];
        killed += dead;
        s[sch.age(k)] -= dead;
        survivors += s[sch.age(k)];
      }
      m = std::min(m * config.mpb_growth_factor, config.mpb_per_host * survivors);
    }
    next.mpb_killed[c] = killed;
    mpb[c] = m;
  }

  // (c)
  std::vector<double> moved = mpb;
  for (CellId c = 0; c < n; ++c) {
    const auto& adj = state.topology.neighbors(c);
    if (adj.empty() || mpb[c] <= 0.0) continue;
    const double out = config.mpb_spread_fraction * mpb[c];
    const double share = out / static_cast<double>(adj.size());
    moved[c] -= out;
    for (CellId nb : adj) moved[nb] += share;
  }

  Rng rng(seed);
  const double sigma = config.noise_scale;
  const double drift = -0.5 * sigma * sigma;
  for (CellId c = 0; c < n; ++c) {
    auto& s = next.cells[c];

    // (d)
    double hosts = 0.0;
    for (std::size_t k = host0; k < classes; ++k) hosts += s[sch.age(k)];
    const double births = config.birth_rate * hosts;
    double promoted_in = births;
    for (std::size_t k = 0; k < classes; ++k) {
      const double y = s[sch.age(k)];
      const double promoted_out = (k + 1 < classes) ? config.growth_rate * y : 0.0;
      const double dead = config.death_rate * y;
      s[sch.age(k)] = std::max(0.0, y - promoted_out - dead + promoted_in);
      promoted_in = promoted_out;
    }
    s[sch.mpb()] = std::max(0.0, moved[c]);

    // (e)
    if (sigma > 0.0) {
      for (std::size_t k = 0; k < classes; ++k) s[sch.age(k)] *= std::exp(sigma * rng.normal() + drift);
      s[sch.mpb()] *= std::exp(sigma * rng.normal() + drift);
    }
  }

  // (f)
  next = refresh_spatial_features(std::move(next), config.mpb_spread_fraction);
  next.timestep = state.timestep + 1;
  return next;
}

}  // namespace lsst
