#pragma once

#include "lsst/landscape.hpp"

#include <cstdint>
#include <vector>

namespace lsst {

/// Rates of the forest simulator. Fractions are per year.
struct SimulatorConfig {
  double growth_rate = 0.1;          // fraction of an age class promoted to the next class
  double death_rate = 0.02;          // natural mortality, every class
  double birth_rate = 0.05;          // young trees added per host tree
  double seedlings = 20.0;           // young trees planted after a clear-cut
  double thin_fraction = 0.3;        // fraction of every class removed by Thin
  double mpb_kill_rate = 0.5;        // host fraction killed in a saturated cell
  double mpb_growth_factor = 2.0;    // yearly MPB multiplier
  double mpb_spread_fraction = 0.2;  // fraction of a cell's MPB emigrating
  double mpb_per_host = 10.0;        // MPB carrying capacity per host tree
  double noise_scale = 0.05;         // log-normal multiplicative noise

  /// Throws std::invalid_argument on an out-of-range field.
  void validate() const;
};

struct InitialStateConfig {
  std::vector<double> age_mean{40.0, 60.0, 30.0};
  std::vector<double> age_spread{10.0, 15.0, 10.0};
  double mpb_mean = 50.0;
  double mpb_spread = 20.0;
  double infested_fraction = 0.2;

  void validate() const;
  FeatureSchema schema() const { return FeatureSchema{age_mean.size()}; }
};

/// Draws every cell independently around the configured means. Counts are
/// clamped at zero; infested cells carry at least one beetle.
LandscapeState initial_state(const InitialStateConfig& config, const GridTopology& topology,
                             double spread_fraction, std::uint64_t seed);

/// One simulated year. Per cell, in order:
///  (a) action: ClearCut harvests every tree, plants `seedlings` young trees
///      and removes the cell's MPB; Thin harvests `thin_fraction` of every class;
///  (b) beetles kill mpb_kill_rate * min(1, mpb / capacity) of each host
///      class, then multiply by mpb_growth_factor, capped at capacity
///      (mpb_per_host times the surviving hosts);
///  (c) mpb_spread_fraction of each cell's MPB leaves it, split evenly among
///      its neighbours;
///  (d) trees age at growth_rate, die at death_rate, and birth_rate young
///      trees appear per host tree;
///  (e) every age class and the MPB count are multiplied by
///      exp(noise_scale * z - noise_scale^2 / 2), z standard normal, drawn
///      cell by cell in feature order;
///  (f) derived features are refreshed and the timestep advances.
LandscapeState step(const LandscapeState& state, const LandscapeAction& action,
                    const SimulatorConfig& config, std::uint64_t seed);

}  // namespace lsst
