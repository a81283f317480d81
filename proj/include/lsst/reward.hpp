#pragma once

#include "lsst/landscape.hpp"

#include <span>

namespace lsst {

struct RewardConfig {
  double value_per_tree = 1.0;
  double target_density = 120.0;    // mean trees per cell
  double density_weight = 0.01;     // per tree^2, scaled by cell count
  double annual_allowable_cut = 100.0;
  double overcut_weight = 2.0;      // per tree beyond the AAC
  double mpb_kill_weight = 0.5;     // per tree killed by beetles
  double base_cost = 50.0;          // per year
  double gamma = 0.95;

  // Optional plug-ins, off by default.
  double young_fraction_max = 1.0;  // upper bound on the young share of all trees
  double young_fraction_weight = 0.0;
  double adjacent_cut_weight = 0.0;  // per pair of neighbouring ClearCut cells

  void validate() const;
};

/// Trees removed by the actions in `next`'s producing transition.
double trees_cut(const LandscapeState& next);

/// Reward for the transition prev --action--> next.
double step_reward(const LandscapeState& prev, const LandscapeAction& action,
                   const LandscapeState& next, const RewardConfig& config);

/// Sum of gamma^t r_t.
double discounted_return(std::span<const double> rewards, double gamma);

}  // namespace lsst
