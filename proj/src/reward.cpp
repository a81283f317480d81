#include "lsst/reward.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace lsst {

void RewardConfig::validate() const {
  for (double w : {value_per_tree, density_weight, annual_allowable_cut, overcut_weight, mpb_kill_weight,
                   young_fraction_weight, adjacent_cut_weight, target_density}) {
    if (!(w >= 0.0)) throw std::invalid_argument("reward weights must be >= 0");
  }
  if (!std::isfinite(base_cost)) throw std::invalid_argument("base_cost must be finite");
  if (!(gamma >= 0.0 && gamma <= 1.0)) throw std::invalid_argument("gamma must lie in [0, 1]");
}

double trees_cut(const LandscapeState& next) {
  double sum = 0.0;
  for (double h : next.harvested) sum += h;
  return sum;
}

double step_reward(const LandscapeState& prev, const LandscapeAction& action,
                   const LandscapeState& next, const RewardConfig& config) {
  const std::size_t n = prev.cell_count();
  if (next.cell_count() != n || action.size() != n)
    throw std::invalid_argument("state and action cell counts differ");

  const double cut = trees_cut(next);
  double killed = 0.0;
  for (double k : next.mpb_killed) killed += k;

  const double cells = static_cast<double>(n);
  const double density_gap = next.total_trees() / cells - config.target_density;

  double r = config.value_per_tree * cut;
  r -= config.density_weight * density_gap * density_gap * cells;
  r -= config.overcut_weight * std::max(0.0, cut - config.annual_allowable_cut);
  r -= config.mpb_kill_weight * killed;
  r -= config.base_cost;

  if (config.young_fraction_weight > 0.0) {
    const double total = next.total_trees();
    double young = 0.0;
    for (const auto& s : next.cells) young += s[next.schema.age(0)];
    const double share = total > 0.0 ? young / total : 0.0;
    r -= config.young_fraction_weight * std::max(0.0, share - config.young_fraction_max) * cells;
  }
  if (config.adjacent_cut_weight > 0.0) {
    double pairs = 0.0;
    for (CellId c = 0; c < n; ++c) {
      if (action[c] != CellAction::ClearCut) continue;
      for (CellId nb : prev.topology.neighbors(c)) {
        if (nb > c && action[nb] == CellAction::ClearCut) pairs += 1.0;
      }
    }
    r -= config.adjacent_cut_weight * pairs;
  }
  return r;
}

double discounted_return(std::span<const double> rewards, double gamma) {
  if (!(gamma >= 0.0 && gamma <= 1.0)) throw std::invalid_argument("gamma must lie in [0, 1]");
  double total = 0.0;
  double discount = 1.0;
  for (double r : rewards) {
    total += discount * r;
    discount *= gamma;
  }
  return total;
}

}  // namespace lsst
