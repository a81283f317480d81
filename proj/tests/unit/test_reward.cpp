#include "lsst/reward.hpp"

#include <doctest.h>

#include <vector>

using namespace lsst;

namespace {

LandscapeState grid(std::vector<std::array<double, 3>> ages) {
  LandscapeState s(GridTopology(1, ages.size()), FeatureSchema{});
  for (std::size_t c = 0; c < ages.size(); ++c)
    for (int k = 0; k < 3; ++k) s.cells[c][k] = ages[c][k];
  return refresh_spatial_features(s, 0.2);
}

}  // namespace

TEST_CASE("reward terms by hand") {
  const auto prev = grid({{10, 10, 10}, {10, 10, 10}});
  auto next = grid({{20, 50, 30}, {10, 10, 20}});  // 140 trees -> 70 per cell
  next.harvested = {90, 60};                         // 150 cut
  next.mpb_killed = {4, 0};
  RewardConfig cfg;
  const LandscapeAction a{CellAction::ClearCut, CellAction::Thin};
  // 150 - 0.01 * (70-120)^2 * 2 - 2 * 50 - 0.5 * 4 - 50
  CHECK(step_reward(prev, a, next, cfg) == doctest::Approx(150 - 50 - 100 - 2 - 50));

  cfg.young_fraction_weight = 10;
  cfg.young_fraction_max = 0.1;  // young share 30/140
  CHECK(step_reward(prev, a, next, cfg) == doctest::Approx(-52 - 10 * (30.0 / 140 - 0.1) * 2));

  cfg = {};
  cfg.adjacent_cut_weight = 7;
  const LandscapeAction both{CellAction::ClearCut, CellAction::ClearCut};
  CHECK(step_reward(prev, both, next, cfg) == doctest::Approx(-52 - 7));
  CHECK(step_reward(prev, a, next, cfg) == doctest::Approx(-52));
}

TEST_CASE("cut below the allowance carries no overcut penalty") {
  const auto prev = grid({{40, 40, 40}});
  auto next = grid({{40, 40, 40}});
  next.harvested = {60};
  RewardConfig cfg;
  cfg.base_cost = 0;
  CHECK(step_reward(prev, {CellAction::Thin}, next, cfg) == doctest::Approx(60));
  CHECK(trees_cut(next) == 60);
}

TEST_CASE("mismatched cell counts and bad discount") {
  const auto a = grid({{1, 1, 1}});
  const auto b = grid({{1, 1, 1}, {1, 1, 1}});
  CHECK_THROWS_AS(step_reward(a, {CellAction::DoNothing}, b, {}), std::invalid_argument);
  const std::vector<double> r{1, 2, 3};
  CHECK_THROWS_AS(discounted_return(r, 1.5), std::invalid_argument);
  RewardConfig cfg;
  cfg.overcut_weight = -1;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}

TEST_CASE("discounted return") {
  const std::vector<double> r{1, 2, 3};
  CHECK(discounted_return(r, 0.5) == doctest::Approx(1 + 1 + 0.75));
  CHECK(discounted_return(r, 0.0) == 1);
  CHECK(discounted_return(r, 1.0) == 6);
  CHECK(discounted_return(std::vector<double>{}, 0.9) == 0);
}
