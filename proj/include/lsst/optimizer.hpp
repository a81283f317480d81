#pragma once

#include "lsst/landscape.hpp"
#include "lsst/policy.hpp"
#include "lsst/reward.hpp"
#include "lsst/simulator.hpp"

#include <array>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace lsst {

/// One rollout: states s_0..s_T, actions a_0..a_{T-1} and rewards r_0..r_{T-1}.
struct TrajectoryRecord {
  std::vector<LandscapeState> states;
  std::vector<LandscapeAction> actions;
  std::vector<double> rewards;
  double discounted_return = 0.0;
  std::uint64_t seed = 0;
  /// Score under the parameters that generated the rollout. Estimation
  /// always recomputes against the current parameters instead.
  ScoreTensor generation_score;

  std::size_t length() const noexcept { return actions.size(); }
};

/// Samples every cell's action at each step, advances the simulator and
/// accumulates gamma^t r_t. The horizon is the policy horizon.
TrajectoryRecord generate_trajectory(const LandscapeState& s0, const PolicyParams& params,
                                     const SimulatorConfig& sim, const RewardConfig& reward, std::uint64_t seed);

/// Sum over steps and cells of the cell scores, evaluated at `params`.
ScoreTensor trajectory_score(const TrajectoryRecord& k, const PolicyParams& params);

/// Per parameter slot: sum_k g_k^2 R(k) / sum_k g_k^2, zero where the
/// denominator vanishes.
BaselineTensor baseline_from_scores(std::span<const ScoreTensor> scores, std::span<const double> returns);

/// Relative size below which a summed gradient entry counts as cancelled.
inline constexpr double kCancellationTolerance = 1e-10;

/// (1/|K|) sum_k (R(k) - b) g_k elementwise. An entry whose sum is within
/// kCancellationTolerance of the summed term magnitudes is set to zero.
GradientEstimate gradient_from_scores(std::span<const ScoreTensor> scores, std::span<const double> returns,
                                      const BaselineTensor& baseline);

BaselineTensor optimal_baseline(std::span<const TrajectoryRecord> trajectories, const PolicyParams& params);

GradientEstimate gradient_estimate(std::span<const TrajectoryRecord> trajectories, const PolicyParams& params,
                                   const BaselineTensor& baseline);

struct RpropConfig {
  double initial_delta = 0.1;
  double eta_plus = 1.2;
  double eta_minus = 0.5;
  double delta_min = 1e-6;
  double delta_max = 1.0;

  void validate() const;
};

struct RpropState {
  RpropConfig config;
  ParamTensor delta;
  std::vector<signed char> previous_sign;

  static RpropState init(const ParamShape& shape, const RpropConfig& config = {});
};

/// theta += sign(g) * delta per slot, then delta grows by eta_plus when the
/// sign repeats and shrinks by eta_minus when it flips, clamped to
/// [delta_min, delta_max]. A zero sign on either side leaves delta as is.
void rprop_step(PolicyParams& params, const GradientEstimate& grad, RpropState& state);

/// theta += learning_rate * g.
void gradient_ascent_step(PolicyParams& params, const GradientEstimate& grad, double learning_rate);

enum class OptimizerKind { Rprop, Sgd };
enum class TrajectoryWindow { All, Sliding };
enum class InitMode { Distribution, Random };

struct TrainConfig {
  PolicyKind kind = PolicyKind::Abstract;
  std::size_t horizon = 5;
  std::size_t max_samples = 200;
  std::size_t cadence = 5;
  TrajectoryWindow window = TrajectoryWindow::All;
  std::size_t window_size = 0;  // 0: equal to cadence
  OptimizerKind optimizer = OptimizerKind::Rprop;
  double learning_rate = 1e-3;
  RpropConfig rprop;
  InitMode init = InitMode::Distribution;
  std::array<double, kActionCount> init_distribution{1.0, 0.0, 0.0};
  double init_feature_weight = 0.0;
  double init_floor = kInitProbabilityFloor;  // stands in for zero probabilities
  double init_random_scale = 0.1;
  FeatureScaling features = FeatureScaling::Raw;  // fitted to the start state
  std::uint64_t seed = 0;
  unsigned threads = 1;

  void validate() const;
};

struct TrainLogRow {
  std::size_t sample = 0;
  double discounted_return = 0.0;
  /// Sum of |gradient| over every slot of each action row, from the most
  /// recent update (zero before the first one).
  std::array<double, kActionCount> gradient_magnitude{};
};

struct TrainResult {
  PolicyParams initial;
  PolicyParams final;
  std::vector<TrainLogRow> log;
  std::size_t updates = 0;
  std::size_t parameter_slots = 0;
};

/// Initial parameters as selected by `config` for a landscape like `s0`.
PolicyParams initial_params(const TrainConfig& config, const LandscapeState& s0);

/// Samples max_samples trajectories; after every `cadence` samples the
/// stored set's scores are recomputed under the current parameters and one
/// baseline/gradient/update round is applied.
TrainResult lsst_pg(const TrainConfig& config, const SimulatorConfig& sim, const RewardConfig& reward,
                    const LandscapeState& s0);

}  // namespace lsst
