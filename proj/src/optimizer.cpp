#include "lsst/optimizer.hpp"

#include "lsst/rng.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <stdexcept>

namespace lsst {

TrajectoryRecord generate_trajectory(const LandscapeState& s0, const PolicyParams& params,
                                     const SimulatorConfig& sim, const RewardConfig& reward, std::uint64_t seed) {
  if (s0.timestep != 0) throw std::invalid_argument("trajectories start from a timestep-0 state");
  const std::size_t horizon = params.shape().horizon;
  TrajectoryRecord k;
  k.seed = seed;
  k.generation_score = ScoreTensor(params.shape());
  k.states.reserve(horizon + 1);
  k.states.push_back(s0);
  double discount = 1.0;
  for (std::size_t t = 0; t < horizon; ++t) {
    const auto& s = k.states.back();
    Rng action_rng(derive_seed(seed, 2 * t));
    auto a = sample_landscape_action(s, params, t, action_rng);
    accumulate_landscape_score(s, a, params, t, k.generation_score);
    auto next = step(s, a, sim, derive_seed(seed, 2 * t + 1));
    const double r = step_reward(s, a, next, reward);
    k.discounted_return += discount * r;
    discount *= reward.gamma;
    k.rewards.push_back(r);
    k.actions.push_back(std::move(a));
    k.states.push_back(std::move(next));
  }
  return k;
}

ScoreTensor trajectory_score(const TrajectoryRecord& k, const PolicyParams& params) {
  if (k.length() > params.shape().horizon) throw std::invalid_argument("trajectory longer than the policy horizon");
  ScoreTensor g(params.shape());
  for (std::size_t t = 0; t < k.length(); ++t) accumulate_landscape_score(k.states[t], k.actions[t], params, t, g);
  return g;
}

namespace {

void check_scores(std::span<const ScoreTensor> scores, std::span<const double> returns) {
  if (scores.empty()) throw std::invalid_argument("the trajectory set is empty");
  if (scores.size() != returns.size()) throw std::invalid_argument("one return per score tensor is required");
  for (const auto& g : scores)
    if (g.shape() != scores.front().shape()) throw std::invalid_argument("score tensors differ in shape");
}

std::vector<ScoreTensor> scores_of(std::span<const TrajectoryRecord> trajectories, const PolicyParams& params) {
  std::vector<ScoreTensor> out;
  out.reserve(trajectories.size());
  for (const auto& k : trajectories) out.push_back(trajectory_score(k, params));
  return out;
}

std::vector<double> returns_of(std::span<const TrajectoryRecord> trajectories) {
  std::vector<double> out;
  out.reserve(trajectories.size());
  for (const auto& k : trajectories) out.push_back(k.discounted_return);
  return out;
}

}  // namespace

BaselineTensor baseline_from_scores(std::span<const ScoreTensor> scores, std::span<const double> returns) {
  check_scores(scores, returns);
  const auto& shape = scores.front().shape();
  // Weighted mean taken relative to the first return, so a single
  // trajectory (or identical returns) gives back R exactly.
  const double ref = returns[0];
  ParamTensor numerator(shape), denominator(shape);
  for (std::size_t k = 0; k < scores.size(); ++k) {
    const auto g = scores[k].values();
    for (std::size_t i = 0; i < g.size(); ++i) {
      const double g2 = g[i] * g[i];
      numerator[i] += g2 * (returns[k] - ref);
      denominator[i] += g2;
    }
  }
  BaselineTensor b(shape);
  for (std::size_t i = 0; i < b.size(); ++i) b[i] = denominator[i] > 0.0 ? ref + numerator[i] / denominator[i] : 0.0;
  return b;
}

GradientEstimate gradient_from_scores(std::span<const ScoreTensor> scores, std::span<const double> returns,
                                      const BaselineTensor& baseline) {
  check_scores(scores, returns);
  if (baseline.shape() != scores.front().shape()) throw std::invalid_argument("baseline shape does not match");
  GradientEstimate grad(baseline.shape());
  std::vector<double> scale(grad.size(), 0.0);
  for (std::size_t k = 0; k < scores.size(); ++k) {
    const auto g = scores[k].values();
    for (std::size_t i = 0; i < g.size(); ++i) {
      const double term = (returns[k] - baseline[i]) * g[i];
      grad[i] += term;
      scale[i] += std::abs(term);
    }
  }
  // Sums that cancel to within round-off are exactly zero; a sign-based
  // update would otherwise act on rounding noise.
  const double inv = 1.0 / static_cast<double>(scores.size());
  for (std::size_t i = 0; i < grad.size(); ++i) {
    grad[i] = std::abs(grad[i]) <= kCancellationTolerance * scale[i] ? 0.0 : grad[i] * inv;
  }
  return grad;
}

BaselineTensor optimal_baseline(std::span<const TrajectoryRecord> trajectories, const PolicyParams& params) {
  if (trajectories.empty()) throw std::invalid_argument("the trajectory set is empty");
  const auto scores = scores_of(trajectories, params);
  const auto returns = returns_of(trajectories);
  return baseline_from_scores(scores, returns);
}

GradientEstimate gradient_estimate(std::span<const TrajectoryRecord> trajectories, const PolicyParams& params,
                                   const BaselineTensor& baseline) {
  if (trajectories.empty()) throw std::invalid_argument("the trajectory set is empty");
  const auto scores = scores_of(trajectories, params);
  const auto returns = returns_of(trajectories);
  return gradient_from_scores(scores, returns, baseline);
}

void RpropConfig::validate() const {
  if (!(eta_plus > 1.0 && eta_minus > 0.0 && eta_minus < 1.0))
    throw std::invalid_argument("Rprop requires eta_plus > 1 > eta_minus > 0");
  if (!(delta_min > 0.0 && delta_min <= delta_max)) throw std::invalid_argument("Rprop requires 0 < delta_min <= delta_max");
  if (!(initial_delta >= delta_min && initial_delta <= delta_max))
    throw std::invalid_argument("Rprop initial delta must lie in [delta_min, delta_max]");
}

RpropState RpropState::init(const ParamShape& shape, const RpropConfig& config) {
  config.validate();
  return {config, ParamTensor(shape, config.initial_delta), std::vector<signed char>(shape.size(), 0)};
}

void rprop_step(PolicyParams& params, const GradientEstimate& grad, RpropState& state) {
  if (grad.shape() != params.shape() || state.delta.shape() != params.shape())
    throw std::invalid_argument("Rprop shapes do not match");
  const auto& cfg = state.config;
  auto theta = params.theta.values();
  for (std::size_t i = 0; i < theta.size(); ++i) {
    const double g = grad[i];
    const signed char sign = g > 0.0 ? 1 : (g < 0.0 ? -1 : 0);
    if (sign == 0) continue;
    theta[i] += sign * state.delta[i];
    const signed char prev = state.previous_sign[i];
    if (prev == sign) {
      state.delta[i] = std::min(state.delta[i] * cfg.eta_plus, cfg.delta_max);
    } else if (prev != 0) {
      state.delta[i] = std::max(state.delta[i] * cfg.eta_minus, cfg.delta_min);
    }
    state.previous_sign[i] = sign;
  }
}

void gradient_ascent_step(PolicyParams& params, const GradientEstimate& grad, double learning_rate) {
  if (grad.shape() != params.shape()) throw std::invalid_argument("gradient shape does not match params");
  auto theta = params.theta.values();
  for (std::size_t i = 0; i < theta.size(); ++i) theta[i] += learning_rate * grad[i];
}

void TrainConfig::validate() const {
  if (cadence < 1) throw std::invalid_argument("update cadence must be >= 1");
  if (optimizer == OptimizerKind::Rprop) rprop.validate();
  if (!(learning_rate > 0.0)) throw std::invalid_argument("learning rate must be positive");
  if (threads < 1) throw std::invalid_argument("thread count must be >= 1");
}

PolicyParams initial_params(const TrainConfig& config, const LandscapeState& s0) {
  PolicyParams params = config.init == InitMode::Distribution
                            ? init_params(config.kind, config.init_distribution, config.horizon, s0.cell_count(),
                                          s0.schema, config.init_feature_weight, config.init_floor)
                            : init_random_params(config.kind, config.horizon, s0.cell_count(), s0.schema,
                                                 config.init_random_scale, derive_seed(config.seed, 0xfeed));
  params.transform = fit_transform(config.features, s0);
  return params;
}

namespace {

std::vector<TrajectoryRecord> sample_batch(const LandscapeState& s0, const PolicyParams& params,
                                           const SimulatorConfig& sim, const RewardConfig& reward,
                                           std::span<const std::uint64_t> seeds, unsigned threads) {
  std::vector<TrajectoryRecord> out(seeds.size());
  if (threads <= 1 || seeds.size() <= 1) {
    for (std::size_t i = 0; i < seeds.size(); ++i) out[i] = generate_trajectory(s0, params, sim, reward, seeds[i]);
    return out;
  }
  const std::size_t workers = std::min<std::size_t>(threads, seeds.size());
  std::vector<std::future<void>> jobs;
  for (std::size_t w = 0; w < workers; ++w) {
    jobs.push_back(std::async(std::launch::async, [&, w] {
      for (std::size_t i = w; i < seeds.size(); i += workers)
        out[i] = generate_trajectory(s0, params, sim, reward, seeds[i]);
    }));
  }
  for (auto& j : jobs) j.get();
  return out;
}

}  // namespace

TrainResult lsst_pg(const TrainConfig& config, const SimulatorConfig& sim, const RewardConfig& reward,
                    const LandscapeState& s0) {
  config.validate();
  sim.validate();
  reward.validate();

  TrainResult result;
  result.initial = initial_params(config, s0);
  result.final = result.initial;
  result.parameter_slots = result.initial.theta.size();
  if (config.max_samples == 0) return result;

  PolicyParams& params = result.final;
  auto rprop = RpropState::init(params.shape(), config.rprop);
  const std::size_t window = config.window_size == 0 ? config.cadence : config.window_size;
  std::vector<TrajectoryRecord> trajectories;
  std::array<double, kActionCount> last_magnitude{};

  for (std::size_t start = 0; start < config.max_samples; start += config.cadence) {
    const std::size_t count = std::min(config.cadence, config.max_samples - start);
    std::vector<std::uint64_t> seeds(count);
    for (std::size_t i = 0; i < count; ++i) seeds[i] = derive_seed(config.seed, start + i);
    auto batch = sample_batch(s0, params, sim, reward, seeds, config.threads);

    for (std::size_t i = 0; i < count; ++i) {
      result.log.push_back({start + i, batch[i].discounted_return, last_magnitude});
      trajectories.push_back(std::move(batch[i]));
    }
    if (config.window == TrajectoryWindow::Sliding && trajectories.size() > window) {
      trajectories.erase(trajectories.begin(),
                         trajectories.begin() + static_cast<std::ptrdiff_t>(trajectories.size() - window));
    }
    if (count < config.cadence) break;

    const auto scores = scores_of(trajectories, params);
    const auto returns = returns_of(trajectories);
    const auto baseline = baseline_from_scores(scores, returns);
    const auto grad = gradient_from_scores(scores, returns, baseline);

    last_magnitude.fill(0.0);
    for (std::size_t m = 0; m < grad.shape().matrix_count(); ++m) {
      const auto g = grad.matrix(m);
      for (std::size_t a = 0; a < kActionCount; ++a) last_magnitude[a] += g.row(static_cast<Eigen::Index>(a)).cwiseAbs().sum();
    }
    result.log.back().gradient_magnitude = last_magnitude;

    if (config.optimizer == OptimizerKind::Rprop) {
      rprop_step(params, grad, rprop);
    } else {
      gradient_ascent_step(params, grad, config.learning_rate);
    }
    ++result.updates;
  }
  return result;
}

}  // namespace lsst
