#include "lsst/optimizer.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <cmath>

using namespace lsst;

namespace {

ParamShape tiny_shape() { return {PolicyKind::Abstract, 1, 0, 3, 1}; }

ScoreTensor scores(std::initializer_list<double> v) {
  ScoreTensor g(tiny_shape());
  std::size_t i = 0;
  for (double x : v) g[i++] = x;
  return g;
}

struct Fixture {
  SimulatorConfig sim;
  RewardConfig reward;
  LandscapeState s0;
  Fixture() : s0(initial_state({}, GridTopology(1, 3), sim.mpb_spread_fraction, 6)) {}
};

}  // namespace

TEST_CASE("baseline and gradient by hand") {
  const std::vector<ScoreTensor> g{scores({1, 2, 0}), scores({3, 0, 0})};
  const std::vector<double> r{10, 20};
  const auto b = baseline_from_scores(g, r);
  CHECK(b[0] == doctest::Approx(19));
  CHECK(b[1] == doctest::Approx(10));
  CHECK(b[2] == 0);
  const auto grad = gradient_from_scores(g, r, b);
  CHECK(grad[0] == doctest::Approx(-3));
  CHECK(grad[1] == 0);
  CHECK(grad[2] == 0);
  const auto raw = gradient_from_scores(g, r, BaselineTensor(tiny_shape()));
  CHECK(raw[0] == doctest::Approx((10 + 60) / 2.0));
  CHECK(raw[1] == doctest::Approx(10));
}

TEST_CASE("a single trajectory is its own baseline") {
  const std::vector<ScoreTensor> g{scores({0.3, -1.7, 0})};
  const std::vector<double> r{-123.456};
  const auto b = baseline_from_scores(g, r);
  CHECK(b[0] == r[0]);
  CHECK(b[1] == r[0]);
  CHECK(b[2] == 0);
  const auto grad = gradient_from_scores(g, r, b);
  for (std::size_t i = 0; i < 3; ++i) CHECK(grad[i] == 0.0);
}

TEST_CASE("identical scores cancel exactly") {
  const std::vector<ScoreTensor> g(5, scores({0.1, 0.7, -0.3}));
  const std::vector<double> r{-301.1, -287.9, -299.3, -310.7, -275.2};
  const auto grad = gradient_from_scores(g, r, baseline_from_scores(g, r));
  for (std::size_t i = 0; i < 3; ++i) CHECK(grad[i] == 0.0);
}

TEST_CASE("estimator input errors") {
  const std::vector<ScoreTensor> none;
  const std::vector<double> r;
  CHECK_THROWS_AS(baseline_from_scores(none, r), std::invalid_argument);
  const std::vector<ScoreTensor> one{scores({1, 1, 1})};
  CHECK_THROWS_AS(baseline_from_scores(one, r), std::invalid_argument);
  const std::vector<TrajectoryRecord> empty;
  const auto p = init_params(PolicyKind::Abstract, std::vector<double>{1, 0, 0}, 1, 1, FeatureSchema{});
  CHECK_THROWS_AS(optimal_baseline(empty, p), std::invalid_argument);
}

TEST_CASE("rprop trace follows the recurrence") {
  PolicyParams p{ParamTensor(tiny_shape()), FeatureTransform::identity(1)};
  auto st = RpropState::init(p.shape());
  GradientEstimate g(tiny_shape());
  // Slot 0: + + - - 0 +.  Slot 1: always zero.  Slot 2: - + - +.
  const double s0[] = {1, 2, -3, -1, 0, 5};
  const double s2[] = {-1, 4, -2, 7, -1, 1};
  double theta0 = 0, theta2 = 0, d0 = 0.1, d2 = 0.1;
  int prev0 = 0, prev2 = 0;
  auto advance = [](double g, double& theta, double& d, int& prev) {
    const int sign = (g > 0) - (g < 0);
    if (sign == 0) return;
    theta += sign * d;
    if (prev == sign) d = std::min(d * 1.2, 1.0);
    else if (prev != 0) d = std::max(d * 0.5, 1e-6);
    prev = sign;
  };
  for (int i = 0; i < 6; ++i) {
    g[0] = s0[i];
    g[1] = 0;
    g[2] = s2[i];
    const double before1 = p.theta[1];
    rprop_step(p, g, st);
    advance(s0[i], theta0, d0, prev0);
    advance(s2[i], theta2, d2, prev2);
    CHECK(p.theta[0] == theta0);
    CHECK(p.theta[2] == theta2);
    CHECK(st.delta[0] == d0);
    CHECK(st.delta[2] == d2);
    CHECK(p.theta[1] == before1);
    CHECK(st.delta[1] == 0.1);
  }
  // Frozen values: each step uses the current delta, which then adapts.
  // Slot 0 moves +0.1, +0.1, -0.12, -0.06, (skip), +0.072; slot 2 halves
  // after every flip.
  CHECK(theta0 == doctest::Approx(0.092).epsilon(1e-14));
  CHECK(d0 == doctest::Approx(0.036).epsilon(1e-14));
  CHECK(theta2 == doctest::Approx(-0.03125).epsilon(1e-14));
  CHECK(d2 == doctest::Approx(0.003125).epsilon(1e-14));
}

TEST_CASE("first rprop update moves every nonzero slot by 0.1, independent of scale") {
  const ParamShape shape{PolicyKind::Explicit, 2, 3, 3, 7};
  Rng rng(1);
  GradientEstimate g(shape);
  for (std::size_t i = 0; i < g.size(); ++i) g[i] = (i % 5 == 0) ? 0.0 : rng.normal();
  for (double scale : {1.0, 1e-9, 3.7e6}) {
    PolicyParams p{ParamTensor(shape, 0.5), FeatureTransform::identity(7)};
    auto st = RpropState::init(shape);
    GradientEstimate gs = g;
    for (std::size_t i = 0; i < gs.size(); ++i) gs[i] *= scale;
    rprop_step(p, gs, st);
    for (std::size_t i = 0; i < g.size(); ++i) {
      const double want = g[i] == 0 ? 0.5 : 0.5 + (g[i] > 0 ? 0.1 : -0.1);
      CHECK(p.theta[i] == want);
    }
  }
  RpropConfig bad;
  bad.eta_minus = 1.5;
  CHECK_THROWS_AS(RpropState::init(shape, bad), std::invalid_argument);
}

TEST_CASE("plain gradient ascent") {
  PolicyParams p{ParamTensor(tiny_shape(), 1.0), FeatureTransform::identity(1)};
  gradient_ascent_step(p, scores({2, -4, 0}), 0.25);
  CHECK(p.theta[0] == 1.5);
  CHECK(p.theta[1] == 0.0);
  CHECK(p.theta[2] == 1.0);
}

TEST_CASE("trajectory generation") {
  Fixture f;
  const auto p = init_random_params(PolicyKind::Explicit, 4, 3, f.s0.schema, 0.5, 3);
  const auto k = generate_trajectory(f.s0, p, f.sim, f.reward, 11);
  CHECK(k.length() == 4);
  CHECK(k.states.size() == 5);
  CHECK(k.states.back().timestep == 4);
  CHECK(k.discounted_return == doctest::Approx(discounted_return(k.rewards, f.reward.gamma)));
  const auto again = generate_trajectory(f.s0, p, f.sim, f.reward, 11);
  CHECK(again.discounted_return == k.discounted_return);
  CHECK(again.actions == k.actions);
  const auto g = trajectory_score(k, p);
  for (std::size_t i = 0; i < g.size(); ++i) CHECK(g[i] == doctest::Approx(k.generation_score[i]).epsilon(1e-12));
  auto moved = f.s0;
  moved.timestep = 2;
  CHECK_THROWS_AS(generate_trajectory(moved, p, f.sim, f.reward, 1), std::invalid_argument);
}

TEST_CASE("training loop bookkeeping") {
  Fixture f;
  TrainConfig cfg;
  cfg.kind = PolicyKind::Explicit;
  cfg.horizon = 3;
  cfg.max_samples = 23;
  cfg.cadence = 5;
  cfg.init_distribution = {0.6, 0.2, 0.2};
  cfg.seed = 5;
  const auto r = lsst_pg(cfg, f.sim, f.reward, f.s0);
  CHECK(r.log.size() == 23);
  CHECK(r.updates == 4);
  CHECK(r.parameter_slots == 3 * 7 * 3 * 3);
  for (std::size_t i = 0; i < r.log.size(); ++i) CHECK(r.log[i].sample == i);
  for (std::size_t i = 0; i < 4; ++i) CHECK(r.log[i].gradient_magnitude == std::array<double, 3>{});
  CHECK(r.log[4].gradient_magnitude[0] > 0);
  bool moved = false;
  for (std::size_t i = 0; i < r.final.theta.size(); ++i) moved |= r.final.theta[i] != r.initial.theta[i];
  CHECK(moved);

  const auto again = lsst_pg(cfg, f.sim, f.reward, f.s0);
  for (std::size_t i = 0; i < r.final.theta.size(); ++i) CHECK(again.final.theta[i] == r.final.theta[i]);
  cfg.threads = 3;
  const auto threaded = lsst_pg(cfg, f.sim, f.reward, f.s0);
  for (std::size_t i = 0; i < r.log.size(); ++i) CHECK(threaded.log[i].discounted_return == r.log[i].discounted_return);
  for (std::size_t i = 0; i < r.final.theta.size(); ++i) CHECK(threaded.final.theta[i] == r.final.theta[i]);

  cfg.threads = 1;
  cfg.window = TrajectoryWindow::Sliding;
  cfg.window_size = 5;
  const auto sliding = lsst_pg(cfg, f.sim, f.reward, f.s0);
  CHECK(sliding.updates == 4);
  CHECK(sliding.log[0].discounted_return == r.log[0].discounted_return);

  cfg.max_samples = 0;
  CHECK(lsst_pg(cfg, f.sim, f.reward, f.s0).updates == 0);
  cfg.cadence = 0;
  CHECK_THROWS_AS(lsst_pg(cfg, f.sim, f.reward, f.s0), std::invalid_argument);
}

TEST_CASE("sgd variant moves along the estimate") {
  Fixture f;
  TrainConfig cfg;
  cfg.kind = PolicyKind::Abstract;
  cfg.horizon = 2;
  cfg.max_samples = 10;
  cfg.optimizer = OptimizerKind::Sgd;
  cfg.learning_rate = 1e-4;
  cfg.init_distribution = {0.5, 0.25, 0.25};
  const auto r = lsst_pg(cfg, f.sim, f.reward, f.s0);
  CHECK(r.updates == 2);
  CHECK(r.parameter_slots == 3 * 7 * 2);
}
