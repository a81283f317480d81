#include "lsst/harness.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace lsst;
namespace fs = std::filesystem;

namespace {

KeyValueConfig parse(const std::string& text) {
  std::istringstream is(text);
  return KeyValueConfig::parse(is, "test");
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

std::size_t line_count(const fs::path& p) {
  const auto s = slurp(p);
  return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n'));
}

ExperimentSpec small_spec() {
  auto c = parse(
      "[experiment]\nname = small\ntrials = 3\nseed = 4\nrollouts = 4\n"
      "[landscape]\nrows = 1\ncols = 3\n"
      "[train]\nhorizon = 3\nmax_samples = 12\ncadence = 4\ninit_distribution = 0.7, 0.2, 0.1\n");
  auto spec = read_experiment_spec(c);
  return spec;
}

fs::path scratch(const std::string& name) {
  auto p = fs::temp_directory_path() / ("lsst_unit_" + name);
  fs::remove_all(p);
  return p;
}

}  // namespace

TEST_CASE("key/value parsing") {
  auto c = parse("# comment\n[a]\nx = 1.5  # trailing\ny = true\nz = 1, 2,3\nname = hello world\n\n[b]\nx = 7\n");
  CHECK(c.get_double("a", "x", 0) == 1.5);
  CHECK(c.get_bool("a", "y", false));
  CHECK(c.get_doubles("a", "z", {}) == std::vector<double>{1, 2, 3});
  CHECK(c.get_string("a", "name", "") == "hello world");
  CHECK(c.get_size("b", "x", 0) == 7);
  CHECK(c.get_double("b", "missing", 3.25) == 3.25);
  CHECK_NOTHROW(c.require_all_consumed());

  auto extra = parse("[a]\nx = 1\nunused = 2\n");
  extra.get_double("a", "x", 0);
  CHECK_THROWS_AS(extra.require_all_consumed(), std::invalid_argument);
  CHECK_THROWS_AS(parse("x = 1\n"), std::invalid_argument);
  CHECK_THROWS_AS(parse("[a]\nx = 1\nx = 2\n"), std::invalid_argument);
  CHECK_THROWS_AS(parse("[a]\njust words\n"), std::invalid_argument);
  auto bad = parse("[a]\nx = 1.5q\nn = -3\nb = maybe\n");
  CHECK_THROWS_AS(bad.get_double("a", "x", 0), std::invalid_argument);
  CHECK_THROWS_AS(bad.get_size("a", "n", 0), std::invalid_argument);
  CHECK_THROWS_AS(bad.get_bool("a", "b", false), std::invalid_argument);
}

TEST_CASE("experiment spec reading") {
  const auto spec = small_spec();
  CHECK(spec.name == "small");
  CHECK(spec.trials == 3);
  CHECK(spec.cols == 3);
  CHECK(spec.train.cadence == 4);
  CHECK(spec.train.init_distribution == std::array<double, 3>{0.7, 0.2, 0.1});
  CHECK(spec.variants.size() == 2);

  auto typo = parse("[train]\nhorizn = 3\n");
  CHECK_THROWS_AS(read_experiment_spec(typo), std::invalid_argument);
  auto bad_variant = parse("[experiment]\nvariants = explicit,tiled\n");
  CHECK_THROWS_AS(read_experiment_spec(bad_variant), std::invalid_argument);
  auto bad_rate = parse("[simulator]\nmpb_kill_rate = 2\n");
  CHECK_THROWS_AS(read_experiment_spec(bad_rate), std::invalid_argument);
  CHECK_THROWS(load_experiment_spec("/nonexistent/file.cfg"));
}

TEST_CASE("bundled scenarios load") {
  const fs::path dir = LSST_SCENARIO_DIR;
  const auto fig1 = load_experiment_spec(dir / "fig1.cfg");
  CHECK(fig1.rows * fig1.cols == 5);
  CHECK(fig1.train.horizon == 5);
  CHECK(fig1.train.max_samples == 200);
  CHECK(fig1.train.cadence == 5);
  CHECK(fig1.trials == 20);
  CHECK(fig1.train.init_distribution == std::array<double, 3>{1.0, 0.0, 0.0});
  const auto fig2 = load_experiment_spec(dir / "fig2.cfg");
  CHECK(fig2.rows * fig2.cols == 20);
  CHECK(fig2.train.horizon == 10);
  CHECK(fig2.train.max_samples == 200);
  CHECK(fig2.train.init_distribution == std::array<double, 3>{0.8, 0.15, 0.05});
  const auto tiny = load_experiment_spec(dir / "tiny-oracle.cfg");
  CHECK(tiny.rows * tiny.cols == 2);
  CHECK(tiny.train.horizon == 2);
  CHECK(tiny.sim.noise_scale == 0.0);
}

TEST_CASE("trial seeds are distinct") {
  const auto a = trial_seeds(7, 0), b = trial_seeds(7, 1), c = trial_seeds(8, 0);
  CHECK(a.landscape != a.train);
  CHECK(a.train != a.rollouts);
  CHECK(a.landscape != b.landscape);
  CHECK(a.landscape != c.landscape);
}

TEST_CASE("action proportions and visited distributions") {
  const auto spec = small_spec();
  const auto s0 = initial_state(spec.init, spec.topology(), spec.sim.mpb_spread_fraction, 1);
  auto cfg = spec.train;
  cfg.kind = PolicyKind::Explicit;
  const auto params = initial_params(cfg, s0);
  const auto rollouts = policy_rollouts(s0, params, spec.sim, spec.reward, 50, 3);
  const auto rows = action_proportion_report(rollouts);
  REQUIRE(rows.size() == 3);
  for (const auto& r : rows) {
    CHECK(r.mean_count[0] + r.mean_count[1] + r.mean_count[2] == doctest::Approx(3.0));
    CHECK(r.mean_count[0] > r.mean_count[2]);
  }
  const auto dist = visited_action_distributions(rollouts, params);
  REQUIRE(dist.size() == 3);
  for (const auto& row : dist) {
    REQUIRE(row.size() == 3);
    for (const auto& p : row) {
      CHECK(p[0] == doctest::Approx(0.7));
      CHECK(p[0] + p[1] + p[2] == doctest::Approx(1.0));
    }
  }
  CHECK_THROWS_AS(action_proportion_report(std::vector<TrajectoryRecord>{}), std::invalid_argument);
}

TEST_CASE("experiment bundle") {
  const auto spec = small_spec();
  const auto result = run_experiment(spec);
  REQUIRE(result.trials.size() == 3);
  for (const auto& t : result.trials) {
    REQUIRE(t.ok());
    REQUIRE(t.variants.size() == 2);
    // Both variants start from the same landscape and the same sample seeds.
    CHECK(t.variants[0].train.log[0].discounted_return != 0);
  }
  const auto dir = scratch("bundle");
  write_experiment(dir, spec, result);
  for (const char* f : {"training_log.csv", "mean_reward.csv", "summary.csv", "failures.csv", "action_proportions.csv",
                        "manifest.csv", "landscapes/trial000_initial.csv", "policies/trial002_abstract_final.csv"})
    CHECK(fs::exists(dir / f));
  CHECK(line_count(dir / "training_log.csv") == 1 + 3 * 2 * 12);
  CHECK(line_count(dir / "mean_reward.csv") == 1 + 12);
  CHECK(slurp(dir / "mean_reward.csv").rfind("sample,explicit,abstract\n", 0) == 0);
  CHECK(line_count(dir / "summary.csv") == 1 + 6 + 2);
  CHECK(line_count(dir / "failures.csv") == 1);
  CHECK(line_count(dir / "action_proportions.csv") == 1 + 3 * 2 * 2 * 3);

  const auto log = read_training_log(dir / "training_log.csv");
  CHECK(log.size() == 72);
  CHECK(log[5].discounted_return == result.trials[0].variants[0].train.log[5].discounted_return);

  const auto mean = slurp(dir / "mean_reward.csv"), summary = slurp(dir / "summary.csv"),
             actions = slurp(dir / "action_proportions.csv");
  fs::remove(dir / "mean_reward.csv");
  fs::remove(dir / "summary.csv");
  fs::remove(dir / "action_proportions.csv");
  regenerate_reports(dir, &spec);
  CHECK(slurp(dir / "mean_reward.csv") == mean);
  CHECK(slurp(dir / "summary.csv") == summary);
  CHECK(slurp(dir / "action_proportions.csv") == actions);

  const auto again = scratch("bundle2");
  write_experiment(again, spec, run_experiment(spec));
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (!e.is_regular_file()) continue;
    CHECK(slurp(e.path()) == slurp(again / fs::relative(e.path(), dir)));
  }
  fs::remove_all(dir);
  fs::remove_all(again);
}

TEST_CASE("threaded trials match serial trials") {
  auto spec = small_spec();
  const auto serial = run_experiment(spec);
  spec.threads = 3;
  const auto threaded = run_experiment(spec);
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t v = 0; v < 2; ++v)
      for (std::size_t s = 0; s < 12; ++s)
        CHECK(serial.trials[i].variants[v].train.log[s].discounted_return ==
              threaded.trials[i].variants[v].train.log[s].discounted_return);
}

TEST_CASE("a failing trial is reported without stopping the others") {
  const auto spec = small_spec();
  RunHooks hooks;
  hooks.before_trial = [](std::size_t i) {
    if (i == 1) throw std::runtime_error("injected");
  };
  const auto result = run_experiment(spec, hooks);
  CHECK(result.trials[0].ok());
  CHECK_FALSE(result.trials[1].ok());
  CHECK(result.trials[1].error == "injected");
  CHECK(result.trials[2].ok());
  const auto dir = scratch("failure");
  write_experiment(dir, spec, result);
  CHECK(slurp(dir / "failures.csv") == "trial,message\n1,injected\n");
  CHECK(line_count(dir / "training_log.csv") == 1 + 2 * 2 * 12);
  fs::remove_all(dir);
}

TEST_CASE("final window mean") {
  std::vector<TrainLogRow> log;
  for (int i = 0; i < 30; ++i) log.push_back({static_cast<std::size_t>(i), double(i), {}});
  CHECK(final_window_mean(log, 20) == doctest::Approx((10 + 29) / 2.0));
  CHECK(final_window_mean(log, 100) == doctest::Approx(14.5));
  CHECK(final_window_mean({}, 20) == 0);
}
