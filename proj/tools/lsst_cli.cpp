// Command-line front end: simulate, train, experiment, report.

#include "lsst/harness.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

namespace fs = std::filesystem;
using namespace lsst;

namespace {

struct CommonOptions {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string variant;
  std::string out = "results";
  std::optional<std::size_t> trials;
  std::string policy;
};

ExperimentSpec load_spec(const CommonOptions& o) {
  if (o.config.empty()) throw std::invalid_argument("--config is required");
  if (!fs::exists(o.config)) throw std::invalid_argument("config file not found: " + o.config);
  auto spec = load_experiment_spec(o.config);
  if (o.seed) spec.seed = *o.seed;
  if (o.trials) spec.trials = *o.trials;
  if (!o.variant.empty()) spec.variants = {parse_kind(o.variant)};
  return spec;
}

int cmd_simulate(const CommonOptions& o) {
  auto spec = load_spec(o);
  const auto seeds = trial_seeds(spec.seed, 0);
  const auto s0 = initial_state(spec.init, spec.topology(), spec.sim.mpb_spread_fraction, seeds.landscape);
  TrainConfig cfg = spec.train;
  cfg.kind = spec.variants.front();
  cfg.seed = seeds.train;
  PolicyParams params = initial_params(cfg, s0);
  if (!o.policy.empty()) {
    std::ifstream in(o.policy);
    if (!in) throw std::invalid_argument("cannot open policy file " + o.policy);
    auto loaded = read_policy_csv(in, s0.schema);
    loaded.transform = params.transform;
    params = std::move(loaded);
  }
  const auto k = generate_trajectory(s0, params, spec.sim, spec.reward, seeds.rollouts);

  fs::create_directories(o.out);
  std::ofstream os(fs::path(o.out) / "trajectory.csv", std::ios::binary | std::ios::trunc);
  if (!os) throw std::runtime_error("cannot write trajectory.csv");
  os << "t,cell,row,col";
  for (const auto& n : s0.schema.names()) os << ',' << n;
  os << ",harvested,mpb_killed,action,step_reward\n";
  for (std::size_t t = 0; t < k.states.size(); ++t) {
    const auto& s = k.states[t];
    for (CellId c = 0; c < s.cell_count(); ++c) {
      os << t << ',' << c << ',' << s.topology.row_of(c) << ',' << s.topology.col_of(c);
      for (Eigen::Index f = 0; f < s.cells[c].size(); ++f) os << ',' << format_number(s.cells[c][f]);
      os << ',' << format_number(s.harvested[c]) << ',' << format_number(s.mpb_killed[c]) << ',';
      if (t < k.length()) os << action_name(k.actions[t][c]) << ',' << format_number(k.rewards[t]);
      else os << ',';
      os << '\n';
    }
  }
  std::ofstream ret(fs::path(o.out) / "return.csv", std::ios::binary | std::ios::trunc);
  ret << "seed,discounted_return\n" << k.seed << ',' << format_number(k.discounted_return) << '\n';
  return 0;
}

int cmd_experiment(CommonOptions o, bool single_trial) {
  if (single_trial) o.trials = 1;
  const auto spec = load_spec(o);
  const auto result = run_experiment(spec);
  write_experiment(o.out, spec, result);
  std::size_t failed = 0;
  for (const auto& t : result.trials) {
    if (!t.ok()) {
      ++failed;
      std::cerr << "trial " << t.trial << " failed: " << t.error << '\n';
    }
  }
  for (const auto& t : result.trials) {
    if (!t.ok()) continue;
    for (const auto& v : t.variants)
      std::cout << "trial " << t.trial << ' ' << kind_name(v.kind) << ": final-window mean return "
                << format_number(final_window_mean(v.train.log, 20)) << '\n';
  }
  return failed == result.trials.size() && failed > 0 ? 1 : 0;
}

int cmd_report(const CommonOptions& o) {
  if (!fs::exists(fs::path(o.out) / "training_log.csv"))
    throw std::invalid_argument("no training_log.csv in " + o.out);
  if (o.config.empty()) {
    regenerate_reports(o.out);
  } else {
    const auto spec = load_spec(o);
    regenerate_reports(o.out, &spec);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Policy-gradient harvest planning on a simulated forest landscape"};
  app.require_subcommand(1);

  CommonOptions opts;
  auto add_common = [&](CLI::App* sub, bool with_trials) {
    sub->add_option("--config", opts.config, "Experiment config file");
    sub->add_option("--seed", opts.seed, "Master seed (overrides [experiment] seed)");
    sub->add_option("--variant", opts.variant, "explicit or abstract")->check(CLI::IsMember({"explicit", "abstract"}));
    sub->add_option("--out", opts.out, "Output directory");
    if (with_trials) sub->add_option("--trials", opts.trials, "Number of trials (overrides config)");
  };

  auto* simulate = app.add_subcommand("simulate", "Roll one trajectory under a fixed policy and export its states");
  add_common(simulate, false);
  simulate->add_option("--policy", opts.policy, "Policy snapshot to roll out instead of the initial policy");
  auto* train = app.add_subcommand("train", "Train a single trial");
  add_common(train, false);
  auto* experiment = app.add_subcommand("experiment", "Run every trial and variant of a config");
  add_common(experiment, true);
  auto* report = app.add_subcommand("report", "Regenerate tables from a training log");
  add_common(report, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (*simulate) return cmd_simulate(opts);
    if (*train) return cmd_experiment(opts, true);
    if (*experiment) return cmd_experiment(opts, false);
    if (*report) return cmd_report(opts);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
