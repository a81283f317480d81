#include "lsst/harness.hpp"

#include "lsst/rng.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <future>
#include <map>
#include <sstream>
#include <stdexcept>

namespace lsst {

namespace fs = std::filesystem;

TrialSeeds trial_seeds(std::uint64_t master, std::size_t trial) {
  const auto base = derive_seed(master, trial);
  return {derive_seed(base, 1), derive_seed(base, 2), derive_seed(base, 3)};
}

std::vector<ActionProportionRow> action_proportion_report(std::span<const TrajectoryRecord> trajectories) {
  if (trajectories.empty()) throw std::invalid_argument("action proportions need at least one trajectory");
  const std::size_t horizon = trajectories.front().length();
  std::vector<ActionProportionRow> rows(horizon);
  for (std::size_t t = 0; t < horizon; ++t) rows[t].t = t;
  for (const auto& k : trajectories) {
    if (k.length() != horizon) throw std::invalid_argument("trajectories differ in length");
    for (std::size_t t = 0; t < horizon; ++t)
      for (CellAction a : k.actions[t]) rows[t].mean_count[static_cast<std::size_t>(a)] += 1.0;
  }
  const double inv = 1.0 / static_cast<double>(trajectories.size());
  for (auto& r : rows)
    for (double& v : r.mean_count) v *= inv;
  return rows;
}

std::vector<TrajectoryRecord> policy_rollouts(const LandscapeState& s0, const PolicyParams& params,
                                              const SimulatorConfig& sim, const RewardConfig& reward,
                                              std::size_t count, std::uint64_t seed) {
  std::vector<TrajectoryRecord> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) out.push_back(generate_trajectory(s0, params, sim, reward, derive_seed(seed, i)));
  return out;
}

std::vector<std::vector<ActionProbabilities>> visited_action_distributions(
    std::span<const TrajectoryRecord> rollouts, const PolicyParams& params) {
  if (rollouts.empty()) throw std::invalid_argument("need at least one rollout");
  const std::size_t horizon = rollouts.front().length();
  const std::size_t cells = rollouts.front().states.front().cell_count();
  std::vector<std::vector<ActionProbabilities>> out(horizon, std::vector<ActionProbabilities>(cells, ActionProbabilities{}));
  for (const auto& k : rollouts) {
    for (std::size_t t = 0; t < horizon; ++t) {
      for (std::size_t c = 0; c < cells; ++c) {
        const auto p = action_probabilities(params.transform.apply(k.states[t].cells[c]), params.theta.at(t, c));
        for (std::size_t a = 0; a < kActionCount; ++a) out[t][c][a] += p[a];
      }
    }
  }
  const double inv = 1.0 / static_cast<double>(rollouts.size());
  for (auto& row : out)
    for (auto& p : row)
      for (double& v : p) v *= inv;
  return out;
}

TrialResult run_trial(const ExperimentSpec& spec, std::size_t trial) {
  TrialResult out;
  out.trial = trial;
  const auto seeds = trial_seeds(spec.seed, trial);
  out.s0 = initial_state(spec.init, spec.topology(), spec.sim.mpb_spread_fraction, seeds.landscape);
  for (PolicyKind kind : spec.variants) {
    TrainConfig cfg = spec.train;
    cfg.kind = kind;
    cfg.seed = seeds.train;
    VariantRun run{kind, lsst_pg(cfg, spec.sim, spec.reward, *out.s0), {}, {}};
    if (spec.rollouts > 0 && cfg.horizon > 0) {
      const auto before = policy_rollouts(*out.s0, run.train.initial, spec.sim, spec.reward, spec.rollouts, seeds.rollouts);
      const auto after = policy_rollouts(*out.s0, run.train.final, spec.sim, spec.reward, spec.rollouts, seeds.rollouts);
      run.initial_actions = action_proportion_report(before);
      run.final_actions = action_proportion_report(after);
    }
    out.variants.push_back(std::move(run));
  }
  return out;
}

ExperimentResult run_experiment(const ExperimentSpec& spec, const RunHooks& hooks) {
  spec.validate();
  ExperimentResult result;
  result.trials.resize(spec.trials);
  auto one = [&](std::size_t i) {
    try {
      if (hooks.before_trial) hooks.before_trial(i);
      result.trials[i] = run_trial(spec, i);
    } catch (const std::exception& e) {
      TrialResult failed;
      failed.trial = i;
      failed.error = e.what();
      result.trials[i] = std::move(failed);
    }
  };
  const std::size_t workers = std::min<std::size_t>(spec.threads, std::max<std::size_t>(spec.trials, 1));
  if (workers <= 1) {
    for (std::size_t i = 0; i < spec.trials; ++i) one(i);
  } else {
    std::vector<std::future<void>> jobs;
    for (std::size_t w = 0; w < workers; ++w)
      jobs.push_back(std::async(std::launch::async, [&, w] {
        for (std::size_t i = w; i < spec.trials; i += workers) one(i);
      }));
    for (auto& j : jobs) j.get();
  }
  return result;
}

double final_window_mean(const std::vector<TrainLogRow>& log, std::size_t window) {
  if (log.empty()) return 0.0;
  const std::size_t n = std::min(window, log.size());
  double sum = 0.0;
  for (std::size_t i = log.size() - n; i < log.size(); ++i) sum += log[i].discounted_return;
  return sum / static_cast<double>(n);
}

// ---------------------------------------------------------------------------
// Tables

namespace {

constexpr std::size_t kFinalWindow = 20;

std::ofstream open_out(const fs::path& p) {
  std::ofstream os(p, std::ios::binary | std::ios::trunc);
  if (!os) throw std::runtime_error("cannot write " + p.string());
  return os;
}

std::string trial_tag(std::size_t trial) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "trial%03zu", trial);
  return buf;
}

fs::path policy_path(const fs::path& dir, std::size_t trial, PolicyKind kind, const char* stage) {
  return dir / "policies" / (trial_tag(trial) + "_" + kind_name(kind) + "_" + stage + ".csv");
}

void write_action_header(std::ostream& os) { os << "trial,variant,policy,t,DoNothing,ClearCut,Thin\n"; }

void write_action_rows(std::ostream& os, std::size_t trial, PolicyKind kind, const char* stage,
                       const std::vector<ActionProportionRow>& rows) {
  for (const auto& r : rows) {
    os << trial << ',' << kind_name(kind) << ',' << stage << ',' << r.t;
    for (double v : r.mean_count) os << ',' << format_number(v);
    os << '\n';
  }
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(item);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

void write_log_tables(const fs::path& dir, const std::vector<LogEntry>& log) {
  // Variant order follows first appearance in the log.
  std::vector<std::string> variants;
  std::map<std::string, std::map<std::size_t, std::pair<double, std::size_t>>> per_sample;
  std::map<std::pair<std::size_t, std::string>, std::vector<double>> per_trial;
  std::size_t max_sample = 0;
  bool any = false;
  for (const auto& e : log) {
    if (std::find(variants.begin(), variants.end(), e.variant) == variants.end()) variants.push_back(e.variant);
    auto& cell = per_sample[e.variant][e.sample];
    cell.first += e.discounted_return;
    cell.second += 1;
    per_trial[{e.trial, e.variant}].push_back(e.discounted_return);
    max_sample = std::max(max_sample, e.sample);
    any = true;
  }

  {
    auto os = open_out(dir / "mean_reward.csv");
    os << "sample";
    for (const auto& v : variants) os << ',' << v;
    os << '\n';
    if (any) {
      for (std::size_t s = 0; s <= max_sample; ++s) {
        os << s;
        for (const auto& v : variants) {
          os << ',';
          auto it = per_sample[v].find(s);
          if (it != per_sample[v].end()) os << format_number(it->second.first / static_cast<double>(it->second.second));
        }
        os << '\n';
      }
    }
  }

  {
    auto os = open_out(dir / "summary.csv");
    os << "trial,variant,samples,final_window_mean\n";
    std::map<std::string, std::pair<double, std::size_t>> overall;
    for (const auto& [key, returns] : per_trial) {
      const std::size_t n = std::min(kFinalWindow, returns.size());
      double sum = 0.0;
      for (std::size_t i = returns.size() - n; i < returns.size(); ++i) sum += returns[i];
      const double mean = sum / static_cast<double>(n);
      os << key.first << ',' << key.second << ',' << returns.size() << ',' << format_number(mean) << '\n';
      overall[key.second].first += mean;
      overall[key.second].second += 1;
    }
    for (const auto& v : variants) {
      const auto& [sum, n] = overall[v];
      os << "all," << v << ',' << n << ',' << format_number(sum / static_cast<double>(n)) << '\n';
    }
  }
}

}  // namespace

std::vector<LogEntry> read_training_log(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open training log " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != "trial,variant,sample,return,grad_DoNothing,grad_ClearCut,grad_Thin")
    throw std::runtime_error(path.string() + ": unexpected header");
  std::vector<LogEntry> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split_csv(line);
    if (f.size() != 7) throw std::runtime_error(path.string() + ": malformed row '" + line + "'");
    LogEntry e;
    e.trial = std::stoul(f[0]);
    e.variant = f[1];
    e.sample = std::stoul(f[2]);
    e.discounted_return = std::stod(f[3]);
    for (std::size_t a = 0; a < kActionCount; ++a) e.gradient[a] = std::stod(f[4 + a]);
    out.push_back(std::move(e));
  }
  return out;
}

void write_experiment(const fs::path& dir, const ExperimentSpec& spec, const ExperimentResult& result) {
  fs::create_directories(dir / "policies");
  fs::create_directories(dir / "landscapes");

  std::vector<LogEntry> log;
  {
    auto os = open_out(dir / "training_log.csv");
    os << "trial,variant,sample,return,grad_DoNothing,grad_ClearCut,grad_Thin\n";
    for (const auto& trial : result.trials) {
      if (!trial.ok()) continue;
      for (const auto& run : trial.variants) {
        for (const auto& row : run.train.log) {
          os << trial.trial << ',' << kind_name(run.kind) << ',' << row.sample << ','
             << format_number(row.discounted_return);
          for (double g : row.gradient_magnitude) os << ',' << format_number(g);
          os << '\n';
          log.push_back({trial.trial, kind_name(run.kind), row.sample, row.discounted_return, row.gradient_magnitude});
        }
      }
    }
  }
  write_log_tables(dir, log);

  {
    auto os = open_out(dir / "failures.csv");
    os << "trial,message\n";
    for (const auto& trial : result.trials) {
      if (trial.ok()) continue;
      std::string msg = trial.error;
      std::replace(msg.begin(), msg.end(), ',', ';');
      std::replace(msg.begin(), msg.end(), '\n', ' ');
      os << trial.trial << ',' << msg << '\n';
    }
  }

  {
    auto os = open_out(dir / "action_proportions.csv");
    write_action_header(os);
    for (const auto& trial : result.trials) {
      if (!trial.ok()) continue;
      for (const auto& run : trial.variants) {
        write_action_rows(os, trial.trial, run.kind, "initial", run.initial_actions);
        write_action_rows(os, trial.trial, run.kind, "final", run.final_actions);
      }
    }
  }

  for (const auto& trial : result.trials) {
    if (!trial.ok()) continue;
    {
      auto os = open_out(dir / "landscapes" / (trial_tag(trial.trial) + "_initial.csv"));
      write_landscape_csv(os, *trial.s0);
    }
    for (const auto& run : trial.variants) {
      auto a = open_out(policy_path(dir, trial.trial, run.kind, "initial"));
      write_policy_csv(a, run.train.initial, trial.s0->schema);
      auto b = open_out(policy_path(dir, trial.trial, run.kind, "final"));
      write_policy_csv(b, run.train.final, trial.s0->schema);
    }
  }

  auto os = open_out(dir / "manifest.csv");
  os << "key,value\n";
  os << "name," << spec.name << '\n';
  os << "seed," << spec.seed << '\n';
  os << "trials," << spec.trials << '\n';
  os << "variants,";
  for (std::size_t i = 0; i < spec.variants.size(); ++i) os << (i ? ";" : "") << kind_name(spec.variants[i]);
  os << '\n';
  os << "rollouts," << spec.rollouts << '\n';
}

void regenerate_reports(const fs::path& dir, const ExperimentSpec* spec) {
  const auto log = read_training_log(dir / "training_log.csv");
  write_log_tables(dir, log);
  if (!spec) return;

  auto os = open_out(dir / "action_proportions.csv");
  write_action_header(os);
  if (spec->rollouts == 0 || spec->train.horizon == 0) return;
  for (std::size_t trial = 0; trial < spec->trials; ++trial) {
    const auto seeds = trial_seeds(spec->seed, trial);
    std::optional<LandscapeState> s0;
    for (PolicyKind kind : spec->variants) {
      const auto initial_path = policy_path(dir, trial, kind, "initial");
      const auto final_path = policy_path(dir, trial, kind, "final");
      if (!fs::exists(initial_path) || !fs::exists(final_path)) continue;
      if (!s0) s0 = initial_state(spec->init, spec->topology(), spec->sim.mpb_spread_fraction, seeds.landscape);
      for (const char* stage : {"initial", "final"}) {
        std::ifstream in(std::string(stage) == "initial" ? initial_path : final_path);
        auto params = read_policy_csv(in, s0->schema);
        params.transform = fit_transform(spec->train.features, *s0);
        const auto rollouts = policy_rollouts(*s0, params, spec->sim, spec->reward, spec->rollouts, seeds.rollouts);
        write_action_rows(os, trial, kind, stage, action_proportion_report(rollouts));
      }
    }
  }
}

}  // namespace lsst
