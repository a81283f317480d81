#pragma once

#include "lsst/optimizer.hpp"

#include <array>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace lsst {

/// Flat `[section]` / `key = value` file. `#` starts a comment. Every key
/// must be consumed by the reader; leftovers are reported as unknown.
class KeyValueConfig {
 public:
  static KeyValueConfig parse(std::istream& is, const std::string& origin = "<config>");
  static KeyValueConfig load(const std::filesystem::path& path);

  bool has(const std::string& section, const std::string& key) const;
  std::string get_string(const std::string& section, const std::string& key, const std::string& fallback);
  double get_double(const std::string& section, const std::string& key, double fallback);
  std::size_t get_size(const std::string& section, const std::string& key, std::size_t fallback);
  std::uint64_t get_u64(const std::string& section, const std::string& key, std::uint64_t fallback);
  bool get_bool(const std::string& section, const std::string& key, bool fallback);
  std::vector<double> get_doubles(const std::string& section, const std::string& key,
                                  const std::vector<double>& fallback);

  /// Throws std::invalid_argument naming the first key nobody read.
  void require_all_consumed() const;

 private:
  const std::string* find(const std::string& section, const std::string& key);

  std::string origin_;
  std::map<std::string, std::map<std::string, std::string>> values_;
  std::map<std::string, std::map<std::string, bool>> used_;
};

struct ExperimentSpec {
  std::string name = "experiment";
  std::size_t rows = 1;
  std::size_t cols = 5;
  SimulatorConfig sim;
  RewardConfig reward;
  InitialStateConfig init;
  TrainConfig train;
  std::vector<PolicyKind> variants{PolicyKind::Explicit, PolicyKind::Abstract};
  std::size_t trials = 1;
  std::uint64_t seed = 0;
  std::size_t rollouts = 20;  // per policy, for action-proportion tables
  unsigned threads = 1;       // concurrent trials

  GridTopology topology() const { return GridTopology(rows, cols); }
  void validate() const;
};

ExperimentSpec read_experiment_spec(KeyValueConfig& config);
ExperimentSpec load_experiment_spec(const std::filesystem::path& path);

/// Seeds derived from the master seed and trial index.
struct TrialSeeds {
  std::uint64_t landscape;
  std::uint64_t train;
  std::uint64_t rollouts;
};
TrialSeeds trial_seeds(std::uint64_t master, std::size_t trial);

/// Mean cell count per action at each timestep. Every row sums to |C|.
struct ActionProportionRow {
  std::size_t t = 0;
  std::array<double, kActionCount> mean_count{};
};
std::vector<ActionProportionRow> action_proportion_report(std::span<const TrajectoryRecord> trajectories);

/// Rollouts of a fixed policy from s0 with seeds derived from `seed`.
std::vector<TrajectoryRecord> policy_rollouts(const LandscapeState& s0, const PolicyParams& params,
                                              const SimulatorConfig& sim, const RewardConfig& reward,
                                              std::size_t count, std::uint64_t seed);

/// Mean action distribution per (t, cell) over the visited states of the
/// given rollouts; indexed [t][cell].
std::vector<std::vector<ActionProbabilities>> visited_action_distributions(
    std::span<const TrajectoryRecord> rollouts, const PolicyParams& params);

struct VariantRun {
  PolicyKind kind;
  TrainResult train;
  std::vector<ActionProportionRow> initial_actions;
  std::vector<ActionProportionRow> final_actions;
};

struct TrialResult {
  std::size_t trial = 0;
  std::optional<LandscapeState> s0;
  std::vector<VariantRun> variants;
  std::string error;  // empty on success

  bool ok() const noexcept { return error.empty(); }
};

TrialResult run_trial(const ExperimentSpec& spec, std::size_t trial);

struct ExperimentResult {
  std::vector<TrialResult> trials;
};

struct RunHooks {
  /// Invoked at the start of every trial; an exception fails that trial.
  std::function<void(std::size_t)> before_trial;
};

ExperimentResult run_experiment(const ExperimentSpec& spec, const RunHooks& hooks = {});

/// One training-log row as stored on disk.
struct LogEntry {
  std::size_t trial = 0;
  std::string variant;
  std::size_t sample = 0;
  double discounted_return = 0.0;
  std::array<double, kActionCount> gradient{};
};

std::vector<LogEntry> read_training_log(const std::filesystem::path& path);

/// Writes training_log.csv, mean_reward.csv, summary.csv, failures.csv,
/// action_proportions.csv, manifest.csv and policies/ into `dir`.
void write_experiment(const std::filesystem::path& dir, const ExperimentSpec& spec, const ExperimentResult& result);

/// Rebuilds mean_reward.csv and summary.csv from training_log.csv in `dir`.
/// With a spec, also rebuilds action_proportions.csv from the policy snapshots.
void regenerate_reports(const std::filesystem::path& dir, const ExperimentSpec* spec = nullptr);

/// Mean return over the last `window` samples of one variant's log.
double final_window_mean(const std::vector<TrainLogRow>& log, std::size_t window);

}  // namespace lsst
