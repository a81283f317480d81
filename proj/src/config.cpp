#include "lsst/harness.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace lsst {
namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string describe(const std::string& section, const std::string& key) { return "[" + section + "] " + key; }

}  // namespace

KeyValueConfig KeyValueConfig::parse(std::istream& is, const std::string& origin) {
  KeyValueConfig cfg;
  cfg.origin_ = origin;
  std::string line, section;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto where = origin + ":" + std::to_string(lineno);
    if (line.front() == '[') {
      if (line.back() != ']') throw std::invalid_argument(where + ": malformed section header");
      section = trim(line.substr(1, line.size() - 2));
      if (section.empty()) throw std::invalid_argument(where + ": empty section name");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw std::invalid_argument(where + ": expected key = value");
    if (section.empty()) throw std::invalid_argument(where + ": key outside of a section");
    const auto key = trim(line.substr(0, eq));
    if (key.empty()) throw std::invalid_argument(where + ": empty key");
    if (cfg.values_[section].count(key)) throw std::invalid_argument(where + ": duplicate key " + key);
    cfg.values_[section][key] = trim(line.substr(eq + 1));
    cfg.used_[section][key] = false;
  }
  return cfg;
}

KeyValueConfig KeyValueConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open config file " + path.string());
  return parse(in, path.string());
}

bool KeyValueConfig::has(const std::string& section, const std::string& key) const {
  auto it = values_.find(section);
  return it != values_.end() && it->second.count(key) > 0;
}

const std::string* KeyValueConfig::find(const std::string& section, const std::string& key) {
  auto it = values_.find(section);
  if (it == values_.end()) return nullptr;
  auto jt = it->second.find(key);
  if (jt == it->second.end()) return nullptr;
  used_[section][key] = true;
  return &jt->second;
}

std::string KeyValueConfig::get_string(const std::string& section, const std::string& key,
                                       const std::string& fallback) {
  const auto* v = find(section, key);
  return v ? *v : fallback;
}

double KeyValueConfig::get_double(const std::string& section, const std::string& key, double fallback) {
  const auto* v = find(section, key);
  if (!v) return fallback;
  double out = 0.0;
  auto res = std::from_chars(v->data(), v->data() + v->size(), out);
  if (res.ec != std::errc() || res.ptr != v->data() + v->size())
    throw std::invalid_argument(origin_ + ": " + describe(section, key) + " is not a number: '" + *v + "'");
  return out;
}

std::uint64_t KeyValueConfig::get_u64(const std::string& section, const std::string& key, std::uint64_t fallback) {
  const auto* v = find(section, key);
  if (!v) return fallback;
  std::uint64_t out = 0;
  auto res = std::from_chars(v->data(), v->data() + v->size(), out);
  if (res.ec != std::errc() || res.ptr != v->data() + v->size())
    throw std::invalid_argument(origin_ + ": " + describe(section, key) + " is not a non-negative integer: '" + *v + "'");
  return out;
}

std::size_t KeyValueConfig::get_size(const std::string& section, const std::string& key, std::size_t fallback) {
  return static_cast<std::size_t>(get_u64(section, key, fallback));
}

bool KeyValueConfig::get_bool(const std::string& section, const std::string& key, bool fallback) {
  const auto* v = find(section, key);
  if (!v) return fallback;
  if (*v == "true" || *v == "1" || *v == "yes") return true;
  if (*v == "false" || *v == "0" || *v == "no") return false;
  throw std::invalid_argument(origin_ + ": " + describe(section, key) + " is not a boolean: '" + *v + "'");
}

std::vector<double> KeyValueConfig::get_doubles(const std::string& section, const std::string& key,
                                                const std::vector<double>& fallback) {
  const auto* v = find(section, key);
  if (!v) return fallback;
  std::vector<double> out;
  std::stringstream ss(*v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    double d = 0.0;
    auto res = std::from_chars(item.data(), item.data() + item.size(), d);
    if (item.empty() || res.ec != std::errc() || res.ptr != item.data() + item.size())
      throw std::invalid_argument(origin_ + ": " + describe(section, key) + " has a bad list entry '" + item + "'");
    out.push_back(d);
  }
  return out;
}

void KeyValueConfig::require_all_consumed() const {
  for (const auto& [section, keys] : used_)
    for (const auto& [key, used] : keys)
      if (!used) throw std::invalid_argument(origin_ + ": unknown key " + describe(section, key));
}

void ExperimentSpec::validate() const {
  if (rows == 0 || cols == 0) throw std::invalid_argument("grid dimensions must be positive");
  if (variants.empty()) throw std::invalid_argument("at least one variant is required");
  if (threads < 1) throw std::invalid_argument("thread count must be >= 1");
  sim.validate();
  reward.validate();
  init.validate();
  train.validate();
}

ExperimentSpec read_experiment_spec(KeyValueConfig& c) {
  ExperimentSpec s;
  s.name = c.get_string("experiment", "name", s.name);
  s.trials = c.get_size("experiment", "trials", s.trials);
  s.seed = c.get_u64("experiment", "seed", s.seed);
  s.rollouts = c.get_size("experiment", "rollouts", s.rollouts);
  s.threads = static_cast<unsigned>(c.get_size("experiment", "threads", s.threads));
  if (c.has("experiment", "variants")) {
    s.variants.clear();
    std::stringstream ss(c.get_string("experiment", "variants", ""));
    std::string item;
    while (std::getline(ss, item, ',')) {
      const auto b = item.find_first_not_of(' ');
      const auto e = item.find_last_not_of(' ');
      s.variants.push_back(parse_kind(b == std::string::npos ? "" : item.substr(b, e - b + 1)));
    }
  }

  s.rows = c.get_size("landscape", "rows", s.rows);
  s.cols = c.get_size("landscape", "cols", s.cols);

  auto& sim = s.sim;
  sim.growth_rate = c.get_double("simulator", "growth_rate", sim.growth_rate);
  sim.death_rate = c.get_double("simulator", "death_rate", sim.death_rate);
  sim.birth_rate = c.get_double("simulator", "birth_rate", sim.birth_rate);
  sim.seedlings = c.get_double("simulator", "seedlings", sim.seedlings);
  sim.thin_fraction = c.get_double("simulator", "thin_fraction", sim.thin_fraction);
  sim.mpb_kill_rate = c.get_double("simulator", "mpb_kill_rate", sim.mpb_kill_rate);
  sim.mpb_growth_factor = c.get_double("simulator", "mpb_growth_factor", sim.mpb_growth_factor);
  sim.mpb_spread_fraction = c.get_double("simulator", "mpb_spread_fraction", sim.mpb_spread_fraction);
  sim.mpb_per_host = c.get_double("simulator", "mpb_per_host", sim.mpb_per_host);
  sim.noise_scale = c.get_double("simulator", "noise_scale", sim.noise_scale);

  auto& ini = s.init;
  ini.age_mean = c.get_doubles("initial", "age_mean", ini.age_mean);
  ini.age_spread = c.get_doubles("initial", "age_spread", ini.age_spread);
  ini.mpb_mean = c.get_double("initial", "mpb_mean", ini.mpb_mean);
  ini.mpb_spread = c.get_double("initial", "mpb_spread", ini.mpb_spread);
  ini.infested_fraction = c.get_double("initial", "infested_fraction", ini.infested_fraction);

  auto& rw = s.reward;
  rw.value_per_tree = c.get_double("reward", "value_per_tree", rw.value_per_tree);
  rw.target_density = c.get_double("reward", "target_density", rw.target_density);
  rw.density_weight = c.get_double("reward", "density_weight", rw.density_weight);
  rw.annual_allowable_cut = c.get_double("reward", "annual_allowable_cut", rw.annual_allowable_cut);
  rw.overcut_weight = c.get_double("reward", "overcut_weight", rw.overcut_weight);
  rw.mpb_kill_weight = c.get_double("reward", "mpb_kill_weight", rw.mpb_kill_weight);
  rw.base_cost = c.get_double("reward", "base_cost", rw.base_cost);
  rw.gamma = c.get_double("reward", "gamma", rw.gamma);
  rw.young_fraction_max = c.get_double("reward", "young_fraction_max", rw.young_fraction_max);
  rw.young_fraction_weight = c.get_double("reward", "young_fraction_weight", rw.young_fraction_weight);
  rw.adjacent_cut_weight = c.get_double("reward", "adjacent_cut_weight", rw.adjacent_cut_weight);

  auto& tr = s.train;
  tr.horizon = c.get_size("train", "horizon", tr.horizon);
  tr.max_samples = c.get_size("train", "max_samples", tr.max_samples);
  tr.cadence = c.get_size("train", "cadence", tr.cadence);
  const auto window = c.get_string("train", "window", "all");
  if (window == "all") tr.window = TrajectoryWindow::All;
  else if (window == "sliding") tr.window = TrajectoryWindow::Sliding;
  else throw std::invalid_argument("[train] window must be all or sliding");
  tr.window_size = c.get_size("train", "window_size", tr.window_size);
  const auto opt = c.get_string("train", "optimizer", "rprop");
  if (opt == "rprop") tr.optimizer = OptimizerKind::Rprop;
  else if (opt == "sgd") tr.optimizer = OptimizerKind::Sgd;
  else throw std::invalid_argument("[train] optimizer must be rprop or sgd");
  tr.learning_rate = c.get_double("train", "learning_rate", tr.learning_rate);
  tr.rprop.initial_delta = c.get_double("train", "rprop_initial_delta", tr.rprop.initial_delta);
  tr.rprop.eta_plus = c.get_double("train", "rprop_eta_plus", tr.rprop.eta_plus);
  tr.rprop.eta_minus = c.get_double("train", "rprop_eta_minus", tr.rprop.eta_minus);
  tr.rprop.delta_min = c.get_double("train", "rprop_delta_min", tr.rprop.delta_min);
  tr.rprop.delta_max = c.get_double("train", "rprop_delta_max", tr.rprop.delta_max);
  const auto init = c.get_string("train", "init", "distribution");
  if (init == "distribution") tr.init = InitMode::Distribution;
  else if (init == "random") tr.init = InitMode::Random;
  else throw std::invalid_argument("[train] init must be distribution or random");
  const auto dist = c.get_doubles("train", "init_distribution",
                                  {tr.init_distribution.begin(), tr.init_distribution.end()});
  if (dist.size() != kActionCount) throw std::invalid_argument("[train] init_distribution needs three entries");
  std::copy(dist.begin(), dist.end(), tr.init_distribution.begin());
  tr.init_feature_weight = c.get_double("train", "init_feature_weight", tr.init_feature_weight);
  tr.init_floor = c.get_double("train", "init_floor", tr.init_floor);
  tr.init_random_scale = c.get_double("train", "init_random_scale", tr.init_random_scale);
  tr.features = parse_scaling(c.get_string("train", "feature_scaling", scaling_name(tr.features)));
  tr.threads = static_cast<unsigned>(c.get_size("train", "threads", tr.threads));

  c.require_all_consumed();
  s.validate();
  return s;
}

ExperimentSpec load_experiment_spec(const std::filesystem::path& path) {
  auto cfg = KeyValueConfig::load(path);
  return read_experiment_spec(cfg);
}

}  // namespace lsst
