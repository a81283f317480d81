#include "lsst/harness.hpp"

#include <pybind11/pybind11.h>
#include <pybind11/eigen.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

namespace py = pybind11;
using namespace lsst;

namespace {

py::array_t<double> tensor_array(const ParamTensor& t) {
  const auto& sh = t.shape();
  std::vector<py::ssize_t> dims;
  dims.push_back(static_cast<py::ssize_t>(sh.horizon));
  if (sh.kind == PolicyKind::Explicit) dims.push_back(static_cast<py::ssize_t>(sh.cells));
  dims.push_back(static_cast<py::ssize_t>(sh.actions));
  dims.push_back(static_cast<py::ssize_t>(sh.features));
  py::array_t<double> out(dims);
  std::copy(t.values().begin(), t.values().end(), out.mutable_data());
  return out;
}

void assign_tensor(ParamTensor& t, py::array_t<double, py::array::c_style | py::array::forcecast> a) {
  if (static_cast<std::size_t>(a.size()) != t.size()) throw std::invalid_argument("array size does not match tensor");
  std::copy(a.data(), a.data() + a.size(), t.values().begin());
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Policy-gradient harvest planning on a simulated forest landscape";
  m.attr("__version__") = "0.1.0";

  py::enum_<CellAction>(m, "CellAction")
      .value("DoNothing", CellAction::DoNothing)
      .value("ClearCut", CellAction::ClearCut)
      .value("Thin", CellAction::Thin);

  py::enum_<PolicyKind>(m, "PolicyKind")
      .value("Explicit", PolicyKind::Explicit)
      .value("Abstract", PolicyKind::Abstract);

  py::class_<GridTopology>(m, "GridTopology")
      .def(py::init<std::size_t, std::size_t>(), py::arg("rows"), py::arg("cols"))
      .def_property_readonly("rows", &GridTopology::rows)
      .def_property_readonly("cols", &GridTopology::cols)
      .def_property_readonly("cell_count", &GridTopology::cell_count)
      .def("neighbors", &GridTopology::neighbors, py::arg("cell"));

  py::class_<FeatureSchema>(m, "FeatureSchema")
      .def(py::init([](std::size_t n) { return FeatureSchema{n}; }), py::arg("age_classes") = 3)
      .def_readonly("age_classes", &FeatureSchema::age_classes)
      .def_property_readonly("size", &FeatureSchema::size)
      .def_property_readonly("names", &FeatureSchema::names);

  py::class_<LandscapeState>(m, "LandscapeState")
      .def(py::init<GridTopology, FeatureSchema>(), py::arg("topology"), py::arg("schema") = FeatureSchema{})
      .def_readonly("topology", &LandscapeState::topology)
      .def_readonly("schema", &LandscapeState::schema)
      .def_readwrite("timestep", &LandscapeState::timestep)
      .def_readwrite("cells", &LandscapeState::cells)
      .def_readwrite("harvested", &LandscapeState::harvested)
      .def_readwrite("mpb_killed", &LandscapeState::mpb_killed)
      .def_property_readonly("cell_count", &LandscapeState::cell_count)
      .def("total_trees", &LandscapeState::total_trees)
      .def("total_mpb", &LandscapeState::total_mpb)
      .def("to_csv", [](const LandscapeState& s) {
        std::ostringstream os;
        write_landscape_csv(os, s);
        return os.str();
      });

  m.def("mpb_inflow", &mpb_inflow, py::arg("state"), py::arg("cell"), py::arg("spread_fraction"));
  m.def("refresh_spatial_features", &refresh_spatial_features, py::arg("state"), py::arg("spread_fraction"));

  py::class_<SimulatorConfig>(m, "SimulatorConfig")
      .def(py::init<>())
      .def_readwrite("growth_rate", &SimulatorConfig::growth_rate)
      .def_readwrite("death_rate", &SimulatorConfig::death_rate)
      .def_readwrite("birth_rate", &SimulatorConfig::birth_rate)
      .def_readwrite("seedlings", &SimulatorConfig::seedlings)
      .def_readwrite("thin_fraction", &SimulatorConfig::thin_fraction)
      .def_readwrite("mpb_kill_rate", &SimulatorConfig::mpb_kill_rate)
      .def_readwrite("mpb_growth_factor", &SimulatorConfig::mpb_growth_factor)
      .def_readwrite("mpb_spread_fraction", &SimulatorConfig::mpb_spread_fraction)
      .def_readwrite("mpb_per_host", &SimulatorConfig::mpb_per_host)
      .def_readwrite("noise_scale", &SimulatorConfig::noise_scale);

  py::class_<InitialStateConfig>(m, "InitialStateConfig")
      .def(py::init<>())
      .def_readwrite("age_mean", &InitialStateConfig::age_mean)
      .def_readwrite("age_spread", &InitialStateConfig::age_spread)
      .def_readwrite("mpb_mean", &InitialStateConfig::mpb_mean)
      .def_readwrite("mpb_spread", &InitialStateConfig::mpb_spread)
      .def_readwrite("infested_fraction", &InitialStateConfig::infested_fraction);

  py::class_<RewardConfig>(m, "RewardConfig")
      .def(py::init<>())
      .def_readwrite("value_per_tree", &RewardConfig::value_per_tree)
      .def_readwrite("target_density", &RewardConfig::target_density)
      .def_readwrite("density_weight", &RewardConfig::density_weight)
      .def_readwrite("annual_allowable_cut", &RewardConfig::annual_allowable_cut)
      .def_readwrite("overcut_weight", &RewardConfig::overcut_weight)
      .def_readwrite("mpb_kill_weight", &RewardConfig::mpb_kill_weight)
      .def_readwrite("base_cost", &RewardConfig::base_cost)
      .def_readwrite("gamma", &RewardConfig::gamma)
      .def_readwrite("young_fraction_max", &RewardConfig::young_fraction_max)
      .def_readwrite("young_fraction_weight", &RewardConfig::young_fraction_weight)
      .def_readwrite("adjacent_cut_weight", &RewardConfig::adjacent_cut_weight);

  m.def("initial_state", &initial_state, py::arg("config"), py::arg("topology"), py::arg("spread_fraction"),
        py::arg("seed"));
  m.def("step", &step, py::arg("state"), py::arg("action"), py::arg("config"), py::arg("seed"));
  m.def("step_reward", &step_reward, py::arg("prev"), py::arg("action"), py::arg("next"), py::arg("config"));
  m.def("discounted_return",
        [](const std::vector<double>& r, double gamma) { return discounted_return(r, gamma); }, py::arg("rewards"),
        py::arg("gamma"));

  py::class_<PolicyParams>(m, "PolicyParams")
      .def_property_readonly("kind", [](const PolicyParams& p) { return p.shape().kind; })
      .def_property_readonly("horizon", [](const PolicyParams& p) { return p.shape().horizon; })
      .def_property_readonly("parameter_count", [](const PolicyParams& p) { return p.theta.size(); })
      .def_property("theta", [](const PolicyParams& p) { return tensor_array(p.theta); },
                    [](PolicyParams& p, py::array_t<double, py::array::c_style | py::array::forcecast> a) {
                      assign_tensor(p.theta, a);
                    })
      .def("matrix", [](const PolicyParams& p, std::size_t t, std::size_t c) { return ThetaMatrix(p.theta.at(t, c)); },
           py::arg("t"), py::arg("cell") = 0)
      .def("to_csv", [](const PolicyParams& p, const FeatureSchema& schema) {
        std::ostringstream os;
        write_policy_csv(os, p, schema);
        return os.str();
      });

  m.def("action_probabilities", [](const Eigen::VectorXd& s, const ThetaMatrix& theta) {
    return action_probabilities(s, ConstThetaView(theta.data(), theta.rows(), theta.cols()));
  }, py::arg("s"), py::arg("theta"));
  m.def("cell_score", [](const Eigen::VectorXd& s, CellAction a, const ThetaMatrix& theta) {
    return cell_score(s, a, ConstThetaView(theta.data(), theta.rows(), theta.cols()));
  }, py::arg("s"), py::arg("taken"), py::arg("theta"));
  m.def("init_params",
        [](PolicyKind kind, const std::vector<double>& dist, std::size_t horizon, std::size_t cells,
           const FeatureSchema& schema) { return init_params(kind, dist, horizon, cells, schema); },
        py::arg("kind"), py::arg("distribution"), py::arg("horizon"), py::arg("cells"),
        py::arg("schema") = FeatureSchema{});
  m.def("landscape_log_prob", &landscape_log_prob, py::arg("state"), py::arg("action"), py::arg("params"), py::arg("t"));
  m.def("landscape_score",
        [](const LandscapeState& s, const LandscapeAction& a, const PolicyParams& p, std::size_t t) {
          return tensor_array(landscape_score(s, a, p, t));
        },
        py::arg("state"), py::arg("action"), py::arg("params"), py::arg("t"));

  py::class_<TrajectoryRecord>(m, "TrajectoryRecord")
      .def_readonly("states", &TrajectoryRecord::states)
      .def_readonly("actions", &TrajectoryRecord::actions)
      .def_readonly("rewards", &TrajectoryRecord::rewards)
      .def_readonly("discounted_return", &TrajectoryRecord::discounted_return)
      .def_readonly("seed", &TrajectoryRecord::seed);

  m.def("generate_trajectory", &generate_trajectory, py::arg("s0"), py::arg("params"), py::arg("sim"),
        py::arg("reward"), py::arg("seed"));
  m.def("optimal_baseline",
        [](const std::vector<TrajectoryRecord>& k, const PolicyParams& p) { return tensor_array(optimal_baseline(k, p)); },
        py::arg("trajectories"), py::arg("params"));
  m.def("gradient_estimate",
        [](const std::vector<TrajectoryRecord>& k, const PolicyParams& p) {
          return tensor_array(gradient_estimate(k, p, optimal_baseline(k, p)));
        },
        py::arg("trajectories"), py::arg("params"), "Baselined gradient estimate over a trajectory set");

  py::class_<TrainLogRow>(m, "TrainLogRow")
      .def_readonly("sample", &TrainLogRow::sample)
      .def_readonly("discounted_return", &TrainLogRow::discounted_return)
      .def_readonly("gradient_magnitude", &TrainLogRow::gradient_magnitude);

  py::class_<TrainResult>(m, "TrainResult")
      .def_readonly("initial", &TrainResult::initial)
      .def_readonly("final", &TrainResult::final)
      .def_readonly("log", &TrainResult::log)
      .def_readonly("updates", &TrainResult::updates)
      .def_readonly("parameter_slots", &TrainResult::parameter_slots)
      .def_property_readonly("returns", [](const TrainResult& r) {
        std::vector<double> out;
        for (const auto& row : r.log) out.push_back(row.discounted_return);
        return out;
      });

  py::class_<TrainConfig>(m, "TrainConfig")
      .def(py::init<>())
      .def_readwrite("kind", &TrainConfig::kind)
      .def_readwrite("horizon", &TrainConfig::horizon)
      .def_readwrite("max_samples", &TrainConfig::max_samples)
      .def_readwrite("cadence", &TrainConfig::cadence)
      .def_readwrite("init_distribution", &TrainConfig::init_distribution)
      .def_readwrite("init_floor", &TrainConfig::init_floor)
      .def_property("feature_scaling", [](const TrainConfig& c) { return std::string(scaling_name(c.features)); },
                    [](TrainConfig& c, const std::string& v) { c.features = parse_scaling(v); })
      .def_readwrite("learning_rate", &TrainConfig::learning_rate)
      .def_readwrite("seed", &TrainConfig::seed)
      .def_property("sliding_window",
                    [](const TrainConfig& c) { return c.window == TrajectoryWindow::Sliding; },
                    [](TrainConfig& c, bool v) { c.window = v ? TrajectoryWindow::Sliding : TrajectoryWindow::All; })
      .def_property("rprop_initial_delta", [](const TrainConfig& c) { return c.rprop.initial_delta; },
                    [](TrainConfig& c, double v) { c.rprop.initial_delta = v; });

  py::class_<ExperimentSpec>(m, "ExperimentSpec")
      .def(py::init<>())
      .def_readwrite("rows", &ExperimentSpec::rows)
      .def_readwrite("cols", &ExperimentSpec::cols)
      .def_readwrite("train", &ExperimentSpec::train)
      .def_static("load", [](const std::string& path) { return load_experiment_spec(path); }, py::arg("path"))
      .def_readwrite("name", &ExperimentSpec::name)
      .def_readwrite("trials", &ExperimentSpec::trials)
      .def_readwrite("seed", &ExperimentSpec::seed)
      .def_readwrite("sim", &ExperimentSpec::sim)
      .def_readwrite("reward", &ExperimentSpec::reward)
      .def_readwrite("init", &ExperimentSpec::init)
      .def_readwrite("rollouts", &ExperimentSpec::rollouts)
      .def_property_readonly("topology", &ExperimentSpec::topology);

  m.def("train",
        [](const ExperimentSpec& spec, PolicyKind kind, std::size_t trial) {
          const auto seeds = trial_seeds(spec.seed, trial);
          const auto s0 = initial_state(spec.init, spec.topology(), spec.sim.mpb_spread_fraction, seeds.landscape);
          TrainConfig cfg = spec.train;
          cfg.kind = kind;
          cfg.seed = seeds.train;
          py::gil_scoped_release release;
          return lsst_pg(cfg, spec.sim, spec.reward, s0);
        },
        py::arg("spec"), py::arg("kind"), py::arg("trial") = 0,
        "Run the training loop for one trial of a scenario");
  m.def("trial_initial_state",
        [](const ExperimentSpec& spec, std::size_t trial) {
          return initial_state(spec.init, spec.topology(), spec.sim.mpb_spread_fraction,
                               trial_seeds(spec.seed, trial).landscape);
        },
        py::arg("spec"), py::arg("trial") = 0);
  m.def("run_experiment",
        [](const ExperimentSpec& spec, const std::string& out) {
          ExperimentResult result;
          {
            py::gil_scoped_release release;
            result = run_experiment(spec);
            write_experiment(out, spec, result);
          }
          std::size_t failed = 0;
          for (const auto& t : result.trials) failed += t.ok() ? 0 : 1;
          return failed;
        },
        py::arg("spec"), py::arg("out"), "Runs every trial, writes the output bundle, returns the failure count");
}
