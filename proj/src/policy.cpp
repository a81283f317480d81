#include "lsst/policy.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

namespace lsst {

const char* kind_name(PolicyKind k) { return k == PolicyKind::Explicit ? "explicit" : "abstract"; }

PolicyKind parse_kind(const std::string& s) {
  if (s == "explicit") return PolicyKind::Explicit;
  if (s == "abstract") return PolicyKind::Abstract;
  throw std::invalid_argument("unknown policy variant '" + s + "' (expected explicit or abstract)");
}

FeatureTransform FeatureTransform::identity(std::size_t features) {
  const auto n = static_cast<Eigen::Index>(features);
  return {Eigen::VectorXd::Zero(n), Eigen::VectorXd::Ones(n)};
}

FeatureTransform FeatureTransform::standardize(const LandscapeState& state) {
  const auto f = state.schema.size();
  auto out = identity(f);
  const double n = static_cast<double>(state.cell_count());
  for (std::size_t j = 0; j < f; ++j) {
    if (j == state.schema.bias()) continue;
    const auto jj = static_cast<Eigen::Index>(j);
    double mean = 0.0;
    for (const auto& s : state.cells) mean += s[jj];
    mean /= n;
    double var = 0.0;
    for (const auto& s : state.cells) var += (s[jj] - mean) * (s[jj] - mean);
    const double sd = std::sqrt(var / n);
    out.offset[jj] = mean;
    out.scale[jj] = sd > 1e-12 ? sd : 1.0;
  }
  return out;
}

FeatureTransform FeatureTransform::rescale(const LandscapeState& state) {
  const auto f = state.schema.size();
  auto out = identity(f);
  for (std::size_t j = 0; j < f; ++j) {
    if (j == state.schema.bias()) continue;
    const auto jj = static_cast<Eigen::Index>(j);
    double mean = 0.0;
    for (const auto& s : state.cells) mean += std::abs(s[jj]);
    mean /= static_cast<double>(state.cell_count());
    out.scale[jj] = mean > 1e-12 ? mean : 1.0;
  }
  return out;
}

const char* scaling_name(FeatureScaling s) {
  switch (s) {
    case FeatureScaling::Raw: return "raw";
    case FeatureScaling::Standardize: return "standardize";
    case FeatureScaling::Rescale: return "rescale";
  }
  return "?";
}

FeatureScaling parse_scaling(const std::string& s) {
  if (s == "raw") return FeatureScaling::Raw;
  if (s == "standardize") return FeatureScaling::Standardize;
  if (s == "rescale") return FeatureScaling::Rescale;
  throw std::invalid_argument("unknown feature scaling '" + s + "' (expected raw, standardize or rescale)");
}

FeatureTransform fit_transform(FeatureScaling s, const LandscapeState& state) {
  switch (s) {
    case FeatureScaling::Standardize: return FeatureTransform::standardize(state);
    case FeatureScaling::Rescale: return FeatureTransform::rescale(state);
    case FeatureScaling::Raw: break;
  }
  return FeatureTransform::identity(state.schema.size());
}

namespace {

std::array<double, kActionCount> shifted_logits(const Eigen::VectorXd& s, ConstThetaView theta, double& max_out) {
  if (theta.rows() != static_cast<Eigen::Index>(kActionCount) || theta.cols() != s.size())
    throw std::invalid_argument("theta shape does not match feature vector");
  std::array<double, kActionCount> z{};
  for (std::size_t a = 0; a < kActionCount; ++a) z[a] = theta.row(static_cast<Eigen::Index>(a)).dot(s);
  const double m = *std::max_element(z.begin(), z.end());
  if (!std::isfinite(m)) throw std::domain_error("non-finite policy logits");
  for (auto& v : z) {
    v -= m;
    if (std::isnan(v)) throw std::domain_error("non-finite policy logits");
  }
  max_out = m;
  return z;
}

}  // namespace

ActionProbabilities action_probabilities(const Eigen::VectorXd& s, ConstThetaView theta) {
  double m = 0.0;
  auto z = shifted_logits(s, theta, m);
  double sum = 0.0;
  for (auto& v : z) {
    v = std::exp(v);
    sum += v;
  }
  for (auto& v : z) v /= sum;
  return z;
}

ActionProbabilities log_action_probabilities(const Eigen::VectorXd& s, ConstThetaView theta) {
  double m = 0.0;
  auto z = shifted_logits(s, theta, m);
  double sum = 0.0;
  for (double v : z) sum += std::exp(v);
  const double lse = std::log(sum);
  for (auto& v : z) v -= lse;
  return z;
}

CellAction sample_action(const ActionProbabilities& p, Rng& rng) {
  const double u = rng.uniform();
  double acc = 0.0;
  for (std::size_t a = 0; a + 1 < kActionCount; ++a) {
    acc += p[a];
    if (u < acc) return static_cast<CellAction>(a);
  }
  return static_cast<CellAction>(kActionCount - 1);
}

CellAction sample_cell_action(const Eigen::VectorXd& s, ConstThetaView theta, std::uint64_t seed) {
  Rng rng(seed);
  return sample_action(action_probabilities(s, theta), rng);
}

ThetaMatrix cell_score(const Eigen::VectorXd& s, CellAction taken, ConstThetaView theta) {
  const auto p = action_probabilities(s, theta);
  ThetaMatrix g(theta.rows(), theta.cols());
  for (std::size_t a = 0; a < kActionCount; ++a) {
    const double w = (static_cast<std::size_t>(taken) == a) ? 1.0 - p[a] : -p[a];
    g.row(static_cast<Eigen::Index>(a)) = w * s.transpose();
  }
  return g;
}

namespace {

void check_inputs(const LandscapeState& state, const LandscapeAction& action, const PolicyParams& params,
                  std::size_t t) {
  const auto& sh = params.shape();
  if (t >= sh.horizon) throw std::invalid_argument("timestep " + std::to_string(t) + " outside the policy horizon");
  if (action.size() != state.cell_count()) throw std::invalid_argument("action and state cell counts differ");
  if (sh.kind == PolicyKind::Explicit && sh.cells != state.cell_count())
    throw std::invalid_argument("explicit policy cell count does not match the landscape");
  if (sh.features != state.schema.size()) throw std::invalid_argument("policy feature count does not match schema");
}

}  // namespace

double landscape_log_prob(const LandscapeState& state, const LandscapeAction& action, const PolicyParams& params,
                          std::size_t t) {
  check_inputs(state, action, params, t);
  double total = 0.0;
  for (CellId c = 0; c < state.cell_count(); ++c) {
    const auto lp = log_action_probabilities(params.transform.apply(state.cells[c]), params.theta.at(t, c));
    total += lp[static_cast<std::size_t>(action[c])];
  }
  return total;
}

void accumulate_landscape_score(const LandscapeState& state, const LandscapeAction& action,
                                const PolicyParams& params, std::size_t t, ScoreTensor& out) {
  check_inputs(state, action, params, t);
  if (out.shape() != params.shape()) throw std::invalid_argument("score tensor shape does not match params");
  for (CellId c = 0; c < state.cell_count(); ++c) {
    out.at(t, c) += cell_score(params.transform.apply(state.cells[c]), action[c], params.theta.at(t, c));
  }
}

ScoreTensor landscape_score(const LandscapeState& state, const LandscapeAction& action, const PolicyParams& params,
                            std::size_t t) {
  ScoreTensor out(params.shape());
  accumulate_landscape_score(state, action, params, t, out);
  return out;
}

LandscapeAction sample_landscape_action(const LandscapeState& state, const PolicyParams& params, std::size_t t,
                                        Rng& rng) {
  const auto& sh = params.shape();
  if (t >= sh.horizon) throw std::invalid_argument("timestep outside the policy horizon");
  if (sh.kind == PolicyKind::Explicit && sh.cells != state.cell_count())
    throw std::invalid_argument("explicit policy cell count does not match the landscape");
  LandscapeAction a(state.cell_count());
  for (CellId c = 0; c < state.cell_count(); ++c) {
    a[c] = sample_action(action_probabilities(params.transform.apply(state.cells[c]), params.theta.at(t, c)), rng);
  }
  return a;
}

PolicyParams init_params(PolicyKind kind, std::span<const double> distribution, std::size_t horizon,
                         std::size_t cells, const FeatureSchema& schema, double feature_weight, double floor) {
  if (!(floor > 0.0)) throw std::invalid_argument("initial probability floor must be positive");
  if (distribution.size() != kActionCount)
    throw std::invalid_argument("initial distribution needs one probability per action");
  double sum = 0.0;
  for (double p : distribution) {
    if (!(p >= 0.0)) throw std::invalid_argument("initial distribution has a negative entry");
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-9) throw std::invalid_argument("initial distribution must sum to 1");

  ParamShape shape{kind, horizon, kind == PolicyKind::Explicit ? cells : 0, kActionCount, schema.size()};
  PolicyParams params{ParamTensor(shape, feature_weight), FeatureTransform::identity(schema.size())};
  for (std::size_t m = 0; m < shape.matrix_count(); ++m) {
    auto theta = params.theta.matrix(m);
    for (std::size_t a = 0; a < kActionCount; ++a) {
      theta(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(schema.bias())) =
          std::log(std::max(distribution[a], floor));
    }
  }
  return params;
}

PolicyParams init_random_params(PolicyKind kind, std::size_t horizon, std::size_t cells,
                                const FeatureSchema& schema, double scale, std::uint64_t seed) {
  ParamShape shape{kind, horizon, kind == PolicyKind::Explicit ? cells : 0, kActionCount, schema.size()};
  PolicyParams params{ParamTensor(shape), FeatureTransform::identity(schema.size())};
  Rng rng(seed);
  for (double& v : params.theta.values()) v = scale * rng.normal();
  return params;
}

void write_policy_csv(std::ostream& os, const PolicyParams& params, const FeatureSchema& schema) {
  const auto& sh = params.shape();
  const auto names = schema.names();
  const std::size_t cells = sh.kind == PolicyKind::Explicit ? sh.cells : 1;
  os << "t,cell,action,feature,weight\n";
  for (std::size_t t = 0; t < sh.horizon; ++t) {
    for (std::size_t c = 0; c < cells; ++c) {
      const auto theta = params.theta.at(t, c);
      for (std::size_t a = 0; a < sh.actions; ++a) {
        for (std::size_t f = 0; f < sh.features; ++f) {
          os << t << ',';
          if (sh.kind == PolicyKind::Explicit) os << c; else os << "all";
          os << ',' << action_name(static_cast<CellAction>(a)) << ',' << names[f] << ','
             << format_number(theta(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(f))) << '\n';
        }
      }
    }
  }
}

PolicyParams read_policy_csv(std::istream& is, const FeatureSchema& schema) {
  const auto names = schema.names();
  std::string line;
  if (!std::getline(is, line) || line != "t,cell,action,feature,weight")
    throw std::runtime_error("policy table: unexpected header");

  struct Row { std::size_t t, c, a, f; double w; };
  std::vector<Row> rows;
  bool any_explicit = false, any_abstract = false;
  std::size_t max_t = 0, max_c = 0;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string t, c, a, f, w;
    if (!std::getline(ss, t, ',') || !std::getline(ss, c, ',') || !std::getline(ss, a, ',') ||
        !std::getline(ss, f, ',') || !std::getline(ss, w))
      throw std::runtime_error("policy table: malformed row '" + line + "'");
    Row r{};
    r.t = std::stoul(t);
    if (c == "all") {
      any_abstract = true;
    } else {
      any_explicit = true;
      r.c = std::stoul(c);
    }
    std::size_t ai = kActionCount;
    for (std::size_t k = 0; k < kActionCount; ++k)
      if (a == action_name(static_cast<CellAction>(k))) ai = k;
    auto fit = std::find(names.begin(), names.end(), f);
    if (ai == kActionCount || fit == names.end()) throw std::runtime_error("policy table: unknown label in '" + line + "'");
    r.a = ai;
    r.f = static_cast<std::size_t>(fit - names.begin());
    r.w = std::stod(w);
    max_t = std::max(max_t, r.t);
    max_c = std::max(max_c, r.c);
    rows.push_back(r);
  }
  if (rows.empty()) throw std::runtime_error("policy table: no rows");
  if (any_explicit && any_abstract) throw std::runtime_error("policy table: mixed explicit and abstract rows");
  const auto kind = any_explicit ? PolicyKind::Explicit : PolicyKind::Abstract;
  ParamShape shape{kind, max_t + 1, any_explicit ? max_c + 1 : 0, kActionCount, schema.size()};
  PolicyParams params{ParamTensor(shape), FeatureTransform::identity(schema.size())};
  if (rows.size() != shape.size()) throw std::runtime_error("policy table: incomplete parameter set");
  for (const auto& r : rows) {
    params.theta.at(r.t, r.c)(static_cast<Eigen::Index>(r.a), static_cast<Eigen::Index>(r.f)) = r.w;
  }
  return params;
}

}  // namespace lsst
