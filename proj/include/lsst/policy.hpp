#pragma once

#include "lsst/landscape.hpp"
#include "lsst/rng.hpp"

#include <Eigen/Core>

#include <array>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

namespace lsst {

using ThetaMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ThetaView = Eigen::Map<ThetaMatrix>;
using ConstThetaView = Eigen::Map<const ThetaMatrix>;
using ActionProbabilities = std::array<double, kActionCount>;

/// Explicit keeps one matrix per (timestep, cell); Abstract shares one
/// matrix per timestep across all cells.
enum class PolicyKind { Explicit, Abstract };

const char* kind_name(PolicyKind k);
PolicyKind parse_kind(const std::string& s);

struct ParamShape {
  PolicyKind kind = PolicyKind::Abstract;
  std::size_t horizon = 0;
  std::size_t cells = 0;
  std::size_t actions = kActionCount;
  std::size_t features = 0;

  std::size_t matrix_count() const noexcept { return kind == PolicyKind::Explicit ? horizon * cells : horizon; }
  std::size_t matrix_size() const noexcept { return actions * features; }
  std::size_t size() const noexcept { return matrix_count() * matrix_size(); }
  /// Matrix index holding the parameters used by cell c at timestep t.
  std::size_t matrix_index(std::size_t t, std::size_t c) const noexcept {
    return kind == PolicyKind::Explicit ? t * cells + c : t;
  }

  bool operator==(const ParamShape&) const = default;
};

/// Flat storage for anything shaped like the policy parameters: the
/// parameters themselves, scores, baselines and gradient estimates.
class ParamTensor {
 public:
  ParamTensor() = default;
  explicit ParamTensor(ParamShape shape, double fill = 0.0)
      : shape_(shape), values_(shape.size(), fill) {}

  const ParamShape& shape() const noexcept { return shape_; }
  std::size_t size() const noexcept { return values_.size(); }

  std::span<double> values() noexcept { return values_; }
  std::span<const double> values() const noexcept { return values_; }
  double& operator[](std::size_t i) { return values_[i]; }
  double operator[](std::size_t i) const { return values_[i]; }

  ThetaView matrix(std::size_t index) {
    return ThetaView(values_.data() + index * shape_.matrix_size(), static_cast<Eigen::Index>(shape_.actions),
                     static_cast<Eigen::Index>(shape_.features));
  }
  ConstThetaView matrix(std::size_t index) const {
    return ConstThetaView(values_.data() + index * shape_.matrix_size(),
                          static_cast<Eigen::Index>(shape_.actions), static_cast<Eigen::Index>(shape_.features));
  }
  ThetaView at(std::size_t t, std::size_t c) { return matrix(shape_.matrix_index(t, c)); }
  ConstThetaView at(std::size_t t, std::size_t c) const { return matrix(shape_.matrix_index(t, c)); }

  void fill(double v) { std::fill(values_.begin(), values_.end(), v); }

 private:
  ParamShape shape_;
  std::vector<double> values_;
};

using ScoreTensor = ParamTensor;
using BaselineTensor = ParamTensor;
using GradientEstimate = ParamTensor;

/// Affine map applied to raw cell features before they enter the policy.
/// Identity unless standardisation is enabled.
struct FeatureTransform {
  Eigen::VectorXd offset;
  Eigen::VectorXd scale;

  static FeatureTransform identity(std::size_t features);
  /// Per-feature z-score using the cells of `state`; the bias and any
  /// zero-variance feature keep unit scale.
  static FeatureTransform standardize(const LandscapeState& state);
  /// Divides every feature by its mean over the cells of `state`, without
  /// centring; the bias and all-zero features keep unit scale.
  static FeatureTransform rescale(const LandscapeState& state);

  Eigen::VectorXd apply(const CellState& s) const { return ((s - offset).array() / scale.array()).matrix(); }
};

enum class FeatureScaling { Raw, Standardize, Rescale };

const char* scaling_name(FeatureScaling s);
FeatureScaling parse_scaling(const std::string& s);
/// Transform of the given kind fitted to `state`.
FeatureTransform fit_transform(FeatureScaling s, const LandscapeState& state);

struct PolicyParams {
  ParamTensor theta;
  FeatureTransform transform;

  const ParamShape& shape() const noexcept { return theta.shape(); }
};

/// Gibbs distribution exp(theta[a] . s) / sum_b exp(theta[b] . s), evaluated
/// with a max-logit shift. Throws std::domain_error on non-finite logits.
ActionProbabilities action_probabilities(const Eigen::VectorXd& s, ConstThetaView theta);

ActionProbabilities log_action_probabilities(const Eigen::VectorXd& s, ConstThetaView theta);

CellAction sample_action(const ActionProbabilities& p, Rng& rng);
CellAction sample_cell_action(const Eigen::VectorXd& s, ConstThetaView theta, std::uint64_t seed);

/// d log pi(s, taken, theta) / d theta[alpha, f]:
/// s[f] (1 - pi(alpha)) when alpha == taken, -s[f] pi(alpha) otherwise.
ThetaMatrix cell_score(const Eigen::VectorXd& s, CellAction taken, ConstThetaView theta);

/// Sum over cells of log pi for the matrices resolved at timestep t.
double landscape_log_prob(const LandscapeState& state, const LandscapeAction& action,
                          const PolicyParams& params, std::size_t t);

/// Adds the per-cell scores at timestep t into `out` (shaped like params).
/// For Abstract params every cell accumulates into the shared matrix.
void accumulate_landscape_score(const LandscapeState& state, const LandscapeAction& action,
                                const PolicyParams& params, std::size_t t, ScoreTensor& out);

/// Score tensor whose only non-zero matrices are those used at timestep t.
ScoreTensor landscape_score(const LandscapeState& state, const LandscapeAction& action,
                            const PolicyParams& params, std::size_t t);

LandscapeAction sample_landscape_action(const LandscapeState& state, const PolicyParams& params,
                                        std::size_t t, Rng& rng);

inline constexpr double kInitProbabilityFloor = 1e-3;

/// Bias column set to log(max(p_a, floor)); every other weight set to
/// `feature_weight`.
PolicyParams init_params(PolicyKind kind, std::span<const double> distribution, std::size_t horizon,
                         std::size_t cells, const FeatureSchema& schema, double feature_weight = 0.0,
                         double floor = kInitProbabilityFloor);

/// Independent N(0, scale^2) weights.
PolicyParams init_random_params(PolicyKind kind, std::size_t horizon, std::size_t cells,
                                const FeatureSchema& schema, double scale, std::uint64_t seed);

/// Rows `t,cell,action,feature,weight`; cell is `all` for Abstract params.
void write_policy_csv(std::ostream& os, const PolicyParams& params, const FeatureSchema& schema);
/// Parses a table written by write_policy_csv; the transform is left as identity.
PolicyParams read_policy_csv(std::istream& is, const FeatureSchema& schema);

}  // namespace lsst
