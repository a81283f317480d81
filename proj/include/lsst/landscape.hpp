#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

namespace lsst {

using CellId = std::size_t;

/// Rectangular grid of cells with von Neumann (4-neighbour) adjacency.
class GridTopology {
 public:
  GridTopology(std::size_t rows, std::size_t cols);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t cell_count() const noexcept { return rows_ * cols_; }

  std::size_t row_of(CellId c) const { return c / cols_; }
  std::size_t col_of(CellId c) const { return c % cols_; }

  /// Adjacent cells in the order up, left, right, down. Throws
  /// std::out_of_range for an invalid id.
  const std::vector<CellId>& neighbors(CellId c) const;

  bool operator==(const GridTopology& o) const noexcept {
    return rows_ == o.rows_ && cols_ == o.cols_;
  }

 private:
  std::size_t rows_;
  std::size_t cols_;
  std::vector<std::vector<CellId>> adjacency_;
};

/// Ordered cell features: one count per age class, then total trees, MPB,
/// neighbour MPB inflow and a constant bias.
struct FeatureSchema {
  std::size_t age_classes = 3;

  std::size_t size() const noexcept { return age_classes + 4; }
  std::size_t age(std::size_t k) const noexcept { return k; }
  std::size_t total_trees() const noexcept { return age_classes; }
  std::size_t mpb() const noexcept { return age_classes + 1; }
  std::size_t mpb_inflow() const noexcept { return age_classes + 2; }
  std::size_t bias() const noexcept { return age_classes + 3; }

  /// Age classes at or above this index are beetle hosts (mature and old
  /// in the default three-class schema).
  std::size_t first_host_class() const noexcept { return age_classes > 1 ? 1 : 0; }

  std::vector<std::string> names() const;

  bool operator==(const FeatureSchema&) const = default;
};

using CellState = Eigen::VectorXd;

enum class CellAction : int { DoNothing = 0, ClearCut = 1, Thin = 2 };
inline constexpr std::size_t kActionCount = 3;
const char* action_name(CellAction a);

using LandscapeAction = std::vector<CellAction>;

/// Joint state of every cell at one timestep.
///
/// `harvested` and `mpb_killed` record what the transition that produced
/// this state removed from each cell; both are zero for an initial state.
struct LandscapeState {
  GridTopology topology;
  FeatureSchema schema;
  int timestep = 0;
  std::vector<CellState> cells;
  std::vector<double> harvested;
  std::vector<double> mpb_killed;

  LandscapeState(GridTopology topo, FeatureSchema sch);

  std::size_t cell_count() const noexcept { return cells.size(); }
  double total_trees() const;
  double total_mpb() const;
};

/// spread_fraction times the summed MPB count of the cell's neighbours.
double mpb_inflow(const LandscapeState& state, CellId cell, double spread_fraction);

/// Recomputes the derived features (total trees, inflow, bias) of every cell
/// from the raw age-class and MPB counts.
LandscapeState refresh_spatial_features(LandscapeState state, double spread_fraction);

/// Comma-separated snapshot: header `cell,row,col,<feature names>`, one row
/// per cell.
void write_landscape_csv(std::ostream& os, const LandscapeState& state);

/// Shortest round-trip decimal form; used by every table writer.
std::string format_number(double v);

}  // namespace lsst
