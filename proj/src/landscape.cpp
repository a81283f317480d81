#include "lsst/landscape.hpp"

#include <charconv>
#include <ostream>
#include <stdexcept>

namespace lsst {

GridTopology::GridTopology(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols) {
  if (rows == 0 || cols == 0) throw std::invalid_argument("grid dimensions must be positive");
  adjacency_.resize(rows * cols);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      auto& adj = adjacency_[r * cols + c];
      if (r > 0) adj.push_back((r - 1) * cols + c);
      if (c > 0) adj.push_back(r * cols + c - 1);
      if (c + 1 < cols) adj.push_back(r * cols + c + 1);
      if (r + 1 < rows) adj.push_back((r + 1) * cols + c);
    }
  }
}

const std::vector<CellId>& GridTopology::neighbors(CellId c) const {
  if (c >= adjacency_.size()) throw std::out_of_range("cell id " + std::to_string(c) + " out of range");
  return adjacency_[c];
}

std::vector<std::string> FeatureSchema::names() const {
  std::vector<std::string> out;
  if (age_classes == 3) {
    out = {"young", "mature", "old"};
  } else {
    for (std::size_t k = 0; k < age_classes; ++k) out.push_back("age" + std::to_string(k));
  }
  out.insert(out.end(), {"total_trees", "mpb", "mpb_inflow", "bias"});
  return out;
}

const char* action_name(CellAction a) {
  switch (a) {
    case CellAction::DoNothing: return "DoNothing";
    case CellAction::ClearCut: return "ClearCut";
    case CellAction::Thin: return "Thin";
  }
  return "?";
}

LandscapeState::LandscapeState(GridTopology topo, FeatureSchema sch)
    : topology(std::move(topo)), schema(sch) {
  if (schema.age_classes == 0) throw std::invalid_argument("at least one age class is required");
  const auto n = topology.cell_count();
  cells.assign(n, CellState::Zero(static_cast<Eigen::Index>(schema.size())));
  for (auto& s : cells) s[schema.bias()] = 1.0;
  harvested.assign(n, 0.0);
  mpb_killed.assign(n, 0.0);
}

double LandscapeState::total_trees() const {
  double sum = 0.0;
  for (const auto& s : cells) sum += s[schema.total_trees()];
  return sum;
}

double LandscapeState::total_mpb() const {
  double sum = 0.0;
  for (const auto& s : cells) sum += s[schema.mpb()];
  return sum;
}

double mpb_inflow(const LandscapeState& state, CellId cell, double spread_fraction) {
  double sum = 0.0;
  for (CellId n : state.topology.neighbors(cell)) sum += state.cells[n][state.schema.mpb()];
  return spread_fraction * sum;
}

LandscapeState refresh_spatial_features(LandscapeState state, double spread_fraction) {
  const auto& sch = state.schema;
  for (auto& s : state.cells) {
    double trees = 0.0;
    for (std::size_t k = 0; k < sch.age_classes; ++k) trees += s[sch.age(k)];
    s[sch.total_trees()] = trees;
    s[sch.bias()] = 1.0;
  }
  for (CellId c = 0; c < state.cell_count(); ++c) {
    state.cells[c][sch.mpb_inflow()] = mpb_inflow(state, c, spread_fraction);
  }
  return state;
}

std::string format_number(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

void write_landscape_csv(std::ostream& os, const LandscapeState& state) {
  os << "cell,row,col";
  for (const auto& n : state.schema.names()) os << ',' << n;
  os << '\n';
  for (CellId c = 0; c < state.cell_count(); ++c) {
    os << c << ',' << state.topology.row_of(c) << ',' << state.topology.col_of(c);
    for (Eigen::Index f = 0; f < state.cells[c].size(); ++f) os << ',' << format_number(state.cells[c][f]);
    os << '\n';
  }
}

}  // namespace lsst
