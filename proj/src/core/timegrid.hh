#pragma once

#include <optional>
#include <span>
#include <vector>

namespace swb {

/* Temporal grid 0 = t_0 < t_1 < ... < t_L = T with cells J_l = (t_{l-1}, t_l].
 * Cell data is indexed 0-based: cell l covers (node(l), node(l+1)].
 * Refinement bisects cells, so a refined grid keeps every parent node. */
class TemporalGrid {
public:
  explicit TemporalGrid(std::vector<double> nodes);
  static TemporalGrid uniform(double horizon, int cells);

  int cells() const { return static_cast<int>(nodes_.size()) - 1; }
  double horizon() const { return nodes_.back(); }
  double node(int i) const { return nodes_[i]; }
  const std::vector<double>& nodes() const { return nodes_; }
  double cell_left(int l) const { return nodes_[l]; }
  double cell_right(int l) const { return nodes_[l + 1]; }
  double cell_length(int l) const { return nodes_[l + 1] - nodes_[l]; }
  double min_cell_length() const;

  // cell index with t in (t_{l-1}, t_l]; t = 0 maps to cell 0
  int cell_containing(double t) const;
  std::optional<int> node_index(double t, double tol = 1e-12) const;
  bool has_node(double t, double tol = 1e-12) const { return node_index(t, tol).has_value(); }
  // true if every node of coarse appears in this grid
  bool nests(const TemporalGrid& coarse, double tol = 1e-12) const;

  TemporalGrid refined(const std::vector<int>& cells_to_bisect) const;
  TemporalGrid merged_with(std::span<const double> extra_nodes) const;
  // for each cell of the finer grid, the index of the cell of *this containing it
  std::vector<int> refinement_map(const TemporalGrid& fine) const;

  bool operator==(const TemporalGrid& o) const { return nodes_ == o.nodes_; }

private:
  std::vector<double> nodes_;
};

struct PiecewiseConstantFn {
  TemporalGrid grid;
  std::vector<double> values;  // one per cell

  PiecewiseConstantFn(TemporalGrid g, std::vector<double> v);
  static PiecewiseConstantFn constant(const TemporalGrid& g, double c);

  double operator()(double t) const { return values[grid.cell_containing(t)]; }
  double integral() const;
  double l2_norm() const;
  // same function re-indexed on a refinement of grid
  PiecewiseConstantFn on_refinement(const TemporalGrid& fine) const;
};

// exact L2 distance of two piecewise constant functions on possibly different grids
double l2_distance(const PiecewiseConstantFn& a, const PiecewiseConstantFn& b);

/* Ordered disjoint intervals I_i = (lo_i, hi_i) inside (0, T).
 * Averaging targets for the projection Pi. */
struct AveragingPartition {
  std::vector<double> lo, hi;

  static AveragingPartition all_cells(const TemporalGrid& g);
  int size() const { return static_cast<int>(lo.size()); }
  double length(int i) const { return hi[i] - lo[i]; }
  // measure of I_i intersected with (x, y)
  double overlap(int i, double x, double y) const;
  void validate() const;
};

// Pi(u): local averages over the partition intervals, exact
std::vector<double> project(const PiecewiseConstantFn& u, const AveragingPartition& p);
// same, for a 0/1 control given by its switch times (value flips at each, starts at 0)
std::vector<double> project_switch_times(std::span<const double> switch_times,
                                         const AveragingPartition& p);

enum class Anchor { Right, Left };

/* Piecewise linear interpolant of cell data.
 * Right: value of cell l sits at node l+1, anchor value at t = 0 (dG(0) states).
 * Left: value of cell l sits at node l, anchor value at t = T (dG(0) adjoints). */
struct PiecewiseLinearFn {
  std::vector<double> ts, vs;

  double operator()(double t) const;
};

PiecewiseLinearFn interpolate_linear(const TemporalGrid& g, std::span<const double> cell_values,
                                     double anchor_value, Anchor anchor);

}  // namespace swb
