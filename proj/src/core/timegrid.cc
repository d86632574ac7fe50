#include "core/timegrid.hh"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace swb {

TemporalGrid::TemporalGrid(std::vector<double> nodes) : nodes_(std::move(nodes)) {
  if (nodes_.size() < 2) throw std::invalid_argument("grid needs at least two nodes");
  if (nodes_.front() != 0.0) throw std::invalid_argument("grid must start at 0");
  for (size_t i = 1; i < nodes_.size(); ++i)
    if (!(nodes_[i] > nodes_[i - 1])) throw std::invalid_argument("grid nodes not increasing");
}

TemporalGrid TemporalGrid::uniform(double horizon, int cells) {
  if (cells < 1 || horizon <= 0) throw std::invalid_argument("uniform grid: bad arguments");
  std::vector<double> n(cells + 1);
  for (int i = 0; i <= cells; ++i) n[i] = horizon * double(i) / double(cells);
  n.back() = horizon;
  return TemporalGrid(std::move(n));
}

double TemporalGrid::min_cell_length() const {
  double m = nodes_[1] - nodes_[0];
  for (int l = 1; l < cells(); ++l) m = std::min(m, cell_length(l));
  return m;
}

int TemporalGrid::cell_containing(double t) const {
  if (t < nodes_.front() || t > nodes_.back()) throw std::out_of_range("time outside horizon");
  if (t <= nodes_.front()) return 0;
  auto it = std::lower_bound(nodes_.begin(), nodes_.end(), t);
  int l = static_cast<int>(it - nodes_.begin());  // nodes_[l-1] < t <= nodes_[l]
  return l - 1;
}

std::optional<int> TemporalGrid::node_index(double t, double tol) const {
  auto it = std::lower_bound(nodes_.begin(), nodes_.end(), t - tol);
  if (it == nodes_.end()) return std::nullopt;
  if (std::abs(*it - t) <= tol) return static_cast<int>(it - nodes_.begin());
  return std::nullopt;
}

bool TemporalGrid::nests(const TemporalGrid& coarse, double tol) const {
  for (double t : coarse.nodes())
    if (!has_node(t, tol)) return false;
  return true;
}

TemporalGrid TemporalGrid::refined(const std::vector<int>& cells_to_bisect) const {
  if (cells_to_bisect.empty()) throw std::invalid_argument("refine: empty cell set");
  std::vector<bool> mark(cells(), false);
  for (int l : cells_to_bisect) {
    if (l < 0 || l >= cells()) throw std::out_of_range("refine: bad cell index");
    mark[l] = true;
  }
  std::vector<double> n;
  n.reserve(nodes_.size() + cells_to_bisect.size());
  for (int l = 0; l < cells(); ++l) {
    n.push_back(nodes_[l]);
    if (mark[l]) n.push_back(0.5 * (nodes_[l] + nodes_[l + 1]));
  }
  n.push_back(nodes_.back());
  return TemporalGrid(std::move(n));
}

TemporalGrid TemporalGrid::merged_with(std::span<const double> extra_nodes) const {
  std::vector<double> n = nodes_;
  for (double t : extra_nodes) {
    if (t < 0 || t > horizon()) throw std::out_of_range("merge: node outside horizon");
    n.push_back(t);
  }
  std::sort(n.begin(), n.end());
  std::vector<double> out;
  out.reserve(n.size());
  for (double t : n)
    if (out.empty() || t - out.back() > 1e-12) out.push_back(t);
  out.front() = 0.0;
  out.back() = horizon();
  return TemporalGrid(std::move(out));
}

std::vector<int> TemporalGrid::refinement_map(const TemporalGrid& fine) const {
  if (!fine.nests(*this)) throw std::invalid_argument("refinement_map: grids do not nest");
  std::vector<int> map(fine.cells());
  for (int l = 0; l < fine.cells(); ++l) {
    double mid = 0.5 * (fine.cell_left(l) + fine.cell_right(l));
    map[l] = cell_containing(mid);
  }
  return map;
}

PiecewiseConstantFn::PiecewiseConstantFn(TemporalGrid g, std::vector<double> v)
    : grid(std::move(g)), values(std::move(v)) {
  if (static_cast<int>(values.size()) != grid.cells())
    throw std::invalid_argument("cell value count does not match grid");
}

PiecewiseConstantFn PiecewiseConstantFn::constant(const TemporalGrid& g, double c) {
  return PiecewiseConstantFn(g, std::vector<double>(g.cells(), c));
}

double PiecewiseConstantFn::integral() const {
  double s = 0;
  for (int l = 0; l < grid.cells(); ++l) s += grid.cell_length(l) * values[l];
  return s;
}

double PiecewiseConstantFn::l2_norm() const {
  double s = 0;
  for (int l = 0; l < grid.cells(); ++l) s += grid.cell_length(l) * values[l] * values[l];
  return std::sqrt(s);
}

PiecewiseConstantFn PiecewiseConstantFn::on_refinement(const TemporalGrid& fine) const {
  auto map = grid.refinement_map(fine);
  std::vector<double> v(fine.cells());
  for (int l = 0; l < fine.cells(); ++l) v[l] = values[map[l]];
  return PiecewiseConstantFn(fine, std::move(v));
}

double l2_distance(const PiecewiseConstantFn& a, const PiecewiseConstantFn& b) {
  TemporalGrid common = a.grid.merged_with(b.grid.nodes());
  auto fa = a.on_refinement(common);
  auto fb = b.on_refinement(common);
  double s = 0;
  for (int l = 0; l < common.cells(); ++l) {
    double d = fa.values[l] - fb.values[l];
    s += common.cell_length(l) * d * d;
  }
  return std::sqrt(s);
}

AveragingPartition AveragingPartition::all_cells(const TemporalGrid& g) {
  AveragingPartition p;
  p.lo.reserve(g.cells());
  p.hi.reserve(g.cells());
  for (int l = 0; l < g.cells(); ++l) {
    p.lo.push_back(g.cell_left(l));
    p.hi.push_back(g.cell_right(l));
  }
  return p;
}

double AveragingPartition::overlap(int i, double x, double y) const {
  return std::max(0.0, std::min(hi[i], y) - std::max(lo[i], x));
}

void AveragingPartition::validate() const {
  if (lo.size() != hi.size()) throw std::invalid_argument("partition arrays mismatch");
  for (int i = 0; i < size(); ++i) {
    if (!(hi[i] > lo[i])) throw std::invalid_argument("partition interval degenerate");
    if (i > 0 && lo[i] < hi[i - 1] - 1e-14) throw std::invalid_argument("partition intervals overlap");
  }
}

std::vector<double> project(const PiecewiseConstantFn& u, const AveragingPartition& p) {
  std::vector<double> out(p.size(), 0.0);
  for (int i = 0; i < p.size(); ++i) {
    double acc = 0;
    for (int l = 0; l < u.grid.cells(); ++l) {
      double ov = p.overlap(i, u.grid.cell_left(l), u.grid.cell_right(l));
      if (ov > 0) acc += ov * u.values[l];
    }
    out[i] = acc / p.length(i);
  }
  return out;
}

std::vector<double> project_switch_times(std::span<const double> sw, const AveragingPartition& p) {
  // u jumps at each switch time, u = 0 before the first
  std::vector<double> out(p.size(), 0.0);
  for (int i = 0; i < p.size(); ++i) {
    double acc = 0;
    for (size_t j = 0; j < sw.size(); j += 2) {
      double a = sw[j];
      double b = (j + 1 < sw.size()) ? sw[j + 1] : p.hi[i];  // odd count: 1 until the end
      acc += p.overlap(i, a, b);
    }
    out[i] = acc / p.length(i);
  }
  return out;
}

double PiecewiseLinearFn::operator()(double t) const {
  if (t <= ts.front()) return vs.front();
  if (t >= ts.back()) return vs.back();
  auto it = std::upper_bound(ts.begin(), ts.end(), t);
  size_t i = it - ts.begin();  // ts[i-1] <= t < ts[i]
  double w = (t - ts[i - 1]) / (ts[i] - ts[i - 1]);
  return (1 - w) * vs[i - 1] + w * vs[i];
}

PiecewiseLinearFn interpolate_linear(const TemporalGrid& g, std::span<const double> cell_values,
                                     double anchor_value, Anchor anchor) {
  if (static_cast<int>(cell_values.size()) != g.cells())
    throw std::invalid_argument("interpolate_linear: cell count mismatch");
  PiecewiseLinearFn f;
  f.ts = g.nodes();
  f.vs.resize(f.ts.size());
  if (anchor == Anchor::Right) {
    f.vs[0] = anchor_value;
    for (int l = 0; l < g.cells(); ++l) f.vs[l + 1] = cell_values[l];
  } else {
    for (int l = 0; l < g.cells(); ++l) f.vs[l] = cell_values[l];
    f.vs[g.cells()] = anchor_value;
  }
  return f;
}

}  // namespace swb
