#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "core/timegrid.hh"

namespace swb {

/* Combinatorial switching constraint on a binary control:
 * either a bound sigma on the BV seminorm (with the convention that a control
 * starting at 1 already spent one switching when count_initial is set),
 * or a minimum dwell time s between consecutive switchings. */
struct SwitchingConstraint {
  enum class Kind { MaxSwitchings, MinDwell };
  Kind kind = Kind::MaxSwitchings;
  int sigma = 1;
  bool count_initial = true;
  double dwell = 0;

  static SwitchingConstraint max_switchings(int sigma, bool count_initial = true);
  static SwitchingConstraint min_dwell(double s);
  // sigma, or the implicit bound ceil(T/s) for dwell constraints
  int switch_budget(double horizon) const;
};

struct Fixing {
  double tau;
  int bit;
};

/* Pointwise fixings u(tau_j) = c_j of the right-continuous representative,
 * sorted, tau_j < T. The virtual prefix (tau_0 = 0^-, c_0 = 0) is implied. */
class FixingSet {
public:
  FixingSet() = default;
  FixingSet inserted(double tau, int bit) const;
  int size() const { return static_cast<int>(fx_.size()); }
  const Fixing& operator[](int j) const { return fx_[j]; }
  bool contains(double tau, double tol = 1e-12) const;
  // fixings with the given bit strictly inside (x, y)
  bool bit_in_open(int bit, double x, double y, double tol = 1e-9) const;
  const std::vector<Fixing>& items() const { return fx_; }

private:
  std::vector<Fixing> fx_;
};

struct FixedInterval {
  double lo, hi;
  int bit;
};

struct Propagation {
  bool feasible = true;
  std::vector<FixedInterval> fixed;  // region where the control is implied
  int enforced_switches = 0;
  int budget_left = 0;

  // -1 free, else the implied bit, per cell of g; interval endpoints are nodes
  std::vector<int8_t> cell_bits(const TemporalGrid& g) const;
  double fixed_measure() const;
};

Propagation propagate(const FixingSet& fx, const SwitchingConstraint& c, double horizon);

// cells forced by the pointwise fixings themselves (the cell right of each tau_j)
std::vector<std::pair<int, int>> pointwise_forced_cells(const FixingSet& fx,
                                                        const TemporalGrid& g);

/* Valid inequality a^T Pi(u) <= b over the partition it was created on. */
struct CuttingPlane {
  AveragingPartition partition;
  std::vector<double> a;
  double b;
};

// total variation of a coefficient vector, plus |w_1| when counting the start
double total_variation(std::span<const double> w, bool count_initial);

/* Insertion positions of the fixing bits relative to a partition: c_j goes
 * after the i_j leading intervals, where i_j counts intervals left of tau_j. */
class Embedding {
public:
  static Embedding build(const FixingSet& fx, const AveragingPartition& p);
  std::vector<double> embed(std::span<const double> v, const FixingSet& fx) const;
  // -1 free coordinate, else the fixed bit, in the extended space
  std::vector<int8_t> fixed_mask(const FixingSet& fx, int m) const;
  // delete the fixed coordinates of an extended inequality
  std::pair<std::vector<double>, double> reduce(std::span<const double> a_ext, double b_ext,
                                                const FixingSet& fx) const;
  const std::vector<int>& insert_after() const { return after_; }

private:
  std::vector<int> after_;
};

struct MaxSwitchVertex {
  std::vector<double> vertex;
  double value;
};

/* min cost^T w over binary w with total variation budget sigma and optional
 * per-coordinate fixings. Ties resolved by keeping the previous bit, else 0. */
std::optional<MaxSwitchVertex> optimize_maxswitch(std::span<const double> cost, int sigma,
                                                  bool count_initial,
                                                  std::span<const int8_t> fixed = {});

struct DwellVertex {
  std::vector<double> switch_times;
  std::vector<double> vertex;  // Pi of the reconstructed control
  double value;
  bool closure_switch = false;  // some switch sits exactly on an opposite fixing
};

/* min cost^T Pi(u) over the closure of the dwell-feasible controls honoring
 * the fixings, by dynamic programming over the shift set
 * S = [0,T] cap (Z s + ({0,T} u {a_i,b_i} u {tau_j})). */
std::optional<DwellVertex> optimize_dwell(std::span<const double> cost, double dwell,
                                          const FixingSet& fx, const AveragingPartition& p,
                                          double horizon);

struct SeparationParams {
  double tol_sep = 1e-6;
  int fw_cap = 500;
  double min_violation = 1e-9;
};

struct SeparationOutcome {
  std::optional<CuttingPlane> cut;
  bool warning = false;  // iteration cap hit with ambiguous distance
};

/* Cut search for v = Pi(u): first the subgradient of the total variation in
 * the extended space, then an away-step Frank-Wolfe projection onto the
 * vertex hull with the matching oracle, rhs tightened by a support call. */
SeparationOutcome separate(std::span<const double> v, const SwitchingConstraint& c,
                           const FixingSet& fx, const AveragingPartition& p, double horizon,
                           const SeparationParams& sp = {});

/* Rounding min sum s_l |w_l - v_l| over feasible binary cell patterns,
 * fixed cells driven by large coefficients. Dwell solutions may switch off
 * the grid; the result then lives on the merged grid. */
std::optional<PiecewiseConstantFn> round_cia(const PiecewiseConstantFn& v,
                                             const SwitchingConstraint& c, const FixingSet& fx,
                                             const Propagation& prop);

}  // namespace swb
