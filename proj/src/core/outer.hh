#pragma once

#include <optional>

#include "core/admm.hh"
#include "core/dwr.hh"

namespace swb {

enum class NodeStatus { Infeasible, Prunable, NeedsRefinement, Branch, NotConverged };

enum class Decision { Prune, Refine, Continue };

/* Prune when even the mesh-independent bound exceeds PB; refine when only the
 * mesh-dependent bound does; otherwise keep working on this grid. */
Decision decide(double pb, double dual_mesh, double dual_indep);

struct BnBNode {
  TemporalGrid grid;
  FixingSet fixings;
  std::vector<CuttingPlane> pool;
  std::optional<AdmmWarmStart> warm;
  int depth = 0;
  int refine_count = 0;
  bool cold_retry = false;  // already restarted once after an iteration cap
  long id = 0;
  long parent = -1;
};

struct SharedModel {
  const FemOperators* fem = nullptr;
  SwitchingConstraint constraint;
  double alpha = 5e-3;
  Eigen::VectorXd y0;  // interior nodal values; size 0 means zero
  const SpaceTimeField* y_d_master = nullptr;
};

struct OuterParams {
  AdmmParams admm;
  SeparationParams sep;
  double red = 0.02;  // relative stall threshold on the mesh-dependent bound
  int red_window = 3;
};

struct NodeOutcome {
  NodeStatus status = NodeStatus::Infeasible;
  double dual_mesh = 0, dual_indep = 0;
  std::optional<AdmmResult> admm;  // last solve, absent if infeasible
  DwrEstimate dwr;
  Propagation prop;
  int admm_iterations = 0;
  int cuts_added = 0;
  int solves = 0;
  bool separation_warning = false;
};

/* One node of the branch-and-bound tree: alternate ADMM solves with cut
 * separation until the bounds settle a decision against the incumbent.
 * y_d must already live on node.grid. Mutates the node's pool and warm start. */
NodeOutcome solve_node(BnBNode& node, const SharedModel& model, const SpaceTimeField& y_d,
                       double pb, const OuterParams& par);

}  // namespace swb
