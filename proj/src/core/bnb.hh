#pragma once

#include <functional>
#include <optional>
#include <string>

#include "core/outer.hh"

namespace swb {

struct BnBParams {
  OuterParams outer;
  double tol = 0.02;
  double gamma = 0.5;
  int root_cells = 20;
  int max_refine = 8;
  int threads = 1;
};

struct Incumbent {
  PiecewiseConstantFn control;
  double value;  // safe bound J(S_sh u, u) + nu
  double raw;    // J(S_sh u, u)
  double nu;
  long node;
};

struct NodeEvent {
  long id = 0, parent = -1;
  int depth = 0, refine_count = 0, cells = 0;
  int cuts_total = 0, cuts_added = 0, admm_iters = 0, solves = 0;
  std::string outcome;
  double dual_mesh = 0, dual_indep = 0, eta = 0;
  double pb_at_decision = 0;
  double tau = 0;  // branch point when branched
  int fix_count = 0;
};

struct RunStats {
  long subs = 0;
  long cuts = 0;
  long admm = 0;
  double fix_points = 0;   // mean fixing count over pruned subproblems
  double fix_indices = 0;  // mean % of implied-fixed cells over pruned subproblems
  double obj = 0;
  double seconds = 0;
  int refine = 0;     // max refinement level reached
  double ratio = 0;   // % of subproblems at that level
  double gap = 0;     // certified relative gap
  long unresolved = 0;
  bool weakened = false;  // certificate weakened (cap hits, degraded estimates)
};

struct RunResult {
  std::optional<Incumbent> incumbent;
  RunStats stats;
  std::vector<NodeEvent> events;
};

using NodeObserver = std::function<void(const BnBNode&, const NodeOutcome&)>;

/* Breadth-first branch-and-bound over fixing decisions with adaptive grid
 * refinement; terminates when the queue empties. The observer, if set, runs
 * after every node solve under the engine lock. */
RunResult run(const SharedModel& model, const BnBParams& par, const NodeObserver& obs = {});

struct BranchPoint {
  double tau;
  int cell;
};

/* Highest min(u,1-u)*s_l cell among the free ones; left endpoint, falling back
 * to the right one and then to later cells when an endpoint is 0, T or taken. */
std::optional<BranchPoint> pick_branch_point(const PiecewiseConstantFn& u, const FixingSet& fx,
                                             std::span<const int8_t> cell_bits);

struct PrimalCandidate {
  PiecewiseConstantFn control;
  double value, raw, nu;
};

/* Safe value of a rounded control: discrete objective plus its error estimate. */
PrimalCandidate evaluate_primal(const PiecewiseConstantFn& u, const SharedModel& model);

}  // namespace swb
