#include "core/outer.hh"

#include <cmath>

namespace swb {

Decision decide(double pb, double dual_mesh, double dual_indep) {
  if (dual_indep > pb) return Decision::Prune;
  if (pb < dual_mesh) return Decision::Refine;
  return Decision::Continue;
}

NodeOutcome solve_node(BnBNode& node, const SharedModel& model, const SpaceTimeField& y_d,
                       double pb, const OuterParams& par) {
  NodeOutcome out;
  const double T = node.grid.horizon();
  out.prop = propagate(node.fixings, model.constraint, T);
  if (!out.prop.feasible) {
    out.status = NodeStatus::Infeasible;
    return out;
  }

  NodeProblem prob;
  prob.grid = &node.grid;
  prob.fem = model.fem;
  prob.y_d = &y_d;
  prob.y0 = model.y0;
  prob.alpha = model.alpha;
  prob.cell_bits = out.prop.cell_bits(node.grid);
  for (const auto& cut : node.pool) {
    prob.rows.push_back(resolve_cut(cut, node.grid));
    prob.rhs.push_back(cut.b);
  }

  const AveragingPartition cells = AveragingPartition::all_cells(node.grid);
  double prev_mesh = 0;
  bool have_prev = false;
  int stalled = 0;
  while (true) {
    AdmmResult res = admm_solve(prob, par.admm, node.warm ? &*node.warm : nullptr);
    node.warm = warm_start_from(res);
    ++out.solves;
    out.admm_iterations += res.iterations;
    out.dual_mesh = res.J - res.e;
    out.dwr = estimate_eta(prob, res);
    out.dual_indep = out.dual_mesh + out.dwr.eta_total;
    bool converged = res.converged;
    out.admm = std::move(res);
    if (!converged) {
      out.status = NodeStatus::NotConverged;
      return out;
    }
    Decision dec = decide(pb, out.dual_mesh, out.dual_indep);
    if (dec == Decision::Prune) {
      out.status = NodeStatus::Prunable;
      return out;
    }
    if (dec == Decision::Refine) {
      out.status = NodeStatus::NeedsRefinement;
      return out;
    }
    if (have_prev) {
      double rel = (out.dual_mesh - prev_mesh) / std::max(std::abs(prev_mesh), 1e-12);
      stalled = rel < par.red ? stalled + 1 : 0;
      if (stalled >= par.red_window) {
        out.status = NodeStatus::Branch;
        return out;
      }
    }
    prev_mesh = out.dual_mesh;
    have_prev = true;

    auto sep = separate(out.admm->u, model.constraint, node.fixings, cells, T, par.sep);
    out.separation_warning = out.separation_warning || sep.warning;
    if (!sep.cut) {
      out.status = NodeStatus::Branch;
      return out;
    }
    node.pool.push_back(*sep.cut);
    prob.rows.push_back(resolve_cut(*sep.cut, node.grid));
    prob.rhs.push_back(sep.cut->b);
    node.warm = warm_start_extend(*node.warm, prob);
    ++out.cuts_added;
  }
}

}  // namespace swb
