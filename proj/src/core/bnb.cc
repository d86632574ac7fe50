#include "core/bnb.hh"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <condition_variable>
#include <deque>
#include <map>
#include <mutex>
#include <thread>

#include "core/dwr.hh"

namespace swb {

std::optional<BranchPoint> pick_branch_point(const PiecewiseConstantFn& u, const FixingSet& fx,
                                             std::span<const int8_t> cell_bits) {
  const TemporalGrid& g = u.grid;
  const double T = g.horizon();
  std::vector<std::pair<double, int>> cand;
  for (int l = 0; l < g.cells(); ++l) {
    if (!cell_bits.empty() && cell_bits[l] >= 0) continue;
    double sl = g.cell_length(l);
    double score = std::min(u.values[l], 1.0 - u.values[l]) * sl;
    if (score > 1e-12 * sl) cand.emplace_back(-score, l);
  }
  std::sort(cand.begin(), cand.end());
  for (auto [ns, l] : cand) {
    double tau = g.cell_left(l);
    if (tau > 0 && !fx.contains(tau)) return BranchPoint{tau, l};
    tau = g.cell_right(l);
    if (tau < T && !fx.contains(tau)) return BranchPoint{tau, l};
  }
  return std::nullopt;
}

PrimalCandidate evaluate_primal(const PiecewiseConstantFn& u, const SharedModel& model) {
  SpaceTimeField y_d = restrict_averaging(*model.y_d_master, u.grid);
  Eigen::VectorXd y0 =
      model.y0.size() ? model.y0 : Eigen::VectorXd::Zero(model.fem->interior());
  SpaceTimeField y = solve_state(u, y0, *model.fem);
  double raw = objective(y, u, y_d, model.alpha, *model.fem);
  double nu = estimate_nu(u, y, y_d, *model.fem);
  return PrimalCandidate{u, raw + nu, raw, nu};
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Engine {
  const SharedModel& model;
  const BnBParams& par;
  const NodeObserver& obs;

  std::mutex mu;
  std::condition_variable cv;
  std::deque<BnBNode> queue;
  int active = 0;
  long next_id = 1;

  std::optional<Incumbent> incumbent;
  double pb = kInf;

  std::vector<NodeEvent> events;
  long subs = 0, cuts = 0, admm = 0, unresolved = 0;
  long pruned_count = 0;
  double pruned_fix_sum = 0, pruned_idx_sum = 0;
  double gap = 0;
  bool weakened = false;
  std::vector<int> levels;  // per subproblem, max cell refinement level
  double root_cell = ded();
  std::map<std::vector<double>, SpaceTimeField> ydc;  // y_d per grid

  static double ded() { return 0; }

  const SpaceTimeField& y_d_for(const TemporalGrid& g) {
    auto it = ydc.find(g.nodes());
    if (it != ydc.end()) return it->second;
    auto [jt, ok] = ydc.emplace(g.nodes(), restrict_averaging(*model.y_d_master, g));
    return jt->second;
  }

  int level_of(const TemporalGrid& g) const {
    int lv = 0;
    for (int l = 0; l < g.cells(); ++l) {
      double r = root_cell / g.cell_length(l);
      lv = std::max(lv, static_cast<int>(std::lround(std::log2(r))));
    }
    return lv;
  }

  // under lock; gap contribution of a node closed without a child
  void close_gap(double dual_indep) {
    if (pb < kInf) {
      gap = std::max(gap, (pb - dual_indep) / std::max(std::abs(pb), 1e-12));
    } else {
      weakened = true;
    }
  }

  void prune_stats(const BnBNode& n, const NodeOutcome& out) {
    ++pruned_count;
    pruned_fix_sum += n.fixings.size();
    int L = n.grid.cells(), covered = 0;
    auto bits = out.prop.cell_bits(n.grid);
    for (int l = 0; l < L; ++l) covered += bits[l] >= 0;
    pruned_idx_sum += 100.0 * covered / L;
  }

  void worker() {
    std::unique_lock<std::mutex> lk(mu);
    while (true) {
      cv.wait(lk, [&] { return !queue.empty() || active == 0; });
      if (queue.empty()) {
        if (active == 0) {
          cv.notify_all();
          return;
        }
        continue;
      }
      BnBNode node = std::move(queue.front());
      queue.pop_front();
      ++active;
      ++subs;
      double pb_snap = pb;
      const SpaceTimeField& y_d = y_d_for(node.grid);
      lk.unlock();

      NodeOutcome out = solve_node(node, model, y_d, pb_snap, par.outer);

      lk.lock();
      admm += out.admm_iterations;
      cuts += out.cuts_added;
      levels.push_back(level_of(node.grid));
      weakened = weakened || out.separation_warning || out.dwr.degraded;

      NodeEvent ev;
      ev.id = node.id;
      ev.parent = node.parent;
      ev.depth = node.depth;
      ev.refine_count = node.refine_count;
      ev.cells = node.grid.cells();
      ev.cuts_total = static_cast<int>(node.pool.size());
      ev.cuts_added = out.cuts_added;
      ev.admm_iters = out.admm_iterations;
      ev.solves = out.solves;
      ev.dual_mesh = out.dual_mesh;
      ev.dual_indep = out.dual_indep;
      ev.eta = out.dwr.eta_total;
      ev.fix_count = node.fixings.size();

      if (obs) obs(node, out);

      switch (out.status) {
        case NodeStatus::Infeasible:
          prune_stats(node, out);
          ev.outcome = "infeasible";
          break;
        case NodeStatus::Prunable:
          prune_stats(node, out);
          ev.outcome = "pruned";
          break;
        case NodeStatus::NotConverged:
          if (!node.cold_retry) {
            node.cold_retry = true;
            node.warm.reset();
            ev.outcome = "requeued_cold";
            queue.push_back(std::move(node));
            break;
          }
          weakened = true;
          handle_branch(node, out, ev, /*allow_prune=*/false);
          break;
        case NodeStatus::Branch:
          handle_branch(node, out, ev, /*allow_prune=*/true);
          break;
        case NodeStatus::NeedsRefinement: {
          double rel = pb < kInf ? (pb - out.dual_indep) / std::max(std::abs(pb), 1e-12) : kInf;
          if (rel <= par.tol) {
            gap = std::max(gap, rel);
            prune_stats(node, out);
            ev.outcome = "tol_pruned";
            break;
          }
          if (node.refine_count >= par.max_refine) {
            ++unresolved;
            weakened = true;
            close_gap(out.dual_indep);
            ev.outcome = "unresolved";
            break;
          }
          auto which = select_refinement(out.dwr.eta_cell, par.gamma, node.grid);
          TemporalGrid fine = node.grid.refined(which);
          if (node.warm) {
            auto map = node.grid.refinement_map(fine);
            node.warm = warm_start_refined(*node.warm, map);
          }
          node.grid = std::move(fine);
          ++node.refine_count;
          ev.outcome = "refined";
          queue.push_back(std::move(node));
          break;
        }
      }

      ev.pb_at_decision = pb;
      events.push_back(std::move(ev));
      --active;
      cv.notify_all();
    }
  }

  // under lock; primal pass, TOL test, then children
  void handle_branch(BnBNode& node, const NodeOutcome& out, NodeEvent& ev, bool allow_prune) {
    PiecewiseConstantFn relaxed(node.grid, out.admm->u);
    auto rounded = round_cia(relaxed, model.constraint, node.fixings, out.prop);
    if (rounded) {
      auto cand = evaluate_primal(*rounded, model);
      if (cand.value < pb) {
        pb = cand.value;
        incumbent = Incumbent{cand.control, cand.value, cand.raw, cand.nu, node.id};
      }
    }
    if (allow_prune && pb < kInf) {
      double rel = (pb - out.dual_indep) / std::max(std::abs(pb), 1e-12);
      if (rel <= par.tol) {
        gap = std::max(gap, rel);
        prune_stats(node, out);
        ev.outcome = "tol_pruned";
        return;
      }
    }
    auto bits = out.prop.cell_bits(node.grid);
    auto bp = pick_branch_point(relaxed, node.fixings, bits);
    if (!bp) {
      close_gap(out.dual_indep);
      ev.outcome = "evaluated";
      return;
    }
    ev.outcome = "branched";
    ev.tau = bp->tau;
    for (int bit : {0, 1}) {
      BnBNode child{.grid = node.grid};
      child.fixings = node.fixings.inserted(bp->tau, bit);
      child.pool = node.pool;
      child.warm = node.warm;
      child.depth = node.depth + 1;
      child.refine_count = node.refine_count;
      child.id = next_id++;
      child.parent = node.id;
      queue.push_back(std::move(child));
    }
  }
};

}  // namespace

RunResult run(const SharedModel& model, const BnBParams& par, const NodeObserver& obs) {
  auto t0 = std::chrono::steady_clock::now();
  const double T = model.y_d_master->grid.horizon();

  Engine eng{model, par, obs};
  eng.root_cell = T / par.root_cells;
  BnBNode root{.grid = TemporalGrid::uniform(T, par.root_cells)};
  root.id = 0;
  eng.queue.push_back(std::move(root));

  int n = std::max(1, par.threads);
  if (n == 1) {
    eng.worker();
  } else {
    std::vector<std::thread> pool;
    for (int i = 0; i < n; ++i) pool.emplace_back([&] { eng.worker(); });
    for (auto& th : pool) th.join();
  }

  RunResult res;
  res.incumbent = std::move(eng.incumbent);
  res.events = std::move(eng.events);
  RunStats& st = res.stats;
  st.subs = eng.subs;
  st.cuts = eng.cuts;
  st.admm = eng.admm;
  st.unresolved = eng.unresolved;
  st.weakened = eng.weakened || eng.unresolved > 0;
  st.gap = eng.gap;
  st.obj = res.incumbent ? res.incumbent->value : kInf;
  if (eng.pruned_count > 0) {
    st.fix_points = eng.pruned_fix_sum / eng.pruned_count;
    st.fix_indices = eng.pruned_idx_sum / eng.pruned_count;
  }
  st.refine = 0;
  for (int lv : eng.levels) st.refine = std::max(st.refine, lv);
  long at_max = 0;
  for (int lv : eng.levels) at_max += lv == st.refine;
  st.ratio = eng.levels.empty() ? 0 : 100.0 * at_max / eng.levels.size();
  st.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return res;
}

}  // namespace swb
