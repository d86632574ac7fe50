/* Acceptance gate: ten checks with pinned tolerances and runtime budgets,
 * one PASS/FAIL line each, nonzero exit when any of them fails. */
#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <functional>
#include <numeric>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "core/bnb.hh"
#include "core/instance.hh"

using namespace swb;

namespace {

std::string fmt(const char* f, ...) {
  char buf[512];
  va_list ap;
  va_start(ap, f);
  std::vsnprintf(buf, sizeof buf, f, ap);
  va_end(ap);
  return buf;
}

struct Gate {
  bool ok = true;
  std::string why;
  void fail(const std::string& m) {
    if (ok) {
      ok = false;
      why = m;
    }
  }
  void check(bool cond, const std::string& m) {
    if (!cond) fail(m);
  }
};

/* ------------------------------------------------------------------ c1 */

// L2(Q) error of the dG(0)/P1 state against exp(-pi^2 t) sin(pi x)
double analytic_error(int R, int L) {
  FemOperators fem(R, default_psi);
  auto g = TemporalGrid::uniform(1.0, L);
  Eigen::VectorXd y0(fem.interior());
  for (int i = 0; i < fem.interior(); ++i) y0[i] = std::sin(M_PI * (i + 1) * fem.h());
  auto y = solve_state(PiecewiseConstantFn::constant(g, 0.0), y0, fem);
  double err2 = 0;
  const int q = L <= 512 ? 8 : 2;
  for (int l = 0; l < L; ++l) {
    double s = g.cell_length(l);
    for (int j = 0; j < q; ++j) {
      double t = g.cell_left(l) + (j + 0.5) * s / q;
      Eigen::VectorXd d = y.cell[l] - std::exp(-M_PI * M_PI * t) * y0;
      err2 += (s / q) * d.dot(fem.mass_apply(d));
    }
  }
  return std::sqrt(err2);
}

void c1(Gate& g) {
  double t1 = analytic_error(128, 32), t2 = analytic_error(128, 64), t3 = analytic_error(128, 128);
  double ot1 = std::log2(t1 / t2), ot2 = std::log2(t2 / t3);
  g.check(ot1 >= 0.9 && ot2 >= 0.9, fmt("temporal orders %.2f %.2f below 0.9", ot1, ot2));
  double s1 = analytic_error(4, 20000), s2 = analytic_error(8, 20000), s3 = analytic_error(16, 20000);
  double os1 = std::log2(s1 / s2), os2 = std::log2(s2 / s3);
  g.check(os1 >= 1.9 && os2 >= 1.9, fmt("spatial orders %.2f %.2f below 1.9", os1, os2));
}

/* ------------------------------------------------------------------ c2 */

void c2(Gate& g) {
  FemOperators fem(24, default_psi);
  std::mt19937 rng(17);
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    int L = 5 + trial % 9;
    std::vector<double> nodes{0.0};
    for (int i = 0; i < L - 1; ++i) nodes.push_back(0.5 * (d(rng) + 1.0));
    nodes.push_back(1.0);
    std::sort(nodes.begin(), nodes.end());
    bool distinct = true;
    for (size_t i = 1; i < nodes.size(); ++i)
      if (nodes[i] - nodes[i - 1] < 1e-4) distinct = false;
    if (!distinct) {
      --trial;
      continue;
    }
    TemporalGrid gr(nodes);
    std::vector<double> uv(gr.cells());
    for (auto& x : uv) x = d(rng);
    PiecewiseConstantFn u(gr, uv);
    SpaceTimeField w(gr, fem.interior());
    for (auto& c : w.cell)
      for (int i = 0; i < fem.interior(); ++i) c[i] = d(rng);
    auto y = solve_state(u, Eigen::VectorXd::Zero(fem.interior()), fem);
    double lhs = 0;
    for (int l = 0; l < gr.cells(); ++l)
      lhs += gr.cell_length(l) * y.cell[l].dot(fem.mass_apply(w.cell[l]));
    auto pw = apply_psi_star(solve_adjoint(w, fem), fem);
    double rhs = 0;
    for (int l = 0; l < gr.cells(); ++l) rhs += gr.cell_length(l) * uv[l] * pw.values[l];
    double rel = std::abs(lhs - rhs) / (std::abs(lhs) + std::abs(rhs));
    if (rel > 1e-10) g.fail(fmt("trial %d: relative defect %.2e > 1e-10", trial, rel));
  }
}

/* ------------------------------------------------------------------ c3 */

// switch counts of every d-bit pattern, with and without the initial charge
void tv_tables(int d, std::vector<int>& plain, std::vector<int>& initial) {
  plain.assign(1u << d, 0);
  initial.assign(1u << d, 0);
  for (unsigned m = 0; m < (1u << d); ++m) {
    int tv = 0;
    for (int l = 1; l < d; ++l) tv += ((m >> l) & 1u) != ((m >> (l - 1)) & 1u);
    plain[m] = tv;
    initial[m] = tv + (m & 1u);
  }
}

void check_maxswitch_config(Gate& g, int d, unsigned plus, const std::vector<int8_t>& fixed,
                            unsigned f0, unsigned f1, int sigma, bool ci,
                            const std::vector<int>& tv) {
  const unsigned full = (1u << d) - 1;
  bool any = false;
  int best = 0;
  for (unsigned m = 0; m <= full; ++m) {
    if ((m & f1) != f1 || (m & f0)) continue;
    if (tv[m] > sigma) continue;
    int v = std::popcount(m & plus) - std::popcount(m & ~plus & full);
    if (!any || v < best) {
      any = true;
      best = v;
    }
  }
  std::vector<double> cost(d);
  for (int l = 0; l < d; ++l) cost[l] = ((plus >> l) & 1u) ? 1.0 : -1.0;
  auto dp = optimize_maxswitch(cost, sigma, ci, fixed);
  if (dp.has_value() != any) {
    g.fail(fmt("maxswitch existence mismatch d=%d plus=%x f0=%x f1=%x sigma=%d ci=%d", d, plus,
               f0, f1, sigma, ci));
    return;
  }
  if (!dp) return;
  if (dp->value != double(best)) {
    g.fail(fmt("maxswitch value %.17g vs brute %d at d=%d plus=%x f0=%x f1=%x sigma=%d ci=%d",
               dp->value, best, d, plus, f0, f1, sigma, ci));
    return;
  }
  unsigned vm = 0;
  double dot = 0;
  for (int l = 0; l < d; ++l) {
    double v = dp->vertex[l];
    if (v != 0.0 && v != 1.0) g.fail(fmt("nonbinary vertex at d=%d", d));
    if (v == 1.0) vm |= 1u << l;
    dot += cost[l] * v;
  }
  if (dot != dp->value || (vm & f1) != f1 || (vm & f0) || tv[vm] > sigma)
    g.fail(fmt("vertex does not attain/respect d=%d plus=%x sigma=%d", d, plus, sigma));
}

// the dwell shift set [0,T] cap (Z s + {0,T} u {lo_i,hi_i} u {tau_j})
std::vector<double> shift_set(const AveragingPartition& p, const FixingSet& fx, double s,
                              double T) {
  std::vector<double> bases{0.0, T};
  for (int i = 0; i < p.size(); ++i) {
    bases.push_back(p.lo[i]);
    bases.push_back(p.hi[i]);
  }
  for (int j = 0; j < fx.size(); ++j) bases.push_back(fx[j].tau);
  std::vector<double> pts;
  for (double b : bases) {
    double k0 = std::ceil((0.0 - b) / s - 1e-9);
    for (double k = k0;; k += 1) {
      double t = b + k * s;
      if (t > T + 1e-9) break;
      pts.push_back(std::clamp(t, 0.0, T));
    }
  }
  std::sort(pts.begin(), pts.end());
  std::vector<double> S;
  for (double t : pts)
    if (S.empty() || t - S.back() > 1e-10) S.push_back(t);
  return S;
}

bool switches_feasible(const std::vector<double>& sw, const FixingSet& fx, double s) {
  for (size_t i = 1; i < sw.size(); ++i)
    if (sw[i] - sw[i - 1] < s - 1e-9) return false;
  for (int j = 0; j < fx.size(); ++j) {
    int cnt = 0;
    bool atj = false;
    for (double t : sw) {
      if (t <= fx[j].tau + 1e-9) ++cnt;
      if (std::abs(t - fx[j].tau) <= 1e-9) atj = true;
    }
    if (cnt % 2 != fx[j].bit && !atj) return false;
  }
  return true;
}

std::optional<double> brute_dwell(const std::vector<double>& cost, double s, const FixingSet& fx,
                                  const AveragingPartition& p, double T,
                                  const std::vector<double>& S) {
  const int K = static_cast<int>(S.size());
  double best = std::numeric_limits<double>::infinity();
  std::vector<double> sw;
  std::function<void(int)> rec = [&](int from) {
    if (switches_feasible(sw, fx, s)) {
      auto v = project_switch_times(sw, p);
      double val = 0;
      for (int i = 0; i < p.size(); ++i) val += cost[i] * v[i];
      best = std::min(best, val);
    }
    for (int k = from; k < K; ++k) {
      if (!sw.empty() && S[k] - sw.back() < s - 1e-9) continue;
      sw.push_back(S[k]);
      rec(k + 1);
      sw.pop_back();
    }
  };
  rec(0);
  if (best == std::numeric_limits<double>::infinity()) return std::nullopt;
  return best;
}

void c3(Gate& g) {
  // exhaustive: every sign pattern, every fixing placement, sigma <= 3
  std::vector<int> tvp, tvi;
  for (int d = 1; d <= 6; ++d) {
    tv_tables(d, tvp, tvi);
    long n3 = 1;
    for (int l = 0; l < d; ++l) n3 *= 3;
    for (long t = 0; t < n3; ++t) {
      std::vector<int8_t> fixed(d, -1);
      unsigned f0 = 0, f1 = 0;
      long x = t;
      for (int l = 0; l < d; ++l, x /= 3) {
        int dig = x % 3;
        if (dig == 1) {
          fixed[l] = 0;
          f0 |= 1u << l;
        } else if (dig == 2) {
          fixed[l] = 1;
          f1 |= 1u << l;
        }
      }
      for (unsigned plus = 0; plus < (1u << d); ++plus)
        for (int sigma = 0; sigma <= 3; ++sigma)
          for (bool ci : {false, true})
            check_maxswitch_config(g, d, plus, fixed, f0, f1, sigma, ci, ci ? tvi : tvp);
    }
  }
  // larger dimensions: every sign pattern, fixings sampled
  std::mt19937 rng(909);
  for (int d = 7; d <= 10; ++d) {
    tv_tables(d, tvp, tvi);
    std::vector<std::vector<int8_t>> masks;
    masks.emplace_back(d, -1);
    for (int l = 0; l < d; ++l)
      for (int b : {0, 1}) {
        std::vector<int8_t> m(d, -1);
        m[l] = static_cast<int8_t>(b);
        masks.push_back(std::move(m));
      }
    for (int r = 0; r < 6; ++r) {
      std::vector<int8_t> m(d);
      for (auto& v : m) {
        unsigned u = rng() % 4u;
        v = u < 2 ? -1 : static_cast<int8_t>(u - 2);
      }
      masks.push_back(std::move(m));
    }
    for (const auto& fixed : masks) {
      unsigned f0 = 0, f1 = 0;
      for (int l = 0; l < d; ++l) {
        if (fixed[l] == 0) f0 |= 1u << l;
        if (fixed[l] == 1) f1 |= 1u << l;
      }
      for (unsigned plus = 0; plus < (1u << d); ++plus)
        for (int sigma = 0; sigma <= 3; ++sigma)
          for (bool ci : {false, true})
            check_maxswitch_config(g, d, plus, fixed, f0, f1, sigma, ci, ci ? tvi : tvp);
    }
  }

  // dwell oracle against subset enumeration over the shift set; dyadic data
  // keeps every intermediate exact, so value equality is literal
  std::vector<std::vector<double>> grids = {
      {0, 0.5, 1},        {0, 0.25, 0.5, 1},         {0, 0.5, 0.75, 1},
      {0, 0.25, 0.5, 0.75, 1}, {0, 0.125, 0.25, 0.5, 1}, {0, 0.25, 0.375, 0.5, 1},
      {0, 0.125, 0.25, 0.375, 0.5, 1}, {0, 0.5, 0.625, 0.75, 1}};
  std::vector<double> dwells{0.25, 0.375, 0.5, 0.625};
  std::vector<std::vector<std::pair<double, int>>> fixings = {
      {}, {{0.0, 1}}, {{0.25, 0}}, {{0.25, 1}}, {{0.5, 0}}, {{0.0, 1}, {0.5, 1}}};
  std::uniform_int_distribution<int> coeff(-16, 16);
  long checked = 0;
  for (const auto& nodes : grids)
    for (double s : dwells)
      for (const auto& fl : fixings) {
        TemporalGrid gr(nodes);
        auto p = AveragingPartition::all_cells(gr);
        FixingSet fx;
        for (auto [tau, b] : fl) fx = fx.inserted(tau, b);
        auto S = shift_set(p, fx, s, 1.0);
        if (S.size() > 12) continue;
        for (int rep = 0; rep < 3; ++rep) {
          std::vector<double> cost(p.size());
          for (auto& c : cost) c = coeff(rng) / 8.0;
          auto dp = optimize_dwell(cost, s, fx, p, 1.0);
          auto bf = brute_dwell(cost, s, fx, p, 1.0, S);
          if (dp.has_value() != bf.has_value()) {
            g.fail(fmt("dwell existence mismatch cells=%d s=%.3f |fx|=%d", p.size(), s, fx.size()));
            continue;
          }
          if (!dp) continue;
          ++checked;
          if (dp->value != *bf)
            g.fail(fmt("dwell value %.17g vs brute %.17g cells=%d s=%.3f |fx|=%d", dp->value, *bf,
                       p.size(), s, fx.size()));
          auto w = project_switch_times(dp->switch_times, p);
          double dot = 0;
          for (int i = 0; i < p.size(); ++i) {
            if (std::abs(w[i] - dp->vertex[i]) > 1e-14)
              g.fail(fmt("dwell vertex disagrees with its switch times, cells=%d", p.size()));
            dot += cost[i] * dp->vertex[i];
          }
          if (dot != dp->value) g.fail(fmt("dwell vertex does not attain the value, cells=%d", p.size()));
        }
      }
  g.check(checked >= 150, fmt("only %ld dwell configurations checked", checked));
}

/* ------------------------------------------------------------------ c4 */

void c4(Gate& g) {
  long cuts_checked = 0;
  for (int i = 0; i < 20; ++i) {
    bool dw = i >= 14;
    auto inst = generate_instance(1 + i % 3, 100 + i);
    FemOperators fem(12, default_psi);
    auto y_master = inst.y_d(fem);
    SharedModel model;
    model.fem = &fem;
    model.y_d_master = &y_master;
    model.constraint = dw ? SwitchingConstraint::min_dwell(i % 2 ? 0.3 : 0.22)
                          : SwitchingConstraint::max_switchings(1 + i % 2);
    BnBParams par;
    par.root_cells = dw ? 5 : 6;
    par.tol = dw ? 0.1 : 0.05;
    par.max_refine = 1;
    par.outer.admm.max_iter = 4000;

    struct Snap {
      TemporalGrid grid;
      FixingSet fx;
      std::vector<CuttingPlane> pool;
    };
    std::vector<Snap> snaps;
    run(model, par,
        [&](const BnBNode& n, const NodeOutcome&) { snaps.push_back({n.grid, n.fixings, n.pool}); });

    for (const auto& sn : snaps) {
      const int L = sn.grid.cells();
      if (L > 16 || sn.pool.empty()) continue;
      std::vector<std::vector<double>> rows;
      for (const auto& cut : sn.pool) rows.push_back(resolve_cut(cut, sn.grid));
      auto forced = pointwise_forced_cells(sn.fx, sn.grid);
      for (unsigned m = 0; m < (1u << L); ++m) {
        std::vector<double> w(L);
        for (int l = 0; l < L; ++l) w[l] = (m >> l) & 1u;
        bool ok = true;
        for (auto [cell, bit] : forced)
          if (static_cast<int>(w[cell]) != bit) ok = false;
        if (!ok) continue;
        if (!dw) {
          if (total_variation(w, model.constraint.count_initial) > model.constraint.sigma + 1e-9)
            continue;
        } else {
          std::vector<double> sw;
          if (w[0] == 1.0) sw.push_back(0.0);
          for (int l = 1; l < L; ++l)
            if (w[l] != w[l - 1]) sw.push_back(sn.grid.node(l));
          bool okd = true;
          for (size_t k = 1; k < sw.size(); ++k)
            if (sw[k] - sw[k - 1] < model.constraint.dwell - 1e-9) okd = false;
          if (!okd) continue;
        }
        for (size_t c = 0; c < rows.size(); ++c) {
          double lhs = 0;
          for (int l = 0; l < L; ++l) lhs += rows[c][l] * w[l];
          if (lhs > sn.pool[c].b + 1e-9) {
            g.fail(fmt("instance %d: cut violated by feasible pattern %x, lhs %.12g rhs %.12g", i,
                       m, lhs, sn.pool[c].b));
          }
        }
      }
      cuts_checked += static_cast<long>(sn.pool.size());
    }
  }
  g.check(cuts_checked >= 1, "no cuts were emitted across 20 instances");
}

/* ------------------------------------------------------------------ c5 */

void c5(Gate& g) {
  FemOperators fem(32, default_psi);
  auto gr = TemporalGrid::uniform(1.0, 16);
  auto y_d = solve_state(PiecewiseConstantFn::constant(gr, 0.5),
                         Eigen::VectorXd::Zero(fem.interior()), fem);
  NodeProblem pb;
  pb.grid = &gr;
  pb.fem = &fem;
  pb.y_d = &y_d;
  pb.alpha = 5e-3;
  pb.cell_bits.assign(16, -1);
  AdmmParams par;
  par.beta = 5e-3;
  auto res = admm_solve(pb, par);
  g.check(res.converged, fmt("no convergence in %d iterations", res.iterations));
  double dist2 = 0;
  for (int l = 0; l < 16; ++l) {
    double du = res.u[l] - 0.5;
    dist2 += gr.cell_length(l) * du * du;
  }
  g.check(std::sqrt(dist2) <= 1e-3, fmt("|u - 1/2| = %.2e > 1e-3", std::sqrt(dist2)));
  g.check(res.e <= 1e-5, fmt("e = %.2e > 1e-5", res.e));
}

/* ------------------------------------------------------------------ c6 */

void c6(Gate& g) {
  auto gr = TemporalGrid::uniform(1.0, 10);
  FemOperators fem(16, default_psi);
  for (int i = 0; i < 5; ++i) {
    int sigma = 1 + i % 2;
    auto inst = generate_instance(2 + i % 2, 21 + i);
    auto y_master = inst.y_d(fem);
    auto y_d = restrict_averaging(y_master, gr);
    SharedModel model;
    model.fem = &fem;
    model.constraint = SwitchingConstraint::max_switchings(sigma);
    model.y_d_master = &y_master;
    BnBNode node{.grid = gr};
    OuterParams par;
    par.admm.max_iter = 30000;
    auto out = solve_node(node, model, y_d, 1e30, par);
    g.check(out.status != NodeStatus::Infeasible, fmt("seed %d: root infeasible", 21 + i));

    double jmin = std::numeric_limits<double>::infinity();
    for (unsigned m = 0; m < (1u << 10); ++m) {
      std::vector<double> w(10);
      for (int l = 0; l < 10; ++l) w[l] = (m >> l) & 1u;
      if (total_variation(w, model.constraint.count_initial) > sigma) continue;
      PiecewiseConstantFn u(gr, w);
      auto y = solve_state(u, Eigen::VectorXd::Zero(fem.interior()), fem);
      jmin = std::min(jmin, objective(y, u, y_d, model.alpha, fem));
    }
    if (out.dual_mesh > jmin + 1e-6)
      g.fail(fmt("seed %d: dual bound %.12g above discrete optimum %.12g", 21 + i, out.dual_mesh,
                 jmin));
  }
}

/* ------------------------------------------------------------------ c7/c9 shared */

std::vector<DwrEstimate> g_dwr_log;
bool g_c7_ran = false;

void c7(Gate& g) {
  auto inst = generate_instance(3, 11);
  FemOperators fem(64, default_psi);
  auto y_master = inst.y_d(fem);
  SharedModel model;
  model.fem = &fem;
  model.constraint = SwitchingConstraint::max_switchings(1);
  model.y_d_master = &y_master;
  BnBParams par;
  par.tol = 0.02;
  par.root_cells = 20;
  par.max_refine = 8;
  par.threads = 1;

  std::optional<TemporalGrid> finest;
  g_dwr_log.clear();
  auto res = run(model, par, [&](const BnBNode& n, const NodeOutcome& out) {
    if (!finest || n.grid.cells() > finest->cells()) finest = n.grid;
    if (out.status != NodeStatus::Infeasible) g_dwr_log.push_back(out.dwr);
  });
  g_c7_ran = true;

  g.check(res.stats.subs <= 200, fmt("%ld subproblems > 200", res.stats.subs));
  g.check(res.incumbent.has_value(), "no incumbent found");
  if (!res.incumbent || !finest) return;

  // brute force over the sigma = 1 family on the finest grid reached:
  // the zero control and every single step up at a grid node
  const auto& gf = *finest;
  auto y_df = restrict_averaging(y_master, gf);
  double jmin = std::numeric_limits<double>::infinity();
  for (int k = -1; k < gf.cells(); ++k) {
    std::vector<double> w(gf.cells(), 0.0);
    if (k >= 0)
      for (int l = k; l < gf.cells(); ++l) w[l] = 1.0;
    PiecewiseConstantFn u(gf, w);
    auto y = solve_state(u, Eigen::VectorXd::Zero(fem.interior()), fem);
    jmin = std::min(jmin, objective(y, u, y_df, model.alpha, fem));
  }
  g.check(res.stats.obj <= 1.02 * jmin + 1e-12,
          fmt("objective %.12g above 1.02 x %.12g on the %d-cell grid", res.stats.obj, jmin,
              gf.cells()));
}

/* ------------------------------------------------------------------ c8 */

void c8(Gate& g) {
  std::mt19937 rng(1234);
  std::uniform_real_distribution<double> d01(0.0, 1.0);
  for (int N : {4, 8, 16}) {
    const double dt = 1.0 / N;
    const int sigma = N - 1;  // alternating fixings force one switch per gap
    auto sample = [&] {
      std::vector<double> sw(N - 1);
      for (int i = 0; i < N - 1; ++i) sw[i] = i * dt + (0.05 + 0.9 * d01(rng)) * dt;
      return sw;
    };
    auto fn = [&](const std::vector<double>& sw) {
      std::vector<double> nodes{0.0};
      for (double t : sw) nodes.push_back(t);
      nodes.push_back(1.0);
      TemporalGrid gr(nodes);
      std::vector<double> vals(gr.cells());
      for (int l = 0; l < gr.cells(); ++l) vals[l] = l % 2;
      return PiecewiseConstantFn(gr, std::move(vals));
    };
    for (int pair = 0; pair < 200; ++pair) {
      auto a = fn(sample()), b = fn(sample());
      double dist = l2_distance(a, b);
      double bound = (sigma + 2) * dt;
      if (dist * dist > bound + 1e-12) {
        g.fail(fmt("N=%d pair %d: squared distance %.12g above (sigma+2) dt = %.12g", N, pair,
                   dist * dist, bound));
      }
    }
  }
}

/* ------------------------------------------------------------------ c9 */

void c9(Gate& g) {
  g.check(g_c7_ran && !g_dwr_log.empty(), "no estimates captured from the end-to-end run");
  for (const auto& est : g_dwr_log) {
    double sum = std::accumulate(est.eta_cell.begin(), est.eta_cell.end(), 0.0);
    if (std::abs(sum - est.eta_total) > 1e-10 * (std::abs(est.eta_total) + 1e-30)) {
      g.fail(fmt("cell sum %.17g disagrees with total %.17g", sum, est.eta_total));
      break;
    }
  }

  // zero data, fully fixed-off control: both estimates exactly zero
  {
    FemOperators fem(16, default_psi);
    auto gr = TemporalGrid::uniform(1.0, 6);
    SpaceTimeField y_d(gr, fem.interior());
    NodeProblem pb;
    pb.grid = &gr;
    pb.fem = &fem;
    pb.y_d = &y_d;
    pb.cell_bits.assign(6, 0);
    AdmmParams par;
    auto res = admm_solve(pb, par);
    auto est = estimate_eta(pb, res);
    g.check(est.eta_total == 0.0, fmt("zero instance: eta_total = %.3g", est.eta_total));
    for (double e : est.eta_cell)
      if (e != 0.0) g.fail("zero instance: nonzero eta cell");
    auto u = PiecewiseConstantFn::constant(gr, 0.0);
    double nu = estimate_nu(u, *res.state, y_d, fem);
    g.check(nu == 0.0, fmt("zero instance: nu = %.3g", nu));
  }

  // state evaluation estimate vs the true refinement error of the objective
  {
    FemOperators fem(32, default_psi);
    auto gref = TemporalGrid::uniform(1.0, 512);
    auto gw = TemporalGrid::uniform(1.0, 32);
    SpaceTimeField y_d(gw, fem.interior());
    SpaceTimeField y_dr(gref, fem.interior());
    const Eigen::VectorXd y0 = Eigen::VectorXd::Zero(fem.interior());
    std::vector<std::vector<int>> switches{{8}, {16}, {6, 18}, {10, 20}, {4, 14, 24}};
    for (const auto& sw : switches) {
      std::vector<double> uv(32, 0.0);
      int bit = 0;
      size_t j = 0;
      for (int l = 0; l < 32; ++l) {
        if (j < sw.size() && l == sw[j]) {
          bit = 1 - bit;
          ++j;
        }
        uv[l] = bit;
      }
      PiecewiseConstantFn u(gw, uv);
      auto y = solve_state(u, y0, fem);
      double nu = estimate_nu(u, y, y_d, fem);
      PiecewiseConstantFn ur = u.on_refinement(gref);
      auto yr = solve_state(ur, y0, fem);
      double truth = objective(yr, ur, y_dr, 0.0, fem) - objective(y, u, y_d, 0.0, fem);
      if (std::abs(truth) <= 0) {
        g.fail("degenerate reference for the effectivity check");
        continue;
      }
      double eff = nu / truth;
      if (eff < 0.5 || eff > 2.0)
        g.fail(fmt("effectivity %.3f outside [0.5, 2]", eff));
    }
  }
}

/* ------------------------------------------------------------------ c10 */

void c10(Gate& g) {
  struct Case {
    double pb, mesh, indep;
    Decision want;
  };
  const Case cases[] = {
      {10.0, 9.0, 11.0, Decision::Prune},
      {10.0, 9.0, 10.0, Decision::Continue},  // equality never prunes
      {8.0, 9.0, 7.0, Decision::Refine},
      {9.0, 9.0, 8.0, Decision::Continue},  // equality never refines
      {10.0, 10.5, 10.2, Decision::Prune},  // prune outranks refine
      {10.0, 11.0, 9.0, Decision::Refine},
      {5.0, 4.0, 4.5, Decision::Continue},
  };
  for (const auto& c : cases) {
    auto got = decide(c.pb, c.mesh, c.indep);
    if (got != c.want)
      g.fail(fmt("decide(%g, %g, %g) = %d, expected %d", c.pb, c.mesh, c.indep,
                 static_cast<int>(got), static_cast<int>(c.want)));
  }
}

}  // namespace

int main() {
  struct Entry {
    int n;
    double budget;
    void (*body)(Gate&);
  };
  const Entry entries[] = {
      {1, 10.0, c1},  {2, 5.0, c2},   {3, 60.0, c3},  {4, 120.0, c4}, {5, 30.0, c5},
      {6, 300.0, c6}, {7, 900.0, c7}, {8, 10.0, c8},  {9, 120.0, c9}, {10, 10.0, c10},
  };
  int failures = 0;
  for (const auto& e : entries) {
    Gate g;
    auto t0 = std::chrono::steady_clock::now();
    try {
      e.body(g);
    } catch (const std::exception& ex) {
      g.fail(std::string("exception: ") + ex.what());
    }
    double sec = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (g.ok && sec >= e.budget) g.fail(fmt("runtime %.1fs over the %.0fs budget", sec, e.budget));
    bool pass = g.ok;
    std::printf("criterion %2d: %s  (%.1fs)%s%s\n", e.n, pass ? "PASS" : "FAIL", sec,
                pass ? "" : "  ", pass ? "" : g.why.c_str());
    std::fflush(stdout);
    failures += pass ? 0 : 1;
  }
  return failures == 0 ? 0 : 1;
}
