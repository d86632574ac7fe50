#include "core/admm.hh"

#include <Eigen/Cholesky>
#include <algorithm>
#include <stdexcept>

namespace swb {

std::vector<double> resolve_cut(const CuttingPlane& cut, const TemporalGrid& g) {
  std::vector<double> row(g.cells(), 0.0);
  for (int l = 0; l < g.cells(); ++l) {
    double x = g.cell_left(l), y = g.cell_right(l);
    double s = 0;
    for (int i = 0; i < cut.partition.size(); ++i)
      s += cut.a[i] * cut.partition.overlap(i, x, y) / cut.partition.length(i);
    row[l] = s;
  }
  return row;
}

std::vector<int> NodeProblem::free_index() const {
  std::vector<int> idx;
  for (int l = 0; l < static_cast<int>(cell_bits.size()); ++l)
    if (cell_bits[l] < 0) idx.push_back(l);
  return idx;
}

std::vector<double> NodeProblem::full_control(std::span<const double> u_free) const {
  std::vector<double> u(cell_bits.size());
  size_t j = 0;
  for (size_t l = 0; l < cell_bits.size(); ++l)
    u[l] = cell_bits[l] >= 0 ? cell_bits[l] : u_free[j++];
  return u;
}

namespace {

struct FreeOps {
  const NodeProblem& pb;
  const std::vector<int>& idx;  // free cell indices
  std::vector<double> sl;       // their lengths
  int k;                        // number of cuts

  double ip(std::span<const double> a, std::span<const double> b) const {
    double s = 0;
    for (size_t i = 0; i < a.size(); ++i) s += sl[i] * a[i] * b[i];
    return s;
  }
  double nrm(std::span<const double> a) const { return std::sqrt(ip(a, a)); }

  std::vector<double> G(std::span<const double> u) const {
    std::vector<double> y(k, 0.0);
    for (int c = 0; c < k; ++c) {
      const auto& row = pb.rows[c];
      double s = 0;
      for (size_t i = 0; i < idx.size(); ++i) s += row[idx[i]] * u[i];
      y[c] = s;
    }
    return y;
  }
  std::vector<double> Gstar(std::span<const double> y) const {
    std::vector<double> u(idx.size(), 0.0);
    for (int c = 0; c < k; ++c)
      for (size_t i = 0; i < idx.size(); ++i) u[i] += y[c] * pb.rows[c][idx[i]] / sl[i];
    return u;
  }
};

}  // namespace

AdmmWarmStart warm_start_from(const AdmmResult& r) {
  return AdmmWarmStart{r.u, r.w, r.mu, r.v, r.lambda};
}

AdmmWarmStart warm_start_extend(const AdmmWarmStart& ws, const NodeProblem& pb) {
  AdmmWarmStart out = ws;
  const auto& row = pb.rows.back();
  double fixed = 0;
  for (size_t l = 0; l < pb.cell_bits.size(); ++l)
    if (pb.cell_bits[l] >= 0) fixed += row[l] * pb.cell_bits[l];
  out.v.push_back(pb.rhs.back() - fixed);
  out.lambda.push_back(0.0);
  return out;
}

AdmmWarmStart warm_start_refined(const AdmmWarmStart& ws, const std::vector<int>& cell_map) {
  AdmmWarmStart out;
  out.v = ws.v;
  out.lambda = ws.lambda;
  auto dup = [&](const std::vector<double>& src) {
    std::vector<double> d(cell_map.size());
    for (size_t l = 0; l < cell_map.size(); ++l) d[l] = src[cell_map[l]];
    return d;
  };
  out.u = dup(ws.u);
  out.w = dup(ws.w);
  out.mu = dup(ws.mu);
  return out;
}

AdmmResult admm_solve(const NodeProblem& pb, const AdmmParams& par, const AdmmWarmStart* warm) {
  const TemporalGrid& g = *pb.grid;
  const FemOperators& fem = *pb.fem;
  const int L = g.cells();
  const int k = static_cast<int>(pb.rows.size());
  if (static_cast<int>(pb.cell_bits.size()) != L) throw std::invalid_argument("cell bits size");
  const auto idx = pb.free_index();
  const int nI = static_cast<int>(idx.size());
  const double c = pb.alpha + par.beta;
  const double T = g.horizon();

  FreeOps ops{pb, idx, {}, k};
  ops.sl.resize(nI);
  for (int i = 0; i < nI; ++i) ops.sl[i] = g.cell_length(idx[i]);

  Eigen::VectorXd y0 = pb.y0.size() ? pb.y0 : Eigen::VectorXd::Zero(fem.interior());

  // response of the fixed part (initial state included), computed once
  std::vector<double> u_fix(L, 0.0);
  for (int l = 0; l < L; ++l)
    if (pb.cell_bits[l] >= 0) u_fix[l] = pb.cell_bits[l];
  PiecewiseConstantFn fix_fn(g, u_fix);
  SpaceTimeField y_fix = solve_state(fix_fn, y0, fem);

  auto finish = [&](std::vector<double> u_free, std::vector<double> v, std::vector<double> lam,
                    std::vector<double> w_free, std::vector<double> mu_free, double e, int iters,
                    bool conv, double rp, double rd) {
    AdmmResult res;
    res.u = pb.full_control(u_free);
    res.w.assign(L, 0.0);
    res.mu.assign(L, 0.0);
    for (int i = 0; i < nI; ++i) {
      res.w[idx[i]] = w_free[i];
      res.mu[idx[i]] = mu_free[i];
    }
    res.v = std::move(v);
    res.lambda = std::move(lam);
    res.e = e;
    res.iterations = iters;
    res.converged = conv;
    res.r_p = rp;
    res.r_d = rd;
    PiecewiseConstantFn u_fn(g, res.u);
    res.state = solve_state(u_fn, y0, fem);
    res.J = objective(*res.state, u_fn, *pb.y_d, pb.alpha, fem);
    return res;
  };

  // adjusted right hand sides b - G(fixed part)
  std::vector<double> b_fix(k);
  for (int cc = 0; cc < k; ++cc) {
    double s = 0;
    for (int l = 0; l < L; ++l)
      if (pb.cell_bits[l] >= 0) s += pb.rows[cc][l] * pb.cell_bits[l];
    b_fix[cc] = pb.rhs[cc] - s;
  }

  if (nI == 0) return finish({}, b_fix, std::vector<double>(k, 0.0), {}, {}, 0.0, 0, true, 0, 0);

  // tracking data for the free part
  SpaceTimeField data(g, fem.interior());
  for (int l = 0; l < L; ++l) data.cell[l] = pb.y_d->cell[l] - y_fix.cell[l];
  SpaceTimeField adj = solve_adjoint(data, fem);
  PiecewiseConstantFn track_full = apply_psi_star(adj, fem);
  std::vector<double> track(nI);
  for (int i = 0; i < nI; ++i) track[i] = track_full.values[idx[i]];

  // Woodbury pieces for P = c I + rho G G*
  Eigen::LLT<Eigen::MatrixXd> llt;
  if (k > 0) {
    Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(k, k);
    for (int a = 0; a < k; ++a)
      for (int b = a; b < k; ++b) {
        double s = 0;
        for (int i = 0; i < nI; ++i) s += pb.rows[a][idx[i]] * pb.rows[b][idx[i]] / ops.sl[i];
        gram(a, b) = gram(b, a) = s;
      }
    gram.diagonal().array() += c / par.rho;
    llt.compute(gram);
    if (llt.info() != Eigen::Success) throw std::runtime_error("gram factorization failed");
  }
  auto pinv = [&](const std::vector<double>& r) {
    std::vector<double> z(nI);
    if (k == 0) {
      for (int i = 0; i < nI; ++i) z[i] = r[i] / c;
      return z;
    }
    auto gr = ops.G(r);
    Eigen::VectorXd t = Eigen::Map<const Eigen::VectorXd>(gr.data(), k);
    Eigen::VectorXd sol = llt.solve(t);
    std::vector<double> gs(sol.data(), sol.data() + k);
    auto back = ops.Gstar(gs);
    for (int i = 0; i < nI; ++i) z[i] = (r[i] - back[i]) / c;
    return z;
  };

  // (Psi* Sigma* Sigma Psi + c I + rho G* G) on the free region
  auto apply = [&](const std::vector<double>& u) {
    std::vector<double> out(nI);
    std::vector<double> uz(L, 0.0);
    for (int i = 0; i < nI; ++i) uz[idx[i]] = u[i];
    PiecewiseConstantFn uf(g, std::move(uz));
    SpaceTimeField y = solve_state(uf, Eigen::VectorXd::Zero(fem.interior()), fem);
    SpaceTimeField q = solve_adjoint(y, fem);
    PiecewiseConstantFn pq = apply_psi_star(q, fem);
    auto gg = ops.Gstar(ops.G(u));
    for (int i = 0; i < nI; ++i) out[i] = pq.values[idx[i]] + c * u[i] + par.rho * gg[i];
    return out;
  };

  auto pcg = [&](const std::vector<double>& rhs, std::vector<double> x) {
    auto ax = apply(x);
    std::vector<double> r(nI);
    for (int i = 0; i < nI; ++i) r[i] = rhs[i] - ax[i];
    auto z = pinv(r);
    double n0 = ops.nrm(z);
    if (n0 <= 1e-300) return x;
    auto p = z;
    double rz = ops.ip(r, z);
    const int cap = 5 * nI + 50;
    for (int it = 0; it < cap; ++it) {
      auto ap = apply(p);
      double pap = ops.ip(p, ap);
      if (pap <= 0) break;
      double a = rz / pap;
      for (int i = 0; i < nI; ++i) {
        x[i] += a * p[i];
        r[i] -= a * ap[i];
      }
      z = pinv(r);
      if (ops.nrm(z) <= par.cg_tol * n0) break;
      double rz2 = ops.ip(r, z);
      double bt = rz2 / rz;
      rz = rz2;
      for (int i = 0; i < nI; ++i) p[i] = z[i] + bt * p[i];
    }
    return x;
  };

  // initial iterates
  std::vector<double> u(nI, 0.5), w(nI, 0.5), mu(nI, 0.0);
  std::vector<double> v = b_fix, lam(k, 0.0);
  if (warm) {
    if (static_cast<int>(warm->u.size()) != L || static_cast<int>(warm->v.size()) != k)
      throw std::invalid_argument("warm start shape mismatch");
    for (int i = 0; i < nI; ++i) {
      u[i] = warm->u[idx[i]];
      w[i] = warm->w[idx[i]];
      mu[i] = warm->mu[idx[i]];
    }
    v = warm->v;
    lam = warm->lambda;
  }

  double e = 0, rp_n = 0, rd_n = 0;
  int m = 0;
  bool conv = false;
  for (; m < par.max_iter; ++m) {
    std::vector<double> rhs(nI);
    auto gl = ops.Gstar([&] {
      std::vector<double> t(k);
      for (int cc = 0; cc < k; ++cc) t[cc] = lam[cc] - par.rho * v[cc];
      return t;
    }());
    for (int i = 0; i < nI; ++i)
      rhs[i] = track[i] + 0.5 * pb.alpha - mu[i] + par.beta * w[i] - gl[i];
    u = pcg(rhs, u);

    auto gu = ops.G(u);
    std::vector<double> v_new(k), w_new(nI);
    for (int cc = 0; cc < k; ++cc) v_new[cc] = std::min(gu[cc] + lam[cc] / par.rho, b_fix[cc]);
    for (int i = 0; i < nI; ++i) w_new[i] = std::clamp(u[i] + mu[i] / par.beta, 0.0, 1.0);
    for (int cc = 0; cc < k; ++cc) lam[cc] += par.rho * (gu[cc] - v_new[cc]);
    for (int i = 0; i < nI; ++i) mu[i] += par.beta * (u[i] - w_new[i]);

    // residuals and the sub-optimality certificate at the new iterates
    std::vector<double> dv(k), rd(nI);
    for (int cc = 0; cc < k; ++cc) dv[cc] = v[cc] - v_new[cc];
    auto gdv = ops.Gstar(dv);
    for (int i = 0; i < nI; ++i) rd[i] = par.rho * gdv[i] + par.beta * (w[i] - w_new[i]);
    double rp2 = 0, rp_pair = 0;
    for (int cc = 0; cc < k; ++cc) {
      double r1 = gu[cc] - v_new[cc];
      rp2 += r1 * r1;
      rp_pair += r1 * lam[cc];
    }
    for (int i = 0; i < nI; ++i) {
      double r2 = u[i] - w_new[i];
      rp2 += ops.sl[i] * r2 * r2;
      rp_pair += ops.sl[i] * r2 * mu[i];
    }
    rp_n = std::sqrt(rp2);
    rd_n = ops.nrm(rd);
    e = -rp_pair + std::sqrt(T) * rd_n;
    if (par.trace) par.trace->push_back(std::max(rp_n, rd_n));

    v = std::move(v_new);
    w = std::move(w_new);

    double gu_n = 0, v_n = 0;
    for (int cc = 0; cc < k; ++cc) {
      gu_n += gu[cc] * gu[cc];
      v_n += v[cc] * v[cc];
    }
    auto gsl = ops.Gstar(lam);
    std::vector<double> dual_ref(nI);
    for (int i = 0; i < nI; ++i) dual_ref[i] = gsl[i] + mu[i];
    double eps_p = (std::sqrt(static_cast<double>(k)) + 1.0) * par.eps_abs +
                   par.eps_rel * std::max(std::sqrt(gu_n) + ops.nrm(u), std::sqrt(v_n) + ops.nrm(w));
    double eps_d = par.eps_abs + par.eps_rel * ops.nrm(dual_ref);
    if (rp_n <= eps_p && rd_n <= eps_d && e <= par.eps_pr) {
      ++m;
      conv = true;
      break;
    }
  }

  return finish(u, v, lam, w, mu, e, m, conv, rp_n, rd_n);
}

}  // namespace swb
