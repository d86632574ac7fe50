#include "core/dwr.hh"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace swb {

namespace {

// integral over [0,s] of clamp(f, lo, hi) for linear f running from fa to fb
double int_clamped(double fa, double fb, double s, double lo, double hi) {
  if (s <= 0) return 0;
  auto cl = [&](double v) { return std::clamp(v, lo, hi); };
  if (fa == fb) return s * cl(fa);
  double slope = (fb - fa) / s;
  double xs[4] = {0, s};
  int n = 2;
  for (double b : {lo, hi}) {
    if (!std::isfinite(b)) continue;
    double x = (b - fa) / slope;
    if (x > 0 && x < s) xs[n++] = x;
  }
  std::sort(xs, xs + n);
  double acc = 0;
  for (int i = 0; i + 1 < n; ++i) {
    double f0 = cl(fa + slope * xs[i]), f1 = cl(fa + slope * xs[i + 1]);
    acc += (xs[i + 1] - xs[i]) * 0.5 * (f0 + f1);
  }
  return acc;
}

double int_pos(double fa, double fb, double s) {
  return int_clamped(fa, fb, s, 0.0, std::numeric_limits<double>::infinity());
}

}  // namespace

DwrEstimate estimate_eta(const NodeProblem& pb, const AdmmResult& res) {
  const TemporalGrid& g = *pb.grid;
  const FemOperators& fem = *pb.fem;
  const int L = g.cells();
  const int k = static_cast<int>(pb.rows.size());
  const double alpha = pb.alpha;
  const SpaceTimeField& y = *res.state;
  SpaceTimeField p = solve_adjoint(field_difference(y, *pb.y_d), fem);
  PiecewiseConstantFn pp = apply_psi_star(p, fem);

  DwrEstimate out;
  out.eta_cell.assign(L, 0.0);
  out.degraded = alpha <= 0;
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(fem.interior());
  for (int l = 0; l < L; ++l) {
    const double sl = g.cell_length(l);
    const double ul = res.u[l];
    const Eigen::VectorXd& yl = y.cell[l];
    const Eigen::VectorXd& ylm = l > 0 ? y.cell[l - 1] : y.initial;
    const Eigen::VectorXd& plv = p.cell[l];
    const Eigen::VectorXd& plp = l + 1 < L ? p.cell[l + 1] : zero;

    Eigen::VectorXd dy = ylm - yl;
    Eigen::VectorXd dp = plp - plv;
    Eigen::VectorXd diff = yl - pb.y_d->cell[l];
    double t1 = 0.5 * sl * (diff.dot(fem.mass_apply(dy)) - dy.dot(fem.stiffness().apply(plv)));
    double t2 = 0.5 * sl * (ul * fem.psi().dot(dp) - yl.dot(fem.stiffness().apply(dp)));

    double t3 = 0, t4 = 0, t5 = 0, t6 = 0, t7 = 0;
    if (pb.cell_bits[l] < 0) {
      double gl = 0;
      for (int c = 0; c < k; ++c) gl += res.lambda[c] * pb.rows[c][l] / sl;
      double qa = pp.values[l] + gl;
      double qb = (l + 1 < L ? pp.values[l + 1] : 0.0) + gl;
      double mup = std::max(res.mu[l], 0.0), mum = std::max(-res.mu[l], 0.0);
      double int_u;
      if (alpha > 0) {
        int_u = int_clamped(-qa / alpha + 0.5, -qb / alpha + 0.5, sl, 0.0, 1.0);
        double W = alpha * (ul - 0.5) + pp.values[l] + mup - mum + gl;
        t3 = W * (int_u - sl * ul);
      } else {
        int_u = sl * ul;
      }
      double imp = int_pos(-0.5 * alpha - qa, -0.5 * alpha - qb, sl);
      double imm = int_pos(qa - 0.5 * alpha, qb - 0.5 * alpha, sl);
      t4 = mup * (sl - int_u);
      t5 = mum * int_u;
      t6 = (ul - 1.0) * (imp - mup * sl);
      t7 = -ul * (imm - mum * sl);
    }
    out.eta_cell[l] = 0.5 * (t1 + t2 + t3 + t4 + t5 + t6 + t7);
  }
  out.eta_total = std::accumulate(out.eta_cell.begin(), out.eta_cell.end(), 0.0);
  return out;
}

std::vector<int> select_refinement(std::span<const double> eta_cell, double gamma,
                                   const TemporalGrid& g) {
  const int L = static_cast<int>(eta_cell.size());
  double tot = 0;
  for (double e : eta_cell) tot += std::abs(e);
  if (tot <= 0) {
    int lmax = 0;
    for (int l = 1; l < L; ++l)
      if (g.cell_length(l) > g.cell_length(lmax)) lmax = l;
    return {lmax};  // no usable indicator, still make progress
  }
  std::vector<int> ord(L);
  std::iota(ord.begin(), ord.end(), 0);
  std::stable_sort(ord.begin(), ord.end(),
                   [&](int a, int b) { return std::abs(eta_cell[a]) > std::abs(eta_cell[b]); });
  std::vector<int> out;
  double acc = 0;
  for (int i : ord) {
    out.push_back(i);
    acc += std::abs(eta_cell[i]);
    if (acc > gamma * tot) break;
  }
  std::sort(out.begin(), out.end());
  return out;
}

double estimate_nu(const PiecewiseConstantFn& u, const SpaceTimeField& y,
                   const SpaceTimeField& y_d, const FemOperators& fem) {
  const TemporalGrid& g = u.grid;
  const int L = g.cells();
  SpaceTimeField p = solve_adjoint(field_difference(y, y_d), fem);
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(fem.interior());
  double nu = 0;
  for (int l = 0; l < L; ++l) {
    const Eigen::VectorXd& plp = l + 1 < L ? p.cell[l + 1] : zero;
    Eigen::VectorXd dp = plp - p.cell[l];
    nu += 0.5 * g.cell_length(l) *
          (u.values[l] * fem.psi().dot(dp) - y.cell[l].dot(fem.stiffness().apply(dp)));
  }
  return nu;
}

}  // namespace swb
