#include "core/heat.hh"

#include <cmath>
#include <map>
#include <stdexcept>

namespace swb {

Eigen::VectorXd TriDiag::apply(const Eigen::VectorXd& x) const {
  int n = static_cast<int>(diag.size());
  Eigen::VectorXd y(n);
  for (int i = 0; i < n; ++i) {
    double v = diag[i] * x[i];
    if (i > 0) v += off[i - 1] * x[i - 1];
    if (i + 1 < n) v += off[i] * x[i + 1];
    y[i] = v;
  }
  return y;
}

TriDiagFactor TriDiagFactor::factor(const TriDiag& m) {
  int n = static_cast<int>(m.diag.size());
  TriDiagFactor f;
  f.d = m.diag;
  f.u = m.off;
  f.l.resize(std::max(0, n - 1));
  for (int i = 0; i + 1 < n; ++i) {
    f.l[i] = m.off[i] / f.d[i];
    f.d[i + 1] -= f.l[i] * m.off[i];
  }
  return f;
}

Eigen::VectorXd TriDiagFactor::solve(const Eigen::VectorXd& rhs) const {
  int n = static_cast<int>(d.size());
  Eigen::VectorXd x = rhs;
  for (int i = 1; i < n; ++i) x[i] -= l[i - 1] * x[i - 1];
  x[n - 1] /= d[n - 1];
  for (int i = n - 2; i >= 0; --i) x[i] = (x[i] - u[i] * x[i + 1]) / d[i];
  return x;
}

FemOperators::FemOperators(int space_cells, const std::function<double(double)>& psi) {
  if (space_cells < 2) throw std::invalid_argument("need at least two space cells");
  cells_ = space_cells;
  int n = space_cells - 1;
  double hh = 1.0 / space_cells;
  mass_.diag = Eigen::VectorXd::Constant(n, 2.0 * hh / 3.0);
  mass_.off = Eigen::VectorXd::Constant(n - 1, hh / 6.0);
  stiff_.diag = Eigen::VectorXd::Constant(n, 2.0 / hh);
  stiff_.off = Eigen::VectorXd::Constant(n - 1, -1.0 / hh);
  psi_ = load_vector(psi);
}

FemOperators FemOperators::with_matrices(TriDiag mass, TriDiag stiffness, Eigen::VectorXd psi_load) {
  FemOperators f;
  f.cells_ = static_cast<int>(psi_load.size()) + 1;
  f.mass_ = std::move(mass);
  f.stiff_ = std::move(stiffness);
  f.psi_ = std::move(psi_load);
  return f;
}

TriDiag FemOperators::shifted(double s) const {
  TriDiag t;
  t.diag = mass_.diag + s * stiff_.diag;
  t.off = mass_.off + s * stiff_.off;
  return t;
}

Eigen::VectorXd FemOperators::load_vector(const std::function<double(double)>& f) const {
  int n = cells_ - 1;
  double hh = 1.0 / cells_;
  Eigen::VectorXd b = Eigen::VectorXd::Zero(n);
  const double gp = 0.5 / std::sqrt(3.0);
  for (int k = 0; k < cells_; ++k) {
    double xl = k * hh;
    for (double xi : {0.5 - gp, 0.5 + gp}) {
      double x = xl + xi * hh;
      double w = 0.5 * hh;
      double phi_r = xi;  // hat of right node on this cell
      double phi_l = 1.0 - xi;
      if (k >= 1) b[k - 1] += w * f(x) * phi_l;
      if (k + 1 <= n) b[k] += w * f(x) * phi_r;
    }
  }
  return b;
}

Eigen::VectorXd FemOperators::l2_project(const std::function<double(double)>& f) const {
  return TriDiagFactor::factor(mass_).solve(load_vector(f));
}

double default_psi(double x) { return std::exp(x) * std::sin(M_PI * x) + 0.5; }

SpaceTimeField::SpaceTimeField(TemporalGrid g, int interior) : grid(std::move(g)) {
  cell.assign(grid.cells(), Eigen::VectorXd::Zero(interior));
}

double SpaceTimeField::l2q_norm2(const FemOperators& fem) const {
  double s = 0;
  for (int l = 0; l < grid.cells(); ++l) s += grid.cell_length(l) * fem.mass_norm2(cell[l]);
  return s;
}

namespace {

// factorizations of M + s A, grouped by distinct cell length within one sweep
class ShiftCache {
public:
  explicit ShiftCache(const FemOperators& fem) : fem_(fem) {}
  const TriDiagFactor& at(double s) {
    auto it = cache_.find(s);
    if (it == cache_.end()) it = cache_.emplace(s, TriDiagFactor::factor(fem_.shifted(s))).first;
    return it->second;
  }

private:
  const FemOperators& fem_;
  std::map<double, TriDiagFactor> cache_;
};

}  // namespace

SpaceTimeField solve_state(const PiecewiseConstantFn& u, const Eigen::VectorXd& y0,
                           const FemOperators& fem) {
  SpaceTimeField y(u.grid, fem.interior());
  y.initial = y0.size() ? y0 : Eigen::VectorXd::Zero(fem.interior());
  ShiftCache lu(fem);
  Eigen::VectorXd prev = y.initial;
  for (int l = 0; l < u.grid.cells(); ++l) {
    double s = u.grid.cell_length(l);
    Eigen::VectorXd rhs = fem.mass_apply(prev) + (s * u.values[l]) * fem.psi();
    y.cell[l] = lu.at(s).solve(rhs);
    prev = y.cell[l];
  }
  return y;
}

SpaceTimeField solve_adjoint(const SpaceTimeField& r, const FemOperators& fem) {
  SpaceTimeField p(r.grid, fem.interior());
  ShiftCache lu(fem);
  Eigen::VectorXd next = Eigen::VectorXd::Zero(fem.interior());
  for (int l = r.grid.cells() - 1; l >= 0; --l) {
    double s = r.grid.cell_length(l);
    Eigen::VectorXd rhs = fem.mass_apply(next) + s * fem.mass_apply(r.cell[l]);
    p.cell[l] = lu.at(s).solve(rhs);
    next = p.cell[l];
  }
  return p;
}

PiecewiseConstantFn apply_psi_star(const SpaceTimeField& p, const FemOperators& fem) {
  std::vector<double> v(p.grid.cells());
  for (int l = 0; l < p.grid.cells(); ++l) v[l] = fem.psi().dot(p.cell[l]);
  return PiecewiseConstantFn(p.grid, std::move(v));
}

SpaceTimeField field_difference(const SpaceTimeField& a, const SpaceTimeField& b) {
  if (!(a.grid == b.grid)) throw std::invalid_argument("field difference: grid mismatch");
  SpaceTimeField d(a.grid, static_cast<int>(a.cell[0].size()));
  for (size_t l = 0; l < a.cell.size(); ++l) d.cell[l] = a.cell[l] - b.cell[l];
  return d;
}

double objective(const SpaceTimeField& y, const PiecewiseConstantFn& u, const SpaceTimeField& y_d,
                 double alpha, const FemOperators& fem) {
  if (!(y.grid == u.grid) || !(y.grid == y_d.grid))
    throw std::invalid_argument("objective: grid mismatch");
  double track = 0, reg = 0;
  for (int l = 0; l < y.grid.cells(); ++l) {
    double s = y.grid.cell_length(l);
    track += s * fem.mass_norm2(y.cell[l] - y_d.cell[l]);
    double du = u.values[l] - 0.5;
    reg += s * du * du;
  }
  return 0.5 * track + 0.5 * alpha * reg;
}

SpaceTimeField restrict_averaging(const SpaceTimeField& src, const TemporalGrid& dst) {
  int n = static_cast<int>(src.cell.empty() ? 0 : src.cell[0].size());
  SpaceTimeField out(dst, n);
  for (int l = 0; l < dst.cells(); ++l) {
    double a = dst.cell_left(l), b = dst.cell_right(l);
    Eigen::VectorXd acc = Eigen::VectorXd::Zero(n);
    for (int k = 0; k < src.grid.cells(); ++k) {
      double ov = std::max(0.0, std::min(src.grid.cell_right(k), b) - std::max(src.grid.cell_left(k), a));
      if (ov > 0) acc += ov * src.cell[k];
    }
    out.cell[l] = acc / (b - a);
  }
  return out;
}

}  // namespace swb
