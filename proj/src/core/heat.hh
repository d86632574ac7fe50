#pragma once

#include <Eigen/Dense>
#include <functional>

#include "core/timegrid.hh"

namespace swb {

/* Symmetric tridiagonal matrix on the interior nodes, with LU solve. */
struct TriDiag {
  Eigen::VectorXd diag, off;  // off[i] couples i and i+1

  Eigen::VectorXd apply(const Eigen::VectorXd& x) const;
};

struct TriDiagFactor {
  Eigen::VectorXd d, l, u;  // LU of a tridiagonal matrix, no pivoting

  static TriDiagFactor factor(const TriDiag& m);
  Eigen::VectorXd solve(const Eigen::VectorXd& rhs) const;
};

/* P1 finite elements on an equidistant grid over (0,1), homogeneous Dirichlet.
 * Holds mass and stiffness matrices and the load vector of the form function. */
class FemOperators {
public:
  FemOperators(int space_cells, const std::function<double(double)>& psi);
  static FemOperators with_matrices(TriDiag mass, TriDiag stiffness, Eigen::VectorXd psi_load);

  int interior() const { return static_cast<int>(psi_.size()); }
  int space_cells() const { return cells_; }
  double h() const { return 1.0 / cells_; }
  const Eigen::VectorXd& psi() const { return psi_; }
  const TriDiag& mass() const { return mass_; }
  const TriDiag& stiffness() const { return stiff_; }

  Eigen::VectorXd mass_apply(const Eigen::VectorXd& x) const { return mass_.apply(x); }
  TriDiag shifted(double s) const;  // M + s A
  // L2 projection onto the P1 space, Gauss-Legendre order 3 load assembly
  Eigen::VectorXd l2_project(const std::function<double(double)>& f) const;
  Eigen::VectorXd load_vector(const std::function<double(double)>& f) const;
  double mass_norm2(const Eigen::VectorXd& x) const { return x.dot(mass_.apply(x)); }

private:
  FemOperators() = default;
  int cells_ = 0;
  TriDiag mass_, stiff_;
  Eigen::VectorXd psi_;
};

// default form function exp(x) sin(pi x) + 1/2
double default_psi(double x);

/* dG(0) field: one coefficient vector per time cell, plus the value at t = 0
 * for states (empty for adjoints and data fields). */
struct SpaceTimeField {
  TemporalGrid grid;
  std::vector<Eigen::VectorXd> cell;
  Eigen::VectorXd initial;

  SpaceTimeField(TemporalGrid g, int interior);
  double l2q_norm2(const FemOperators& fem) const;  // sum_l s_l y_l^T M y_l
};

/* Implicit Euler sweep of (M + s_l A) y_l = M y_{l-1} + s_l u_l psi_h. */
SpaceTimeField solve_state(const PiecewiseConstantFn& u, const Eigen::VectorXd& y0,
                           const FemOperators& fem);
/* Backward sweep (M + s_l A) p_l = M p_{l+1} + s_l M r_l with p after T zero. */
SpaceTimeField solve_adjoint(const SpaceTimeField& r, const FemOperators& fem);

// t -> psi_h^T p_l, cellwise
PiecewiseConstantFn apply_psi_star(const SpaceTimeField& p, const FemOperators& fem);

SpaceTimeField field_difference(const SpaceTimeField& a, const SpaceTimeField& b);

// 1/2 |y - y_d|^2_{L2(Q)} + alpha/2 |u - 1/2|^2_{L2(0,T)}
double objective(const SpaceTimeField& y, const PiecewiseConstantFn& u, const SpaceTimeField& y_d,
                 double alpha, const FemOperators& fem);

// exact cell averaging onto another temporal grid
SpaceTimeField restrict_averaging(const SpaceTimeField& src, const TemporalGrid& dst);

}  // namespace swb
