#pragma once

#include <span>
#include <vector>

#include "core/admm.hh"

namespace swb {

struct DwrEstimate {
  double eta_total = 0;
  std::vector<double> eta_cell;
  bool degraded = false;  // alpha = 0, projection-based terms unavailable
};

/* Cell-split weighted-residual estimate of the temporal discretization error
   J(y,u) - J(y_rho,u_rho) of the relaxed subproblem, linear interpolants as
   the higher order reconstruction. Control and multiplier terms live on the
   free region only. */
DwrEstimate estimate_eta(const NodeProblem& pb, const AdmmResult& res);

/* Smallest descending-|eta| prefix whose share exceeds gamma, as cell indices. */
std::vector<int> select_refinement(std::span<const double> eta_cell, double gamma,
                                   const TemporalGrid& g);

/* Estimate of J(S_sh u, u) - J(S u, u) for a fixed control, the objective
   change under temporal refinement: weighted residual of the state equation
   against the interpolation error of the adjoint of y. */
double estimate_nu(const PiecewiseConstantFn& u, const SpaceTimeField& y,
                   const SpaceTimeField& y_d, const FemOperators& fem);

}  // namespace swb
