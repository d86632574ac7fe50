#pragma once

#include <cmath>
#include <optional>
#include <vector>

#include "core/heat.hh"
#include "core/switchset.hh"

namespace swb {

/* Cut row resolved on a grid: coefficients of the averaged control,
   (G u)_cut = sum_l row[l] u_l with row[l] = sum_i a_i |J_l cap I_i| / |I_i|. */
std::vector<double> resolve_cut(const CuttingPlane& cut, const TemporalGrid& g);

struct NodeProblem {
  const TemporalGrid* grid = nullptr;
  const FemOperators* fem = nullptr;
  const SpaceTimeField* y_d = nullptr;
  Eigen::VectorXd y0;  // interior nodal values; size 0 means zero initial state
  double alpha = 5e-3;
  std::vector<int8_t> cell_bits;          // -1 on the free region
  std::vector<std::vector<double>> rows;  // resolved cut rows
  std::vector<double> rhs;

  std::vector<int> free_index() const;
  std::vector<double> full_control(std::span<const double> u_free) const;
};

struct AdmmParams {
  double beta = 5e-3;
  double rho = 0.5 * (1.0 + std::sqrt(5.0));
  double eps_abs = 1e-3;
  double eps_rel = 1e-3;
  double eps_pr = 1e-5;
  int max_iter = 5000;
  double cg_tol = 1e-10;
  std::vector<double>* trace = nullptr;  // per-iteration max(r_p, r_d), if set
};

/* Full-grid storage so refinement and fixing changes stay cheap; fixed cells
   carry ignored values. */
struct AdmmWarmStart {
  std::vector<double> u, w, mu;
  std::vector<double> v, lambda;
};

struct AdmmResult {
  std::vector<double> u;      // full control, bits on the fixed region
  std::vector<double> w, mu;  // full grid, zero on fixed cells
  std::vector<double> v, lambda;
  double J = 0, e = 0;
  double r_p = 0, r_d = 0;
  int iterations = 0;
  bool converged = true;
  std::optional<SpaceTimeField> state;  // S(u) on the node grid, always set
};

AdmmResult admm_solve(const NodeProblem& pb, const AdmmParams& par,
                      const AdmmWarmStart* warm = nullptr);

AdmmWarmStart warm_start_from(const AdmmResult& r);
/* pb must already hold the appended cut; the new v entry is the adjusted
   right hand side, the new multiplier starts at zero. */
AdmmWarmStart warm_start_extend(const AdmmWarmStart& ws, const NodeProblem& pb);
AdmmWarmStart warm_start_refined(const AdmmWarmStart& ws, const std::vector<int>& cell_map);

}  // namespace swb
