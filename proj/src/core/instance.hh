#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "core/heat.hh"

namespace swb {

/* Tracking problem: a hidden binary control u_d with theta jumps on a fine
 * uniform grid, y_d its state response. Files store only the jump nodes, the
 * target is recomputed on load. */
struct Instance {
  int theta = 0;
  std::uint64_t seed = 0;
  double horizon = 1.0;
  int gen_cells = 320;
  std::vector<int> jumps;  // interior node indices, ascending

  TemporalGrid grid() const { return TemporalGrid::uniform(horizon, gen_cells); }
  PiecewiseConstantFn u_d() const;
  SpaceTimeField y_d(const FemOperators& fem) const;
};

Instance generate_instance(int theta, std::uint64_t seed, int gen_cells = 320,
                           double horizon = 1.0);

void save_instance(const Instance& inst, const std::string& path);
Instance load_instance(const std::string& path);

}  // namespace swb
