#include "core/instance.hh"

#include <algorithm>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>

namespace swb {

PiecewiseConstantFn Instance::u_d() const {
  PiecewiseConstantFn u = PiecewiseConstantFn::constant(grid(), 0.0);
  int parity = 0;
  std::size_t j = 0;
  for (int l = 0; l < gen_cells; ++l) {
    while (j < jumps.size() && jumps[j] <= l) {
      parity ^= 1;
      ++j;
    }
    u.values[l] = parity;
  }
  return u;
}

SpaceTimeField Instance::y_d(const FemOperators& fem) const {
  return solve_state(u_d(), Eigen::VectorXd::Zero(fem.interior()), fem);
}

Instance generate_instance(int theta, std::uint64_t seed, int gen_cells, double horizon) {
  int interior = gen_cells - 1;
  if (theta < 0 || theta > interior - 1)
    throw std::invalid_argument("theta out of range for the generation grid");
  Instance inst;
  inst.theta = theta;
  inst.seed = seed;
  inst.horizon = horizon;
  inst.gen_cells = gen_cells;

  std::mt19937_64 rng(seed);
  std::vector<int> pool(interior);
  for (int i = 0; i < interior; ++i) pool[i] = i + 1;
  for (int i = 0; i < theta; ++i) {
    std::uint64_t j = i + rng() % static_cast<std::uint64_t>(interior - i);
    std::swap(pool[i], pool[j]);
    inst.jumps.push_back(pool[i]);
  }
  std::sort(inst.jumps.begin(), inst.jumps.end());
  return inst;
}

void save_instance(const Instance& inst, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot open " + path + " for writing");
  f << "theta=" << inst.theta << "\n";
  f << "seed=" << inst.seed << "\n";
  f << "horizon=" << inst.horizon << "\n";
  f << "gen_cells=" << inst.gen_cells << "\n";
  f << "psi=default\n";
  f << "y0=zero\n";
  f << "jumps=";
  for (std::size_t i = 0; i < inst.jumps.size(); ++i) {
    if (i) f << ",";
    f << inst.jumps[i];
  }
  f << "\n";
}

Instance load_instance(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open " + path);
  Instance inst;
  std::string line;
  while (std::getline(f, line)) {
    if (line.empty() || line[0] == '#') continue;
    auto eq = line.find('=');
    if (eq == std::string::npos) throw std::runtime_error("malformed line: " + line);
    std::string key = line.substr(0, eq), val = line.substr(eq + 1);
    if (key == "theta")
      inst.theta = std::stoi(val);
    else if (key == "seed")
      inst.seed = std::stoull(val);
    else if (key == "horizon")
      inst.horizon = std::stod(val);
    else if (key == "gen_cells")
      inst.gen_cells = std::stoi(val);
    else if (key == "psi") {
      if (val != "default") throw std::runtime_error("unsupported psi: " + val);
    } else if (key == "y0") {
      if (val != "zero") throw std::runtime_error("unsupported y0: " + val);
    } else if (key == "jumps") {
      std::stringstream ss(val);
      std::string tok;
      while (std::getline(ss, tok, ','))
        if (!tok.empty()) inst.jumps.push_back(std::stoi(tok));
    } else {
      throw std::runtime_error("unknown key: " + key);
    }
  }
  if (static_cast<int>(inst.jumps.size()) != inst.theta)
    throw std::runtime_error("jump count disagrees with theta");
  for (int k : inst.jumps)
    if (k < 1 || k > inst.gen_cells - 1) throw std::runtime_error("jump node outside the grid");
  return inst;
}

}  // namespace swb
