#include "switchbnb.h"

#include <cmath>
#include <cstdio>
#include <exception>
#include <map>
#include <string>

#include "core/bnb.hh"
#include "core/instance.hh"

namespace {

thread_local std::string g_error;

void set_error(const std::string& msg) { g_error = msg; }

template <typename F>
int guarded(F&& f) {
  try {
    f();
    return 0;
  } catch (const std::exception& e) {
    set_error(e.what());
    return 1;
  }
}

}  // namespace

struct swb_instance {
  swb::Instance inst;
};

struct swb_options {
  std::map<std::string, double> kv;
};

struct swb_result {
  swb::RunResult run;
  std::vector<double> nodes, values;  // incumbent step function, empty if none
};

extern "C" {

const char* swb_last_error(void) { return g_error.c_str(); }

swb_instance* swb_instance_generate(int theta, unsigned long long seed) {
  swb_instance* h = nullptr;
  guarded([&] { h = new swb_instance{swb::generate_instance(theta, seed)}; });
  return h;
}

swb_instance* swb_instance_load(const char* path) {
  swb_instance* h = nullptr;
  guarded([&] { h = new swb_instance{swb::load_instance(path)}; });
  return h;
}

int swb_instance_save(const swb_instance* inst, const char* path) {
  if (!inst || !path) {
    set_error("null argument");
    return 1;
  }
  return guarded([&] { swb::save_instance(inst->inst, path); });
}

int swb_instance_theta(const swb_instance* inst) { return inst ? inst->inst.theta : -1; }

unsigned long long swb_instance_seed(const swb_instance* inst) {
  return inst ? inst->inst.seed : 0;
}

void swb_instance_free(swb_instance* inst) { delete inst; }

swb_options* swb_options_create(void) { return new swb_options; }

int swb_options_set(swb_options* opt, const char* key, double value) {
  if (!opt || !key) {
    set_error("null argument");
    return 1;
  }
  static const char* known[] = {"sigma",      "dwell",  "tol",     "red",
                                "alpha",      "beta",   "gamma",   "grid_init",
                                "max_refine", "threads", "space_cells"};
  for (const char* k : known)
    if (k == std::string(key)) {
      opt->kv[key] = value;
      return 0;
    }
  set_error(std::string("unknown option: ") + key);
  return 1;
}

void swb_options_free(swb_options* opt) { delete opt; }

swb_result* swb_solve(const swb_instance* inst, const swb_options* opt) {
  if (!inst || !opt) {
    set_error("null argument");
    return nullptr;
  }
  swb_result* h = nullptr;
  int rc = guarded([&] {
    auto get = [&](const char* k, double dflt) {
      auto it = opt->kv.find(k);
      return it == opt->kv.end() ? dflt : it->second;
    };
    bool has_sigma = opt->kv.count("sigma"), has_dwell = opt->kv.count("dwell");
    if (has_sigma == has_dwell)
      throw std::invalid_argument("exactly one of sigma/dwell must be set");

    swb::FemOperators fem(static_cast<int>(get("space_cells", 64)), swb::default_psi);
    swb::SpaceTimeField y_d = inst->inst.y_d(fem);

    swb::SharedModel model;
    model.fem = &fem;
    model.constraint = has_sigma
                           ? swb::SwitchingConstraint::max_switchings(
                                 static_cast<int>(get("sigma", 1)))
                           : swb::SwitchingConstraint::min_dwell(get("dwell", 0.1));
    model.alpha = get("alpha", 5e-3);
    model.y_d_master = &y_d;

    swb::BnBParams par;
    par.tol = get("tol", 0.02);
    par.gamma = get("gamma", 0.5);
    par.root_cells = static_cast<int>(get("grid_init", 20));
    par.max_refine = static_cast<int>(get("max_refine", 8));
    par.threads = static_cast<int>(get("threads", 1));
    par.outer.red = get("red", 0.02);
    par.outer.admm.beta = get("beta", 5e-3);

    h = new swb_result{swb::run(model, par), {}, {}};
    if (h->run.incumbent) {
      const auto& u = h->run.incumbent->control;
      h->nodes = u.grid.nodes();
      h->values = u.values;
    }
  });
  if (rc && h) {
    delete h;
    h = nullptr;
  }
  return h;
}

double swb_result_stat(const swb_result* res, const char* name) {
  if (!res || !name) return std::nan("");
  const swb::RunStats& st = res->run.stats;
  std::string n(name);
  if (n == "subs") return st.subs;
  if (n == "cuts") return st.cuts;
  if (n == "admm") return st.admm;
  if (n == "fix_points") return st.fix_points;
  if (n == "fix_indices") return st.fix_indices;
  if (n == "obj") return st.obj;
  if (n == "seconds") return st.seconds;
  if (n == "refine") return st.refine;
  if (n == "ratio") return st.ratio;
  if (n == "gap") return st.gap;
  if (n == "unresolved") return st.unresolved;
  if (n == "weakened") return st.weakened;
  if (n == "feasible") return res->run.incumbent ? 1 : 0;
  return std::nan("");
}

int swb_result_control(const swb_result* res, const double** nodes, const double** values,
                       int* cells) {
  if (!res || !nodes || !values || !cells) {
    set_error("null argument");
    return 1;
  }
  if (res->values.empty()) {
    set_error("no feasible control found");
    return 1;
  }
  *nodes = res->nodes.data();
  *values = res->values.data();
  *cells = static_cast<int>(res->values.size());
  return 0;
}

int swb_result_write_control(const swb_result* res, const char* path) {
  if (!res || !path) {
    set_error("null argument");
    return 1;
  }
  if (res->values.empty()) {
    set_error("no feasible control found");
    return 1;
  }
  return guarded([&] {
    std::FILE* f = std::fopen(path, "w");
    if (!f) throw std::runtime_error(std::string("cannot open ") + path);
    for (std::size_t l = 0; l < res->values.size(); ++l)
      std::fprintf(f, "%.17g %.17g\n", res->nodes[l], res->values[l]);
    std::fprintf(f, "%.17g %.17g\n", res->nodes.back(), res->values.back());
    std::fclose(f);
  });
}

int swb_result_write_events(const swb_result* res, const char* path) {
  if (!res || !path) {
    set_error("null argument");
    return 1;
  }
  return guarded([&] {
    std::FILE* f = std::fopen(path, "w");
    if (!f) throw std::runtime_error(std::string("cannot open ") + path);
    std::fprintf(f,
                 "id,parent,depth,refine_count,cells,cuts_total,cuts_added,admm_iters,solves,"
                 "outcome,dual_mesh,dual_indep,eta,pb_at_decision,tau,fix_count\n");
    for (const auto& e : res->run.events)
      std::fprintf(f, "%ld,%ld,%d,%d,%d,%d,%d,%d,%d,%s,%.12g,%.12g,%.12g,%.12g,%.12g,%d\n", e.id,
                   e.parent, e.depth, e.refine_count, e.cells, e.cuts_total, e.cuts_added,
                   e.admm_iters, e.solves, e.outcome.c_str(), e.dual_mesh, e.dual_indep, e.eta,
                   e.pb_at_decision, e.tau, e.fix_count);
    std::fclose(f);
  });
}

void swb_result_free(swb_result* res) { delete res; }

}  // extern "C"
