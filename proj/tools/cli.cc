#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <mutex>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "switchbnb.h"

namespace fs = std::filesystem;

namespace {

const char* kResultHeader =
    "theta,constraint,seed,Subs,Cuts,ADMM,FixPoints,FixIndices,Obj,Time,Refine,Ratio,Gap,Status";

struct SolveKnobs {
  double tol = 0.02, red = 0.02, alpha = 5e-3, beta = 5e-3, gamma = 0.5;
  int grid_init = 20, max_refine = 8, threads = 1;
};

struct RunSpec {
  int theta = 0;
  unsigned long long seed = 0;
  bool use_sigma = true;
  int sigma = 1;
  double dwell = 0.1;
  std::string tag;  // file suffix for batch outputs

  std::string constraint() const {
    std::ostringstream os;
    if (use_sigma)
      os << "sigma=" << sigma;
    else
      os << "dwell=" << dwell;
    return os.str();
  }
};

std::string run_one(const RunSpec& spec, const SolveKnobs& k, const std::string& instance_path,
                    const fs::path& outdir) {
  swb_instance* inst = instance_path.empty()
                           ? swb_instance_generate(spec.theta, spec.seed)
                           : swb_instance_load(instance_path.c_str());
  if (!inst) return std::string("failed: ") + swb_last_error();
  RunSpec id = spec;
  id.theta = swb_instance_theta(inst);
  id.seed = swb_instance_seed(inst);

  swb_options* opt = swb_options_create();
  if (spec.use_sigma)
    swb_options_set(opt, "sigma", spec.sigma);
  else
    swb_options_set(opt, "dwell", spec.dwell);
  swb_options_set(opt, "tol", k.tol);
  swb_options_set(opt, "red", k.red);
  swb_options_set(opt, "alpha", k.alpha);
  swb_options_set(opt, "beta", k.beta);
  swb_options_set(opt, "gamma", k.gamma);
  swb_options_set(opt, "grid_init", k.grid_init);
  swb_options_set(opt, "max_refine", k.max_refine);
  swb_options_set(opt, "threads", k.threads);

  swb_result* res = swb_solve(inst, opt);
  swb_options_free(opt);
  swb_instance_free(inst);
  if (!res) return std::string("failed: ") + swb_last_error();

  std::string suffix = spec.tag.empty() ? "" : "_" + spec.tag;
  fs::path cpath = outdir / ("control" + suffix + ".txt");
  fs::path epath = outdir / ("events" + suffix + ".csv");
  if (swb_result_stat(res, "feasible") > 0) swb_result_write_control(res, cpath.c_str());
  swb_result_write_events(res, epath.c_str());

  std::ostringstream row;
  row << id.theta << "," << id.constraint() << "," << id.seed;
  auto num = [&](const char* name, const char* fmt) {
    char buf[64];
    std::snprintf(buf, sizeof buf, fmt, swb_result_stat(res, name));
    row << "," << buf;
  };
  num("subs", "%.0f");
  num("cuts", "%.0f");
  num("admm", "%.0f");
  num("fix_points", "%.3g");
  num("fix_indices", "%.3g");
  num("obj", "%.10g");
  num("seconds", "%.3f");
  num("refine", "%.0f");
  num("ratio", "%.1f");
  num("gap", "%.4g");
  std::string status = "ok";
  if (swb_result_stat(res, "feasible") == 0)
    status = "no_incumbent";
  else if (swb_result_stat(res, "weakened") > 0)
    status = "weakened";
  row << "," << status;
  swb_result_free(res);
  return row.str();
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, sep))
    if (!tok.empty()) out.push_back(tok);
  return out;
}

std::map<std::string, std::string> read_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw CLI::ValidationError("--config", "cannot open " + path);
  std::map<std::string, std::string> kv;
  std::string line;
  while (std::getline(f, line)) {
    if (line.empty() || line[0] == '#') continue;
    auto eq = line.find('=');
    if (eq == std::string::npos) throw CLI::ValidationError("--config", "malformed: " + line);
    kv[line.substr(0, eq)] = line.substr(eq + 1);
  }
  return kv;
}

int cmd_report(const std::string& indir, const std::string& format) {
  std::ifstream f(fs::path(indir) / "results.csv");
  if (!f) {
    std::cerr << "no results.csv under " << indir << "\n";
    return 1;
  }
  std::string line;
  std::getline(f, line);  // header
  if (format == "csv") {
    std::cout << line << "\n";
    while (std::getline(f, line)) std::cout << line << "\n";
    return 0;
  }
  // table: per constraint block, rows averaged over seeds for each theta
  struct Acc {
    double subs = 0, cuts = 0, time = 0, refine = 0, ratio = 0;
    int n = 0;
  };
  std::map<std::string, std::map<int, Acc>> blocks;
  while (std::getline(f, line)) {
    auto c = split(line, ',');
    if (c.size() < 13) continue;
    Acc& a = blocks[c[1]][std::stoi(c[0])];
    a.subs += std::stod(c[3]);
    a.cuts += std::stod(c[4]);
    a.time += std::stod(c[9]);
    a.refine += std::stod(c[10]);
    a.ratio += std::stod(c[11]);
    a.n += 1;
  }
  for (auto& [cons, rows] : blocks) {
    std::printf("%s\n", cons.c_str());
    std::printf("%6s %8s %8s %10s %8s %8s\n", "theta", "Subs", "Cuts", "Time", "Refine", "Ratio");
    for (auto& [theta, a] : rows)
      std::printf("%6d %8.1f %8.1f %10.3f %8.1f %8.1f\n", theta, a.subs / a.n, a.cuts / a.n,
                  a.time / a.n, a.refine / a.n, a.ratio / a.n);
    std::printf("\n");
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Branch-and-bound solver for switching-constrained parabolic control"};
  app.require_subcommand(1);

  // generate
  auto* gen = app.add_subcommand("generate", "Draw a random tracking instance");
  int g_theta = 3;
  unsigned long long g_seed = 1;
  std::string g_out = "instance.txt";
  gen->add_option("--theta", g_theta, "number of jump points")->required();
  gen->add_option("--seed", g_seed, "PRNG seed")->required();
  gen->add_option("--out", g_out, "output file")->required();

  // solve
  auto* sol = app.add_subcommand("solve", "Solve one instance to certified tolerance");
  std::string s_instance, s_out = ".";
  int s_sigma = 0;
  double s_dwell = 0;
  SolveKnobs knobs;
  sol->add_option("--instance", s_instance, "instance file")->required();
  auto* os = sol->add_option("--sigma", s_sigma, "switching budget");
  auto* od = sol->add_option("--dwell", s_dwell, "minimum dwell time");
  os->excludes(od);
  sol->add_option("--tol", knobs.tol, "relative pruning tolerance");
  sol->add_option("--red", knobs.red, "lower-bound stall threshold");
  sol->add_option("--alpha", knobs.alpha, "control cost weight");
  sol->add_option("--beta", knobs.beta, "proximal weight");
  sol->add_option("--gamma", knobs.gamma, "refinement fraction");
  sol->add_option("--grid-init", knobs.grid_init, "initial temporal cells");
  sol->add_option("--max-refine", knobs.max_refine, "refinement cap per subproblem");
  sol->add_option("--threads", knobs.threads, "worker threads");
  sol->add_option("--out", s_out, "output directory");

  // report
  auto* rep = app.add_subcommand("report", "Render result tables");
  std::string r_in = ".", r_format = "table4";
  rep->add_option("--in", r_in, "directory holding results.csv")->required();
  rep->add_option("--format", r_format, "csv or table4")
      ->check(CLI::IsMember({"csv", "table4", "table"}));

  // batch
  auto* bat = app.add_subcommand("batch", "Run a (theta, constraint, seed) matrix");
  std::string b_config, b_out = ".";
  int b_jobs = 1;
  bat->add_option("--config", b_config, "key=value matrix file")->required();
  bat->add_option("--out", b_out, "output directory")->required();
  bat->add_option("--jobs", b_jobs, "concurrent runs");

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) {
      swb_instance* inst = swb_instance_generate(g_theta, g_seed);
      if (!inst || swb_instance_save(inst, g_out.c_str())) {
        std::cerr << swb_last_error() << "\n";
        swb_instance_free(inst);
        return 1;
      }
      swb_instance_free(inst);
      return 0;
    }

    if (sol->parsed()) {
      if ((os->count() == 0) == (od->count() == 0)) {
        std::cerr << "exactly one of --sigma/--dwell is required\n";
        return 1;
      }
      fs::create_directories(s_out);
      RunSpec spec;
      spec.use_sigma = os->count() > 0;
      spec.sigma = s_sigma;
      spec.dwell = s_dwell;
      std::string row = run_one(spec, knobs, s_instance, s_out);
      std::ofstream rf(fs::path(s_out) / "results.csv");
      rf << kResultHeader << "\n" << row << "\n";
      if (row.rfind("failed", 0) == 0 || row.find("failed:") != std::string::npos) {
        std::cerr << row << "\n";
        return 1;
      }
      std::cout << kResultHeader << "\n" << row << "\n";
      return 0;
    }

    if (rep->parsed()) return cmd_report(r_in, r_format);

    if (bat->parsed()) {
      auto cfg = read_config(b_config);
      fs::create_directories(b_out);
      auto ints = [&](const char* key) {
        std::vector<int> v;
        if (cfg.count(key))
          for (auto& t : split(cfg[key], ',')) v.push_back(std::stoi(t));
        return v;
      };
      std::vector<int> thetas = ints("theta"), sigmas = ints("sigma"), seeds = ints("seed");
      std::vector<double> dwells;
      if (cfg.count("dwell"))
        for (auto& t : split(cfg["dwell"], ',')) dwells.push_back(std::stod(t));
      SolveKnobs k;
      if (cfg.count("tol")) k.tol = std::stod(cfg["tol"]);
      if (cfg.count("red")) k.red = std::stod(cfg["red"]);
      if (cfg.count("alpha")) k.alpha = std::stod(cfg["alpha"]);
      if (cfg.count("beta")) k.beta = std::stod(cfg["beta"]);
      if (cfg.count("gamma")) k.gamma = std::stod(cfg["gamma"]);
      if (cfg.count("grid_init")) k.grid_init = std::stoi(cfg["grid_init"]);
      if (cfg.count("max_refine")) k.max_refine = std::stoi(cfg["max_refine"]);

      std::vector<RunSpec> specs;
      for (int theta : thetas)
        for (int seed : seeds) {
          for (int sigma : sigmas) {
            RunSpec s;
            s.theta = theta;
            s.seed = seed;
            s.use_sigma = true;
            s.sigma = sigma;
            std::ostringstream tag;
            tag << "t" << theta << "_s" << sigma << "_seed" << seed;
            s.tag = tag.str();
            specs.push_back(s);
          }
          for (double dwell : dwells) {
            RunSpec s;
            s.theta = theta;
            s.seed = seed;
            s.use_sigma = false;
            s.dwell = dwell;
            std::ostringstream tag;
            tag << "t" << theta << "_d" << dwell << "_seed" << seed;
            s.tag = tag.str();
            specs.push_back(s);
          }
        }

      std::vector<std::string> rows(specs.size());
      std::atomic<std::size_t> next{0};
      auto worker = [&] {
        for (std::size_t i = next++; i < specs.size(); i = next++)
          rows[i] = run_one(specs[i], k, "", b_out);
      };
      int jobs = std::max(1, b_jobs);
      if (jobs == 1) {
        worker();
      } else {
        std::vector<std::thread> pool;
        for (int i = 0; i < jobs; ++i) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
      }

      std::ofstream rf(fs::path(b_out) / "results.csv");
      rf << kResultHeader << "\n";
      for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].rfind("failed", 0) == 0)
          rf << specs[i].theta << "," << specs[i].constraint() << "," << specs[i].seed
             << ",,,,,,,,,,\"" << rows[i] << "\"\n";
        else
          rf << rows[i] << "\n";
      }
      std::cout << "wrote " << (fs::path(b_out) / "results.csv").string() << " (" << specs.size()
                << " runs)\n";
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << e.what() << "\n";
    return 1;
  }
  return 0;
}
