#include "core/switchset.hh"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>

namespace swb {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kTimeTol = 1e-9;

double sgn(double x, double tol = 1e-12) { return x > tol ? 1.0 : (x < -tol ? -1.0 : 0.0); }

double linf(std::span<const double> a) {
  double m = 0;
  for (double x : a) m = std::max(m, std::abs(x));
  return m;
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0;
  for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

}  // namespace

SwitchingConstraint SwitchingConstraint::max_switchings(int sigma, bool count_initial) {
  if (sigma < 0) throw std::invalid_argument("sigma must be nonnegative");
  SwitchingConstraint c;
  c.kind = Kind::MaxSwitchings;
  c.sigma = sigma;
  c.count_initial = count_initial;
  return c;
}

SwitchingConstraint SwitchingConstraint::min_dwell(double s) {
  if (!(s > 0)) throw std::invalid_argument("dwell time must be positive");
  SwitchingConstraint c;
  c.kind = Kind::MinDwell;
  c.dwell = s;
  return c;
}

int SwitchingConstraint::switch_budget(double horizon) const {
  if (kind == Kind::MaxSwitchings) return sigma;
  return static_cast<int>(std::ceil(horizon / dwell - 1e-12));
}

FixingSet FixingSet::inserted(double tau, int bit) const {
  if (bit != 0 && bit != 1) throw std::invalid_argument("fixing bit must be 0 or 1");
  if (tau < 0) throw std::invalid_argument("fixing before the horizon start");
  if (contains(tau)) throw std::invalid_argument("duplicate fixing point");
  FixingSet out = *this;
  auto it = std::lower_bound(out.fx_.begin(), out.fx_.end(), tau,
                             [](const Fixing& f, double t) { return f.tau < t; });
  out.fx_.insert(it, Fixing{tau, bit});
  return out;
}

bool FixingSet::contains(double tau, double tol) const {
  for (const auto& f : fx_)
    if (std::abs(f.tau - tau) <= tol) return true;
  return false;
}

bool FixingSet::bit_in_open(int bit, double x, double y, double tol) const {
  for (const auto& f : fx_)
    if (f.bit == bit && f.tau > x + tol && f.tau < y - tol) return true;
  return false;
}

std::vector<int8_t> Propagation::cell_bits(const TemporalGrid& g) const {
  std::vector<int8_t> out(g.cells(), -1);
  for (const auto& iv : fixed)
    for (int l = 0; l < g.cells(); ++l)
      if (g.cell_left(l) >= iv.lo - kTimeTol && g.cell_right(l) <= iv.hi + kTimeTol)
        out[l] = static_cast<int8_t>(iv.bit);
  return out;
}

double Propagation::fixed_measure() const {
  double s = 0;
  for (const auto& iv : fixed) s += iv.hi - iv.lo;
  return s;
}

Propagation propagate(const FixingSet& fx, const SwitchingConstraint& c, double horizon) {
  Propagation out;
  const int n = fx.size();
  if (c.kind == SwitchingConstraint::Kind::MaxSwitchings) {
    int np = 0;
    if (n > 0) {
      if (c.count_initial) np += (fx[0].bit != 0);
      for (int j = 1; j < n; ++j) np += (fx[j].bit != fx[j - 1].bit);
    }
    out.enforced_switches = np;
    out.budget_left = c.sigma - np;
    if (np > c.sigma) {
      out.feasible = false;
      return out;
    }
    if (np >= c.sigma - 1 && n > 0) {
      // two extra switchings do not fit between equal consecutive bits
      if (c.count_initial && fx[0].bit == 0 && fx[0].tau > kTimeTol)
        out.fixed.push_back({0.0, fx[0].tau, 0});
      for (int j = 1; j < n; ++j)
        if (fx[j].bit == fx[j - 1].bit && fx[j].tau > fx[j - 1].tau + kTimeTol)
          out.fixed.push_back({fx[j - 1].tau, fx[j].tau, fx[j].bit});
    }
    if (np == c.sigma && n > 0) {
      // a single switching is already too much
      if (!c.count_initial && fx[0].bit == 0 && fx[0].tau > kTimeTol)
        out.fixed.insert(out.fixed.begin(), {0.0, fx[0].tau, 0});
      if (fx[n - 1].tau < horizon - kTimeTol)
        out.fixed.push_back({fx[n - 1].tau, horizon, fx[n - 1].bit});
    }
  } else {
    const double s = c.dwell;
    int np = 0, prev = 0;
    for (int j = 0; j < n; ++j) {
      np += (fx[j].bit != prev);
      prev = fx[j].bit;
    }
    out.enforced_switches = np;
    out.budget_left = c.switch_budget(horizon) - np;
    // an opposite bit sandwiched by equal bits within dwell distance
    for (int j = 0; j < n && out.feasible; ++j)
      for (int m = j + 1; m < n && out.feasible; ++m) {
        if (fx[m].bit != fx[j].bit || fx[m].tau - fx[j].tau > s + kTimeTol) continue;
        for (int k = j + 1; k < m; ++k)
          if (fx[k].bit != fx[j].bit) {
            out.feasible = false;
            break;
          }
      }
    // same with the virtual zero prefix, strict because the first switching is free
    for (int m = 0; m < n && out.feasible; ++m) {
      if (fx[m].bit != 0 || fx[m].tau >= s - kTimeTol) continue;
      for (int k = 0; k < m; ++k)
        if (fx[k].bit == 1) {
          out.feasible = false;
          break;
        }
    }
    if (!out.feasible) return out;
    if (n > 0 && fx[0].bit == 0 && fx[0].tau < s - kTimeTol && fx[0].tau > kTimeTol)
      out.fixed.push_back({0.0, fx[0].tau, 0});
    for (int j = 1; j < n; ++j)
      if (fx[j].bit == fx[j - 1].bit && fx[j].tau - fx[j - 1].tau <= s + kTimeTol &&
          fx[j].tau > fx[j - 1].tau + kTimeTol)
        out.fixed.push_back({fx[j - 1].tau, fx[j].tau, fx[j].bit});
  }
  return out;
}

std::vector<std::pair<int, int>> pointwise_forced_cells(const FixingSet& fx,
                                                        const TemporalGrid& g) {
  std::vector<std::pair<int, int>> out;
  for (int j = 0; j < fx.size(); ++j) {
    auto ni = g.node_index(fx[j].tau, kTimeTol);
    if (!ni) throw std::invalid_argument("fixing point is not a grid node");
    if (*ni >= g.cells()) throw std::invalid_argument("fixing at the end of the horizon");
    out.emplace_back(*ni, fx[j].bit);
  }
  return out;
}

double total_variation(std::span<const double> w, bool count_initial) {
  double g = count_initial && !w.empty() ? std::abs(w[0]) : 0.0;
  for (size_t l = 1; l < w.size(); ++l) g += std::abs(w[l] - w[l - 1]);
  return g;
}

Embedding Embedding::build(const FixingSet& fx, const AveragingPartition& p) {
  p.validate();
  Embedding e;
  const int m = p.size();
  for (int j = 0; j < fx.size(); ++j) {
    double tau = fx[j].tau;
    int i = 0;
    while (i < m && p.hi[i] <= tau + kTimeTol) ++i;
    if (i < m && tau > p.lo[i] + kTimeTol && tau < p.hi[i] - kTimeTol)
      throw std::invalid_argument("fixing point interior to a partition interval");
    e.after_.push_back(i);
  }
  return e;
}

std::vector<double> Embedding::embed(std::span<const double> v, const FixingSet& fx) const {
  const int m = static_cast<int>(v.size());
  const int n = fx.size();
  std::vector<double> w;
  w.reserve(m + n);
  int j = 0;
  for (int i = 0; i <= m; ++i) {
    while (j < n && after_[j] == i) w.push_back(static_cast<double>(fx[j++].bit));
    if (i < m) w.push_back(v[i]);
  }
  return w;
}

std::vector<int8_t> Embedding::fixed_mask(const FixingSet& fx, int m) const {
  const int n = fx.size();
  std::vector<int8_t> mask;
  mask.reserve(m + n);
  int j = 0;
  for (int i = 0; i <= m; ++i) {
    while (j < n && after_[j] == i) mask.push_back(static_cast<int8_t>(fx[j++].bit));
    if (i < m) mask.push_back(-1);
  }
  return mask;
}

std::pair<std::vector<double>, double> Embedding::reduce(std::span<const double> a_ext,
                                                         double b_ext,
                                                         const FixingSet& fx) const {
  const int n = fx.size();
  const int m = static_cast<int>(a_ext.size()) - n;
  auto mask = fixed_mask(fx, m);
  std::vector<double> a;
  a.reserve(m);
  double b = b_ext;
  for (size_t idx = 0; idx < a_ext.size(); ++idx) {
    if (mask[idx] >= 0)
      b -= a_ext[idx] * mask[idx];
    else
      a.push_back(a_ext[idx]);
  }
  return {std::move(a), b};
}

std::optional<MaxSwitchVertex> optimize_maxswitch(std::span<const double> cost, int sigma,
                                                  bool count_initial,
                                                  std::span<const int8_t> fixed) {
  const int d = static_cast<int>(cost.size());
  if (sigma < 0) return std::nullopt;
  if (d == 0) return MaxSwitchVertex{{}, 0.0};
  if (!fixed.empty() && static_cast<int>(fixed.size()) != d)
    throw std::invalid_argument("fixed mask size mismatch");
  auto allowed = [&](int l, int b) { return fixed.empty() || fixed[l] < 0 || fixed[l] == b; };

  // suffix table: best value of w_l .. w_{d-1} given previous bit and budget left
  const int R = sigma + 1;
  std::vector<double> h(static_cast<size_t>(d + 1) * 2 * R, kInf);
  auto H = [&](int l, int b, int r) -> double& {
    return h[(static_cast<size_t>(l) * 2 + b) * R + r];
  };
  for (int b = 0; b < 2; ++b)
    for (int r = 0; r < R; ++r) H(d, b, r) = 0;
  for (int l = d - 1; l >= 0; --l)
    for (int bp = 0; bp < 2; ++bp)
      for (int r = 0; r < R; ++r) {
        double best = kInf;
        for (int w = 0; w < 2; ++w) {
          if (!allowed(l, w)) continue;
          int chg = (w != bp);
          if (chg > r) continue;
          best = std::min(best, cost[l] * w + H(l + 1, w, r - chg));
        }
        H(l, bp, r) = best;
      }

  // forward pass; ties keep the previous bit, else prefer 0. The tie window
  // scales with the costs so near-zero gradients still resolve exactly.
  double cmax = 0;
  for (int l = 0; l < d; ++l) cmax = std::max(cmax, std::abs(cost[l]));
  std::vector<double> w(d);
  int bprev = 0;
  int budget = sigma;
  for (int l = 0; l < d; ++l) {
    double cand[2] = {kInf, kInf};
    for (int b = 0; b < 2; ++b) {
      if (!allowed(l, b)) continue;
      int chg = (l == 0 && !count_initial) ? 0 : (b != bprev);
      if (chg > budget) continue;
      double suffix = H(l + 1, b, budget - chg);
      if (suffix == kInf) continue;
      cand[b] = cost[l] * b + suffix;
    }
    if (cand[0] == kInf && cand[1] == kInf) return std::nullopt;
    int pick;
    double tol = 1e-11 * cmax;
    if (cand[0] < cand[1] - tol)
      pick = 0;
    else if (cand[1] < cand[0] - tol)
      pick = 1;
    else
      pick = (l == 0 && !count_initial) ? 0 : bprev;
    if (cand[pick] == kInf) pick = 1 - pick;
    w[l] = pick;
    budget -= (l == 0 && !count_initial) ? 0 : (pick != bprev);
    bprev = pick;
  }
  double value = 0;
  for (int l = 0; l < d; ++l) value += cost[l] * w[l];
  return MaxSwitchVertex{std::move(w), value};
}

namespace {

// zero-based choice tags for the dwell recursion
struct DwellChoice {
  int kind = -1;  // 0 stay, 1 switch here, 2 start here (zero prefix)
  int pk = -1, pb = -1;
};

}  // namespace

std::optional<DwellVertex> optimize_dwell(std::span<const double> cost, double dwell,
                                          const FixingSet& fx, const AveragingPartition& p,
                                          double horizon) {
  if (!(dwell > 0)) throw std::invalid_argument("dwell time must be positive");
  const int m = p.size();
  if (static_cast<int>(cost.size()) != m) throw std::invalid_argument("cost size mismatch");
  const double s = dwell, T = horizon;

  // shift set S = [0,T] cap (Z s + base points)
  std::vector<double> bases{0.0, T};
  for (int i = 0; i < m; ++i) {
    bases.push_back(p.lo[i]);
    bases.push_back(p.hi[i]);
  }
  for (int j = 0; j < fx.size(); ++j) bases.push_back(fx[j].tau);
  std::vector<double> pts;
  for (double b : bases) {
    double k0 = std::ceil((0.0 - b) / s - 1e-9);
    for (double k = k0;; k += 1) {
      double t = b + k * s;
      if (t > T + kTimeTol) break;
      pts.push_back(std::clamp(t, 0.0, T));
    }
  }
  std::sort(pts.begin(), pts.end());
  std::vector<double> S;
  for (double t : pts)
    if (S.empty() || t - S.back() > 1e-10) S.push_back(t);
  const int K = static_cast<int>(S.size());

  auto idx_of = [&](double t) -> int {
    auto it = std::lower_bound(S.begin(), S.end(), t - 1e-8);
    if (it != S.end() && std::abs(*it - t) <= 1e-8) return static_cast<int>(it - S.begin());
    return -1;
  };
  std::vector<int> fixmark(K, -1);
  for (int j = 0; j < fx.size(); ++j) {
    int k = idx_of(fx[j].tau);
    if (k < 0) throw std::logic_error("fixing point missing from the shift set");
    fixmark[k] = j;
  }
  // fixing with bit b strictly before t
  auto bit_before = [&](int bit, double t) {
    for (int j = 0; j < fx.size(); ++j)
      if (fx[j].bit == bit && fx[j].tau < t - kTimeTol) return true;
    return false;
  };
  auto seg = [&](double x, double y) {
    double a = 0;
    for (int i = 0; i < m; ++i) a += cost[i] * p.overlap(i, x, y) / p.length(i);
    return a;
  };

  std::vector<double> val(static_cast<size_t>(K) * 2, kInf);
  std::vector<DwellChoice> ch(static_cast<size_t>(K) * 2);
  auto V = [&](int k, int b) -> double& { return val[static_cast<size_t>(k) * 2 + b]; };
  auto C = [&](int k, int b) -> DwellChoice& { return ch[static_cast<size_t>(k) * 2 + b]; };
  double cmax = 0;
  for (int i = 0; i < m; ++i) cmax = std::max(cmax, std::abs(cost[i]));
  const double tie_tol = 1e-11 * cmax;

  if (fixmark[0] >= 0 && fx[fixmark[0]].bit == 1) {
    V(0, 1) = 0;  // the switching sits exactly at the start
  } else {
    V(0, 0) = 0;
    V(0, 1) = 0;
  }

  for (int k = 1; k < K; ++k) {
    const double t = S[k];
    const int fj = fixmark[k];
    const bool past_dwell = t >= s - kTimeTol;
    const int k2 = past_dwell ? idx_of(t - s) : -1;
    if (past_dwell && k2 < 0) throw std::logic_error("shift set not closed under -s");
    for (int b = 0; b < 2; ++b) {
      double best = kInf;
      DwellChoice bc;
      auto consider = [&](double v, const DwellChoice& c) {
        // preference at ties follows the order the candidates are offered
        if (v >= kInf) return;
        if (best >= kInf || v < best - tie_tol) {
          best = v;
          bc = c;
        }
      };
      if (fj < 0 || fx[fj].bit == b) {
        // stay at b since the previous shift point
        if (V(k - 1, b) < kInf) consider(V(k - 1, b) + b * seg(S[k - 1], t), {0, k - 1, b});
        // last switching exactly at t, constant 1-b on [t-s, t]
        if (past_dwell && !fx.bit_in_open(b, t - s, t) && V(k2, 1 - b) < kInf)
          consider(V(k2, 1 - b) + (1 - b) * seg(t - s, t), {1, k2, 1 - b});
        // first switching at t < s
        if (!past_dwell && b == 1 && !bit_before(1, t)) consider(0.0, {2, -1, -1});
      } else {
        // fixing not met at its own point: forced c_j on [t-s, t], switch at t
        const int cj = fx[fj].bit;
        if (!past_dwell) {
          if (cj == 0 && !bit_before(1, t)) consider(0.0, {2, -1, -1});
        } else if (!fx.bit_in_open(1 - cj, t - s, t) && V(k2, cj) < kInf) {
          consider(V(k2, cj) + cj * seg(t - s, t), {1, k2, cj});
        }
      }
      V(k, b) = best;
      C(k, b) = bc;
    }
  }

  int bstar;
  if (V(K - 1, 0) <= V(K - 1, 1))
    bstar = 0;
  else
    bstar = 1;
  if (V(K - 1, bstar) == kInf) return std::nullopt;

  std::vector<double> sw;
  int k = K - 1, b = bstar;
  while (true) {
    if (k == 0) {
      if (b == 1) sw.push_back(0.0);
      break;
    }
    const DwellChoice& c = C(k, b);
    if (c.kind == 0) {
      k = c.pk;
    } else if (c.kind == 1) {
      sw.push_back(S[k]);
      b = c.pb;
      k = c.pk;
    } else {
      sw.push_back(S[k]);
      break;
    }
  }
  std::reverse(sw.begin(), sw.end());
  // a switching exactly at T is vacuous for the right-continuous control
  while (!sw.empty() && sw.back() >= T - kTimeTol) sw.pop_back();

  DwellVertex out;
  out.switch_times = sw;
  out.vertex = project_switch_times(sw, p);
  out.value = dot(cost, out.vertex);
  for (int j = 0; j < fx.size(); ++j) {
    int cnt = 0;
    for (double t : sw)
      if (t <= fx[j].tau + kTimeTol) ++cnt;
    if (cnt % 2 != fx[j].bit) out.closure_switch = true;
  }
  return out;
}

namespace {

using Lmo = std::function<std::optional<std::vector<double>>(std::span<const double>)>;

struct AfwOutcome {
  std::vector<double> x;
  bool feasible = true;
  bool capped = false;
};

/* Away-step Frank-Wolfe for min 1/2 |x - z|^2 over the hull of the oracle vertices. */
AfwOutcome afw_project(std::span<const double> z, const Lmo& lmo, int cap) {
  AfwOutcome out;
  const size_t d = z.size();
  std::vector<double> g0(d);
  for (size_t i = 0; i < d; ++i) g0[i] = -z[i];
  auto v0 = lmo(g0);
  if (!v0) {
    out.feasible = false;
    return out;
  }
  std::vector<std::vector<double>> verts{*v0};
  std::vector<double> wts{1.0};
  std::vector<double> x = *v0;
  std::vector<double> grad(d), dir(d);
  auto same = [&](const std::vector<double>& a, const std::vector<double>& b) {
    for (size_t i = 0; i < d; ++i)
      if (std::abs(a[i] - b[i]) > 1e-12) return false;
    return true;
  };
  int it = 0;
  for (; it < cap; ++it) {
    for (size_t i = 0; i < d; ++i) grad[i] = x[i] - z[i];
    auto sv = lmo(grad);
    if (!sv) {
      out.feasible = false;
      return out;
    }
    double gx = dot(grad, x);
    double gap_fw = gx - dot(grad, *sv);
    if (gap_fw <= 1e-13) break;
    size_t ia = 0;
    double ga = -kInf;
    for (size_t i = 0; i < verts.size(); ++i) {
      double gi = dot(grad, verts[i]);
      if (gi > ga) {
        ga = gi;
        ia = i;
      }
    }
    double gap_aw = ga - gx;
    bool fw = gap_fw >= gap_aw;
    double gmax;
    if (fw) {
      for (size_t i = 0; i < d; ++i) dir[i] = (*sv)[i] - x[i];
      gmax = 1.0;
    } else {
      for (size_t i = 0; i < d; ++i) dir[i] = x[i] - verts[ia][i];
      gmax = wts[ia] >= 1.0 ? kInf : wts[ia] / (1.0 - wts[ia]);
    }
    double dd = dot(dir, dir);
    if (dd <= 1e-16) break;
    double gamma = std::clamp(-dot(grad, dir) / dd, 0.0, gmax);
    if (gamma <= 0) break;
    if (fw) {
      for (auto& wt : wts) wt *= (1 - gamma);
      size_t hit = verts.size();
      for (size_t i = 0; i < verts.size(); ++i)
        if (same(verts[i], *sv)) {
          hit = i;
          break;
        }
      if (hit == verts.size()) {
        verts.push_back(*sv);
        wts.push_back(gamma);
      } else {
        wts[hit] += gamma;
      }
    } else {
      for (auto& wt : wts) wt *= (1 + gamma);
      wts[ia] -= gamma;
    }
    for (size_t i = 0; i < d; ++i) x[i] += gamma * dir[i];
    // drop dead vertices and occasionally resync x with the weights
    for (size_t i = verts.size(); i-- > 0;)
      if (wts[i] <= 1e-14) {
        verts.erase(verts.begin() + i);
        wts.erase(wts.begin() + i);
      }
    if ((it + 1) % 64 == 0) {
      std::fill(x.begin(), x.end(), 0.0);
      for (size_t i = 0; i < verts.size(); ++i)
        for (size_t q = 0; q < d; ++q) x[q] += wts[i] * verts[i][q];
    }
  }
  out.capped = (it >= cap);
  out.x = std::move(x);
  return out;
}

}  // namespace

SeparationOutcome separate(std::span<const double> v, const SwitchingConstraint& c,
                           const FixingSet& fx, const AveragingPartition& p, double horizon,
                           const SeparationParams& sp) {
  p.validate();
  const bool maxsw = c.kind == SwitchingConstraint::Kind::MaxSwitchings;
  Embedding emb;
  std::vector<double> z;
  std::vector<int8_t> mask;
  if (maxsw) {
    emb = Embedding::build(fx, p);
    z = emb.embed(v, fx);
    mask = emb.fixed_mask(fx, p.size());
    double g = total_variation(z, c.count_initial);
    if (g > c.sigma + 1e-12) {
      // subgradient cut xi^T w <= sigma; the variation is a gauge, xi^T z = g(z)
      std::vector<double> xi(z.size(), 0.0);
      if (c.count_initial) xi[0] += sgn(z[0]);
      for (size_t l = 1; l < z.size(); ++l) {
        double sg = sgn(z[l] - z[l - 1]);
        xi[l] += sg;
        xi[l - 1] -= sg;
      }
      double sc = linf(xi);
      if (sc > 1e-12) {
        for (auto& a : xi) a /= sc;
        auto [ar, br] = emb.reduce(xi, c.sigma / sc, fx);
        if (linf(ar) > 1e-12) return {CuttingPlane{p, std::move(ar), br}, false};
      }
    }
  } else {
    z.assign(v.begin(), v.end());
  }

  Lmo lmo;
  if (maxsw)
    lmo = [&](std::span<const double> grad) -> std::optional<std::vector<double>> {
      auto r = optimize_maxswitch(grad, c.sigma, c.count_initial, mask);
      if (!r) return std::nullopt;
      return std::move(r->vertex);
    };
  else
    lmo = [&](std::span<const double> grad) -> std::optional<std::vector<double>> {
      auto r = optimize_dwell(grad, c.dwell, fx, p, horizon);
      if (!r) return std::nullopt;
      return std::move(r->vertex);
    };

  auto prj = afw_project(z, lmo, sp.fw_cap);
  if (!prj.feasible) return {std::nullopt, true};
  std::vector<double> r(z.size());
  double dist2 = 0;
  for (size_t i = 0; i < z.size(); ++i) {
    r[i] = z[i] - prj.x[i];
    dist2 += r[i] * r[i];
  }
  if (std::sqrt(dist2) <= sp.tol_sep) return {std::nullopt, false};

  // normalize first so the support call runs at unit scale, then the rhs
  // max a^T w over the vertices is valid and tight by construction
  double sc = linf(r);
  if (sc <= 1e-300) return {std::nullopt, prj.capped};
  for (auto& a : r) a /= sc;
  std::vector<double> neg(r.size());
  for (size_t i = 0; i < r.size(); ++i) neg[i] = -r[i];
  auto support = lmo(neg);
  if (!support) return {std::nullopt, true};
  double b = dot(r, *support);
  double viol = dot(r, z) - b;
  if (viol <= sp.min_violation) return {std::nullopt, prj.capped};
  if (maxsw) {
    auto [ar, br] = emb.reduce(r, b, fx);
    if (linf(ar) <= 1e-12) return {std::nullopt, prj.capped};
    return {CuttingPlane{p, std::move(ar), br}, false};
  }
  return {CuttingPlane{p, std::move(r), b}, false};
}

std::optional<PiecewiseConstantFn> round_cia(const PiecewiseConstantFn& v,
                                             const SwitchingConstraint& c, const FixingSet& fx,
                                             const Propagation& prop) {
  if (!prop.feasible) return std::nullopt;
  const TemporalGrid& g = v.grid;
  const int L = g.cells();
  const double T = g.horizon();
  const double large = 1.0 + T;
  auto bits = prop.cell_bits(g);
  for (auto [cell, bit] : pointwise_forced_cells(fx, g)) {
    if (bits[cell] >= 0 && bits[cell] != bit) return std::nullopt;
    bits[cell] = static_cast<int8_t>(bit);
  }
  std::vector<double> cost(L);
  for (int l = 0; l < L; ++l) {
    cost[l] = g.cell_length(l) * (0.5 - v.values[l]);
    if (bits[l] == 1)
      cost[l] = -large;
    else if (bits[l] == 0)
      cost[l] = large;
  }

  if (c.kind == SwitchingConstraint::Kind::MaxSwitchings) {
    auto r = optimize_maxswitch(cost, c.sigma, c.count_initial);
    if (!r) return std::nullopt;
    for (int l = 0; l < L; ++l)
      if (bits[l] >= 0 && static_cast<int>(r->vertex[l]) != bits[l]) return std::nullopt;
    return PiecewiseConstantFn(g, std::move(r->vertex));
  }

  auto r = optimize_dwell(cost, c.dwell, fx, AveragingPartition::all_cells(g), T);
  if (!r) return std::nullopt;
  const auto& sw = r->switch_times;
  // the closure may place a switching exactly on an opposite fixing; reject
  for (int j = 0; j < fx.size(); ++j) {
    int cnt = 0;
    for (double t : sw)
      if (t <= fx[j].tau + kTimeTol) ++cnt;
    if (cnt % 2 != fx[j].bit) return std::nullopt;
  }
  for (size_t i = 1; i < sw.size(); ++i)
    if (sw[i] - sw[i - 1] < c.dwell - kTimeTol) return std::nullopt;
  TemporalGrid merged = g.merged_with(sw);
  std::vector<double> vals(merged.cells());
  for (int l = 0; l < merged.cells(); ++l) {
    double mid = 0.5 * (merged.cell_left(l) + merged.cell_right(l));
    int cnt = 0;
    for (double t : sw)
      if (t <= mid) ++cnt;
    vals[l] = cnt % 2;
  }
  return PiecewiseConstantFn(merged, std::move(vals));
}

}  // namespace swb
