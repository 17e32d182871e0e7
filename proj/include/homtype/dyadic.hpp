#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "homtype/measure.hpp"
#include "homtype/spatial.hpp"

namespace homtype {

struct Cube {
  std::size_t center = 0;               // cloud index
  std::vector<std::size_t> members;     // ascending cloud indices
  std::size_t parent = npos;            // index in the previous (coarser) generation
  std::vector<std::size_t> children;    // indices in the next (finer) generation
  double mass = 0.0;
};

struct Generation {
  int j = 0;
  double side = 1.0;  // l(Q) = delta^j
  std::vector<Cube> cubes;               // ordered by center index
  std::vector<std::size_t> cube_of;      // per cloud point
};

struct DyadicTree {
  double delta = 0.5;
  int j_min = 0, j_max = 0;
  std::vector<Generation> gens;  // gens[0] is j_min
  double a0 = 0.0;               // measured inner-ball constant (capped at 1)
  double C1 = 0.0;               // measured diameter constant
  double C_disc = 0.0;           // max parent/child mass ratio, atoms included

  const Generation& gen(int j) const {
    if (j < j_min || j > j_max) throw ParameterError("generation outside tree");
    return gens[std::size_t(j - j_min)];
  }
  std::size_t n_points() const { return gens.empty() ? 0 : gens.front().cube_of.size(); }
};

// Largest feasible scale range for build_cubes.
inline std::pair<int, int> feasible_scales(const WeightedCloud& c, double delta) {
  double diam = diameter(c), mp = min_pair_distance(c);
  if (c.size() < 2) return {0, 0};
  int j_min = int(std::floor(std::log(diam / 2) / std::log(delta) + 1e-12));
  int j_max = int(std::floor(std::log(2 * mp) / std::log(delta) + 1e-12));
  return {j_min, j_max};
}

namespace detail {

// Nested maximal delta^j-separated nets, extended coarse-to-fine by scanning points in index
// order. level[i] is the coarsest generation offset at which point i becomes a net point
// (npos if never).
inline std::vector<std::size_t> greedy_nets(const WeightedCloud& c, double delta, int j_min, int G) {
  const std::size_t n = c.size();
  std::vector<std::size_t> level(n, npos);
  PointIndex net;
  for (int g = 0; g < G; ++g) {
    double side = std::pow(delta, j_min + g);
    for (std::size_t i = 0; i < n; ++i) {
      if (level[i] != npos || net.any_closer(c.points[i], side)) continue;
      level[i] = std::size_t(g);
      net.insert(c.points[i], i);
    }
  }
  return level;
}

}  // namespace detail

inline DyadicTree build_cubes(const WeightedCloud& c, double delta, int j_min, int j_max) {
  if (!(delta > 0 && delta < 1)) throw ParameterError("build_cubes: delta must lie in (0,1)");
  if (j_min > j_max) throw ParameterError("build_cubes: j_min > j_max");
  const std::size_t n = c.size();
  if (n >= 2) {
    double diam = diameter(c), mp = min_pair_distance(c);
    const double slack = 1e-12;
    if (std::pow(delta, j_max) < 2 * mp * (1 - slack))
      throw ParameterError("build_cubes: delta^j_max below twice the minimal pair distance");
    if (std::pow(delta, j_min) < diam / 2 * (1 - slack))
      throw ParameterError("build_cubes: delta^j_min below half the diameter");
  }
  DyadicTree t;
  t.delta = delta;
  t.j_min = j_min;
  t.j_max = j_max;
  int G = j_max - j_min + 1;
  t.gens.resize(std::size_t(G));
  auto level = detail::greedy_nets(c, delta, j_min, G);
  // owning centre per point, per generation; finest by nearest net point, coarser by nearest
  // coarser net point of the child centre
  std::vector<std::vector<std::size_t>> owner(static_cast<std::size_t>(G));
  for (int g = G - 1; g >= 0; --g) {
    std::vector<std::size_t> net;
    for (std::size_t i = 0; i < n; ++i)
      if (level[i] <= std::size_t(g)) net.push_back(i);
    PointIndex idx(c.points, net);
    auto& own = owner[std::size_t(g)];
    own.resize(n);
    if (g == G - 1) {
      for (std::size_t i = 0; i < n; ++i) own[i] = level[i] != npos ? i : idx.nearest(c.points[i]).second;
    } else {
      const auto& fine = owner[std::size_t(g + 1)];
      std::vector<std::size_t> parent_of(n, npos);
      for (std::size_t i = 0; i < n; ++i) {
        if (level[i] > std::size_t(g + 1)) continue;
        parent_of[i] = level[i] <= std::size_t(g) ? i : idx.nearest(c.points[i]).second;
      }
      for (std::size_t i = 0; i < n; ++i) own[i] = parent_of[fine[i]];
    }
  }
  for (int g = 0; g < G; ++g) {
    auto& gen = t.gens[std::size_t(g)];
    gen.j = j_min + g;
    gen.side = std::pow(delta, gen.j);
    std::vector<std::size_t> centers;
    for (std::size_t i = 0; i < n; ++i)
      if (owner[std::size_t(g)][i] == i) centers.push_back(i);
    std::vector<std::size_t> slot(n, npos);
    for (std::size_t k = 0; k < centers.size(); ++k) slot[centers[k]] = k;
    gen.cubes.resize(centers.size());
    gen.cube_of.resize(n);
    for (std::size_t k = 0; k < centers.size(); ++k) gen.cubes[k].center = centers[k];
    for (std::size_t i = 0; i < n; ++i) {
      std::size_t k = slot[owner[std::size_t(g)][i]];
      gen.cube_of[i] = k;
      gen.cubes[k].members.push_back(i);
    }
    for (auto& q : gen.cubes) {
      KahanSum m;
      for (std::size_t i : q.members) m.add(c.weights[i]);
      q.mass = m.value();
    }
  }
  for (int g = 1; g < G; ++g) {
    auto& fine = t.gens[std::size_t(g)];
    auto& coarse = t.gens[std::size_t(g - 1)];
    for (std::size_t k = 0; k < fine.cubes.size(); ++k) {
      std::size_t pk = coarse.cube_of[fine.cubes[k].center];
      fine.cubes[k].parent = pk;
      coarse.cubes[pk].children.push_back(k);
    }
  }
  // constants
  t.C1 = 0.0;
  t.a0 = 1.0;
  t.C_disc = 1.0;
  for (const auto& gen : t.gens) {
    for (const auto& q : gen.cubes) t.C1 = std::max(t.C1, diameter(c.points, q.members) / gen.side);
    std::vector<std::size_t> centers;
    for (const auto& q : gen.cubes) centers.push_back(q.center);
    PointIndex cidx(c.points, centers);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t z : cidx.within(c.points[i], gen.side))
        if (gen.cube_of[z] != gen.cube_of[i]) t.a0 = std::min(t.a0, dist(c.points[i], c.points[z]) / gen.side);
    for (const auto& q : gen.cubes) {
      if (q.parent != npos) {
        const auto& par = t.gens[std::size_t(gen.j - j_min - 1)].cubes[q.parent];
        t.C_disc = std::max(t.C_disc, par.mass / q.mass);
      }
    }
  }
  for (const auto& q : t.gens.back().cubes)
    for (std::size_t i : q.members) t.C_disc = std::max(t.C_disc, q.mass / c.weights[i]);
  return t;
}

inline DyadicTree build_cubes(const WeightedCloud& c, double delta) {
  auto [a, b] = feasible_scales(c, delta);
  return build_cubes(c, delta, a, b);
}

// ---------------------------------------------------------------------------
// Axiom verification

struct AxiomReport {
  bool partition = true, nesting = true, diameter = true, inner_ball = true;
  double C1 = 0.0, a0 = 0.0;
  double eta_hat = std::numeric_limits<double>::quiet_NaN();
  double C2 = 0.0, r2 = 0.0;
  std::vector<double> t_grid, envelope;  // envelope: max layer ratio over cubes at each t
  std::size_t fitted_generations = 0, samples = 0, empty_layers = 0;
  std::string witness;
  bool exact_ok() const { return partition && nesting && diameter && inner_ball; }
};

// Distance from every point to the nearest point outside its own generation-g cube, capped at `cap`.
inline std::vector<double> boundary_distances(const WeightedCloud& c, const Generation& gen, double cap) {
  const std::size_t n = c.size();
  std::vector<double> out(n, std::numeric_limits<double>::infinity());
  std::vector<PointIndex> per;
  per.reserve(gen.cubes.size());
  std::vector<std::size_t> centers;
  double maxrad = 0;
  for (const auto& q : gen.cubes) {
    per.emplace_back(c.points, q.members);
    centers.push_back(q.center);
    for (std::size_t i : q.members) maxrad = std::max(maxrad, dist(c.points[i], c.points[q.center]));
  }
  PointIndex cidx(c.points, centers);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t own = gen.cube_of[i];
    for (std::size_t z : cidx.within(c.points[i], cap + maxrad)) {
      std::size_t k = gen.cube_of[z];
      if (k == own) continue;
      double d = per[k].nearest_distance(c.points[i]);
      if (d <= cap) out[i] = std::min(out[i], d);
    }
  }
  return out;
}

inline AxiomReport verify_cube_axioms(const DyadicTree& t, const WeightedCloud& c, std::span<const double> t_grid,
                                      double C1_max = 8.0, double spacing_factor = 2.0) {
  AxiomReport r;
  const std::size_t n = c.size();
  r.C1 = 0;
  r.a0 = 1.0;
  for (const auto& gen : t.gens) {
    std::vector<int> seen(n, 0);
    for (std::size_t k = 0; k < gen.cubes.size(); ++k)
      for (std::size_t i : gen.cubes[k].members) {
        ++seen[i];
        if (gen.cube_of[i] != k) r.partition = false;
      }
    for (std::size_t i = 0; i < n; ++i)
      if (seen[i] != 1 && r.partition) {
        r.partition = false;
        r.witness = "point " + std::to_string(i) + " covered " + std::to_string(seen[i]) + " times at j=" +
                    std::to_string(gen.j);
      }
    if (gen.j > t.j_min) {
      const auto& coarse = t.gen(gen.j - 1);
      for (std::size_t k = 0; k < gen.cubes.size(); ++k) {
        std::size_t pk = gen.cubes[k].parent;
        for (std::size_t i : gen.cubes[k].members)
          if (coarse.cube_of[i] != pk && r.nesting) {
            r.nesting = false;
            r.witness = "cube " + std::to_string(k) + " at j=" + std::to_string(gen.j) + " leaves its parent";
          }
      }
    }
    for (std::size_t k = 0; k < gen.cubes.size(); ++k) {
      const auto& q = gen.cubes[k];
      double d = diameter(c.points, q.members);
      r.C1 = std::max(r.C1, d / gen.side);
      // inner ball: nearest non-member of the centre
      bool centre_inside = gen.cube_of[q.center] == k;
      if (!centre_inside) {
        r.inner_ball = false;
        r.witness = "centre outside its cube at j=" + std::to_string(gen.j);
      }
    }
    auto bd = boundary_distances(c, gen, gen.side);
    for (const auto& q : gen.cubes) r.a0 = std::min(r.a0, bd[q.center] / gen.side);
  }
  if (r.C1 > C1_max) {
    r.diameter = false;
    if (r.witness.empty()) r.witness = "measured C1 exceeds bound";
  }
  if (!(r.a0 > 0)) {
    r.inner_ball = false;
    if (r.witness.empty()) r.witness = "inner-ball constant is zero";
  }
  // small boundary, statistically
  double sp = local_spacing(c, [&] {
    std::vector<std::size_t> all(n);
    std::iota(all.begin(), all.end(), 0);
    return all;
  }());
  r.t_grid.assign(t_grid.begin(), t_grid.end());
  r.envelope.assign(t_grid.size(), 0.0);
  double tmin = *std::min_element(t_grid.begin(), t_grid.end());
  double tmax = *std::max_element(t_grid.begin(), t_grid.end());
  std::vector<double> xs, ys;
  for (const auto& gen : t.gens) {
    if (gen.cubes.size() < 2) continue;
    if (tmin * gen.side < spacing_factor * sp) continue;
    ++r.fitted_generations;
    auto bd = boundary_distances(c, gen, tmax * gen.side);
    for (const auto& q : gen.cubes) {
      for (std::size_t a = 0; a < t_grid.size(); ++a) {
        double eps = t_grid[a] * gen.side;
        KahanSum m;
        for (std::size_t i : q.members)
          if (bd[i] <= eps) m.add(c.weights[i]);
        double ratio = m.value() / q.mass;
        r.envelope[a] = std::max(r.envelope[a], ratio);
        if (ratio > 0) {
          xs.push_back(t_grid[a]);
          ys.push_back(ratio);
        } else {
          ++r.empty_layers;
        }
      }
    }
  }
  // pooled regression over (cube, t) samples; C2 is the least constant covering every sample
  if (xs.size() >= 2) {
    auto fit = fit_loglog(xs, ys);
    r.eta_hat = fit.slope;
    r.r2 = fit.r2;
    r.C2 = 0;
    for (std::size_t k = 0; k < xs.size(); ++k) r.C2 = std::max(r.C2, ys[k] / std::pow(xs[k], r.eta_hat));
    r.samples = xs.size();
  }
  return r;
}

// Boundary-layer grid t = eps/l(Q) for verify_cube_axioms: from 1e-2, raised when the cloud is too
// coarse for the coarsest multi-cube generation to resolve it, up to 1/2.
inline std::vector<double> boundary_t_grid(const DyadicTree& t, const WeightedCloud& c, std::size_t n = 6) {
  double side = t.gens.empty() ? 1.0 : t.gens.front().side;
  for (const auto& g : t.gens)
    if (g.cubes.size() >= 2) {
      side = g.side;
      break;
    }
  double lo = std::clamp(4.0 * c.spacing / side, 1e-2, 0.1);
  return logspace(lo, 0.5, n);
}

// ---------------------------------------------------------------------------
// Neighbours

inline double set_distance(const WeightedCloud& c, std::span<const std::size_t> a, std::span<const std::size_t> b) {
  if (a.size() > b.size()) std::swap(a, b);
  PointIndex ib(c.points, std::vector<std::size_t>(b.begin(), b.end()));
  double d = std::numeric_limits<double>::infinity();
  for (std::size_t i : a) d = std::min(d, ib.nearest_distance(c.points[i]));
  return d;
}

inline std::vector<std::size_t> neighbors(const DyadicTree& t, const WeightedCloud& c, int j, std::size_t k) {
  const auto& gen = t.gen(j);
  const auto& q = gen.cubes.at(k);
  double rad = 0;
  for (const auto& o : gen.cubes)
    for (std::size_t i : o.members) rad = std::max(rad, dist(c.points[i], c.points[o.center]));
  std::vector<std::size_t> out;
  for (std::size_t m = 0; m < gen.cubes.size(); ++m) {
    if (m == k) continue;
    if (dist(c.points[gen.cubes[m].center], c.points[q.center]) > gen.side + 2 * rad) continue;
    if (set_distance(c, q.members, gen.cubes[m].members) < gen.side) out.push_back(m);
  }
  return out;
}

inline std::vector<std::size_t> hat(const DyadicTree& t, const WeightedCloud& c, int j, std::size_t k) {
  std::vector<std::size_t> out = t.gen(j).cubes.at(k).members;
  for (std::size_t m : neighbors(t, c, j, k)) {
    const auto& mem = t.gen(j).cubes[m].members;
    out.insert(out.end(), mem.begin(), mem.end());
  }
  std::sort(out.begin(), out.end());
  return out;
}

// ---------------------------------------------------------------------------
// Whitney

struct WhitneyCube {
  int j = 0;                 // generation; j_max + 1 for singleton atoms
  std::size_t cube = npos;   // index within the generation, npos for atoms
  std::vector<std::size_t> members;
  double side = 0.0;
  bool atom() const { return cube == npos; }
};

inline std::vector<WhitneyCube> whitney(const WeightedCloud& c, const DyadicTree& t,
                                        std::span<const std::size_t> openset, bool atoms = true) {
  const std::size_t n = c.size();
  std::vector<char> open(n, 0);
  for (std::size_t i : openset) open.at(i) = 1;
  std::vector<std::size_t> comp;
  for (std::size_t i = 0; i < n; ++i)
    if (!open[i]) comp.push_back(i);
  if (openset.empty() || comp.empty()) throw ParameterError("whitney: open set and complement must be nonempty");
  PointIndex ci(c.points, comp);
  std::vector<double> dcomp(n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    if (open[i]) dcomp[i] = ci.nearest_distance(c.points[i]);
  std::vector<WhitneyCube> out;
  std::vector<char> covered(n, 0);
  for (const auto& gen : t.gens) {
    for (std::size_t k = 0; k < gen.cubes.size(); ++k) {
      const auto& q = gen.cubes[k];
      if (covered[q.members.front()]) continue;
      bool ok = true;
      double d = std::numeric_limits<double>::infinity();
      for (std::size_t i : q.members) {
        if (!open[i]) {
          ok = false;
          break;
        }
        d = std::min(d, dcomp[i]);
      }
      if (!ok || gen.side > d) continue;
      out.push_back({gen.j, k, q.members, gen.side});
      for (std::size_t i : q.members) covered[i] = 1;
    }
  }
  if (atoms)
    for (std::size_t i = 0; i < n; ++i)
      if (open[i] && !covered[i]) out.push_back({t.j_max + 1, npos, {i}, 0.0});
  return out;
}

// ---------------------------------------------------------------------------
// Calderon-Zygmund

struct BadPart {
  int j = 0;
  std::size_t cube = npos;
  std::vector<std::size_t> members;
  std::vector<double> values;  // aligned with members
};

struct CZParts {
  std::vector<double> g;
  std::vector<BadPart> bad;
  double alpha = 0.0;
  double C_disc = 0.0;
  bool root_stopped = false;  // some root already exceeds alpha on average
  // L1 bookkeeping: ||f||_1 = ||1_{Omega^c} f||_1 + sum over stopping cubes of ||f 1_Q||_1
  double l1_f = 0.0, l1_off = 0.0, l1_stopping = 0.0;
};

inline CZParts cz_decompose(const WeightedCloud& c, const DyadicTree& t, std::span<const double> f, double alpha,
                            std::span<const WhitneyCube> roots) {
  if (!(alpha > 0)) throw ParameterError("cz_decompose: alpha must be positive");
  if (f.size() != c.size()) throw ParameterError("cz_decompose: f has wrong length");
  CZParts out;
  out.alpha = alpha;
  out.C_disc = t.C_disc;
  out.g.assign(f.begin(), f.end());
  auto avg_abs = [&](const std::vector<std::size_t>& mem, double& mass) {
    KahanSum m, s;
    for (std::size_t i : mem) {
      m.add(c.weights[i]);
      s.add(c.weights[i] * std::abs(f[i]));
    }
    mass = m.value();
    return s.value() / mass;
  };
  auto stop = [&](int j, std::size_t cube, const std::vector<std::size_t>& mem) {
    KahanSum m, s;
    for (std::size_t i : mem) {
      m.add(c.weights[i]);
      s.add(c.weights[i] * f[i]);
    }
    double avg = s.value() / m.value();
    BadPart b{j, cube, mem, {}};
    for (std::size_t i : mem) {
      b.values.push_back(f[i] - avg);
      out.g[i] = avg;
    }
    out.bad.push_back(std::move(b));
  };
  // depth-first over descendants, atoms below the finest generation
  std::function<void(int, std::size_t)> visit = [&](int j, std::size_t k) {
    const auto& q = t.gen(j).cubes[k];
    double mass;
    if (avg_abs(q.members, mass) > alpha) {
      stop(j, k, q.members);
      return;
    }
    if (j == t.j_max) {
      for (std::size_t i : q.members)
        if (std::abs(f[i]) > alpha) stop(j + 1, npos, {i});
      return;
    }
    for (std::size_t ch : q.children) visit(j + 1, ch);
  };
  for (const auto& r : roots) {
    if (r.atom()) {
      if (std::abs(f[r.members[0]]) > alpha) {
        out.root_stopped = true;
        stop(r.j, npos, r.members);
      }
      continue;
    }
    double mass;
    if (avg_abs(r.members, mass) > alpha) {
      out.root_stopped = true;
      stop(r.j, r.cube, r.members);
      continue;
    }
    visit(r.j, r.cube);
  }
  KahanSum lf, loff, lst;
  std::vector<char> stopped(c.size(), 0);
  for (const auto& b : out.bad)
    for (std::size_t i : b.members) {
      stopped[i] = 1;
      lst.add(c.weights[i] * std::abs(f[i]));
    }
  for (std::size_t i = 0; i < c.size(); ++i) {
    lf.add(c.weights[i] * std::abs(f[i]));
    if (!stopped[i]) loff.add(c.weights[i] * std::abs(f[i]));
  }
  out.l1_f = lf.value();
  out.l1_off = loff.value();
  out.l1_stopping = lst.value();
  return out;
}

}  // namespace homtype
