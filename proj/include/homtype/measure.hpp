#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "homtype/cloud.hpp"
#include "homtype/spatial.hpp"

namespace homtype {

inline double mu_ball(const WeightedCloud& c, const BallSpec& b) {
  KahanSum s;
  for (std::size_t i = 0; i < c.size(); ++i)
    if (inside(dist(b.center, c.points[i]), b.radius)) s.add(c.weights[i]);
  return s.value();
}

inline std::vector<std::size_t> ball_indices(const WeightedCloud& c, const BallSpec& b) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < c.size(); ++i)
    if (inside(dist(b.center, c.points[i]), b.radius)) out.push_back(i);
  return out;
}

// Sorted distances from a centre with prefix masses; answers ball-mass queries in O(log n).
struct Profile {
  std::vector<double> d;
  std::vector<double> cum;  // cum[k] = mass of the k nearest points
  std::vector<std::size_t> idx;

  // mass of {d < r} under the open-ball convention
  double open_mass(double r) const {
    auto k = std::lower_bound(d.begin(), d.end(), open_radius(r)) - d.begin();
    return cum[std::size_t(k)];
  }
  // mass of {d <= r}
  double closed_mass(double r) const {
    auto k = std::upper_bound(d.begin(), d.end(), r) - d.begin();
    return cum[std::size_t(k)];
  }
  double total() const { return cum.back(); }
};

inline Profile distance_profile(const WeightedCloud& c, const Point& center,
                                double rmax = std::numeric_limits<double>::infinity()) {
  std::vector<std::pair<double, std::size_t>> tmp;
  tmp.reserve(c.size());
  for (std::size_t i = 0; i < c.size(); ++i) {
    double d = dist(center, c.points[i]);
    if (d <= rmax) tmp.emplace_back(d, i);
  }
  std::sort(tmp.begin(), tmp.end());
  Profile p;
  p.d.resize(tmp.size());
  p.idx.resize(tmp.size());
  p.cum.resize(tmp.size() + 1);
  KahanSum s;
  p.cum[0] = 0.0;
  for (std::size_t k = 0; k < tmp.size(); ++k) {
    p.d[k] = tmp[k].first;
    p.idx[k] = tmp[k].second;
    s.add(c.weights[tmp[k].second]);
    p.cum[k + 1] = s.value();
  }
  return p;
}

inline double lambda(const WeightedCloud& c, const Point& x, const Point& y) {
  if (x == y) throw DegeneratePairError("lambda undefined on the diagonal");
  return mu_ball(c, {x, dist(x, y)});
}

// Spacing relevant to a set of points: arc weights for curve and line clouds, nominal spacing otherwise.
inline double local_spacing(const WeightedCloud& c, std::span<const std::size_t> idx) {
  if (c.dim == 2 && !c.has_params()) return c.spacing;
  double s = 0.0;
  for (std::size_t i : idx) s = std::max(s, c.weights[i]);
  return s;
}

// Mass-weighted mean atom size sum(w^2)/sum(w) of a set; the spacing that governs its mass error.
inline double mass_spacing(const WeightedCloud& c, std::span<const std::size_t> idx) {
  if (c.dim == 2 && !c.has_params()) return c.spacing;
  KahanSum w, w2;
  for (std::size_t i : idx) {
    w.add(c.weights[i]);
    w2.add(c.weights[i] * c.weights[i]);
  }
  return w.value() > 0 ? w2.value() / w.value() : 0.0;
}

// Distance of every near-boundary point to the opposite side of a ball, capped at eps_max.
// Serves all layer queries with eps <= eps_max.
struct LayerProfile {
  BallSpec ball;
  double eps_max = 0.0;
  double ball_mass = 0.0;
  bool degenerate = false;  // ball or its complement is empty
  std::vector<double> d;    // ascending
  std::vector<std::size_t> idx;
  std::vector<double> cum;

  double mass(double eps) const {
    if (degenerate) return 0.0;
    auto k = std::upper_bound(d.begin(), d.end(), eps) - d.begin();
    return cum[std::size_t(k)];
  }
  std::vector<std::size_t> indices(double eps) const {
    std::vector<std::size_t> out;
    if (degenerate) return out;
    auto k = std::size_t(std::upper_bound(d.begin(), d.end(), eps) - d.begin());
    out.assign(idx.begin(), idx.begin() + std::ptrdiff_t(k));
    std::sort(out.begin(), out.end());
    return out;
  }
};

inline LayerProfile layer_profile(const WeightedCloud& c, const BallSpec& b, double eps_max) {
  if (!(eps_max > 0)) throw ParameterError("layer: eps must be positive");
  LayerProfile lp;
  lp.ball = b;
  lp.eps_max = eps_max;
  double lo = open_radius(b.radius) - eps_max, hi = b.radius + eps_max;
  std::vector<std::size_t> in_ann, out_ann;
  std::size_t n_in = 0;
  KahanSum bm;
  for (std::size_t i = 0; i < c.size(); ++i) {
    double d = dist(b.center, c.points[i]);
    bool in = inside(d, b.radius);
    if (in) {
      ++n_in;
      bm.add(c.weights[i]);
    }
    if (d >= lo && d <= hi) (in ? in_ann : out_ann).push_back(i);
  }
  lp.ball_mass = bm.value();
  if (n_in == 0 || n_in == c.size()) {
    lp.degenerate = true;
    lp.cum = {0.0};
    return lp;
  }
  PointIndex tin(c.points, in_ann), tout(c.points, out_ann);
  std::vector<std::pair<double, std::size_t>> hits;
  for (std::size_t i : in_ann) {
    double d = tout.nearest_distance(c.points[i]);
    if (d <= eps_max) hits.emplace_back(d, i);
  }
  for (std::size_t i : out_ann) {
    double d = tin.nearest_distance(c.points[i]);
    if (d <= eps_max) hits.emplace_back(d, i);
  }
  std::sort(hits.begin(), hits.end());
  lp.d.resize(hits.size());
  lp.idx.resize(hits.size());
  lp.cum.resize(hits.size() + 1);
  KahanSum s;
  lp.cum[0] = 0.0;
  for (std::size_t k = 0; k < hits.size(); ++k) {
    lp.d[k] = hits[k].first;
    lp.idx[k] = hits[k].second;
    s.add(c.weights[hits[k].second]);
    lp.cum[k + 1] = s.value();
  }
  return lp;
}

struct LayerResult {
  std::vector<std::size_t> indices;
  double mass = 0.0;
  bool degenerate = false;
  bool resolved = true;  // eps >= 10 x mass spacing of the layer
  double spacing = 0.0;
};

inline LayerResult layer(const WeightedCloud& c, const BallSpec& b, double eps) {
  auto lp = layer_profile(c, b, eps);
  LayerResult r;
  r.degenerate = lp.degenerate;
  r.indices = lp.indices(eps);
  r.mass = lp.mass(eps);
  r.spacing = mass_spacing(c, r.indices);
  r.resolved = eps >= 10.0 * r.spacing;
  return r;
}

// Indices of B(z, r) \ B(z, r - s).
inline std::vector<std::size_t> corona_indices(const WeightedCloud& c, const Point& z, double r, double s) {
  if (!(s > 0) || !(s < r)) throw ParameterError("corona requires 0 < s < r");
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < c.size(); ++i) {
    double d = dist(z, c.points[i]);
    if (inside(d, r) && !inside(d, r - s)) out.push_back(i);
  }
  return out;
}

inline double corona(const WeightedCloud& c, const Point& z, double r, double s) {
  KahanSum m;
  for (std::size_t i : corona_indices(c, z, r, s)) m.add(c.weights[i]);
  return m.value();
}

struct DoublingResult {
  double constant = 0.0;
  std::size_t skipped = 0;
  BallSpec witness;
};

inline DoublingResult doubling_constant(const WeightedCloud& c, std::span<const BallSpec> sample) {
  DoublingResult r;
  for (const auto& b : sample) {
    double m1 = mu_ball(c, b);
    if (m1 <= 0) {
      ++r.skipped;
      continue;
    }
    double q = mu_ball(c, {b.center, 2 * b.radius}) / m1;
    if (q > r.constant) {
      r.constant = q;
      r.witness = b;
    }
  }
  return r;
}

inline double maximal_function(const WeightedCloud& c, std::span<const double> f, const Point& x,
                               std::span<const double> radii) {
  if (f.size() != c.size()) throw ParameterError("maximal_function: f has wrong length");
  std::vector<double> sorted(radii.begin(), radii.end());
  std::sort(sorted.begin(), sorted.end());
  auto prof = distance_profile(c, x);
  std::vector<double> fcum(prof.d.size() + 1, 0.0);
  KahanSum s;
  for (std::size_t k = 0; k < prof.d.size(); ++k) {
    s.add(c.weights[prof.idx[k]] * std::abs(f[prof.idx[k]]));
    fcum[k + 1] = s.value();
  }
  double best = 0.0;
  for (double r : sorted) {
    auto k = std::size_t(std::lower_bound(prof.d.begin(), prof.d.end(), open_radius(r)) - prof.d.begin());
    if (prof.cum[k] > 0) best = std::max(best, fcum[k] / prof.cum[k]);
  }
  return best;
}

inline double diameter_bruteforce(const WeightedCloud& c) {
  double d = 0;
  for (std::size_t i = 0; i < c.size(); ++i)
    for (std::size_t j = i + 1; j < c.size(); ++j) d = std::max(d, dist(c.points[i], c.points[j]));
  return d;
}

// Exact diameter via the convex hull.
inline double diameter(const std::vector<Point>& pts, std::span<const std::size_t> idx) {
  using BP = PointIndex::BPoint;
  bg::model::multi_point<BP> mp;
  for (std::size_t i : idx) mp.emplace_back(pts[i].x, pts[i].y);
  if (mp.size() < 2) return 0.0;
  bg::model::polygon<BP> hull;
  bg::convex_hull(mp, hull);
  const auto& ring = hull.outer();
  std::vector<Point> h;
  for (const auto& p : ring) h.push_back({bg::get<0>(p), bg::get<1>(p)});
  if (h.size() < 2) {
    double d = 0;
    for (std::size_t i : idx)
      for (std::size_t j : idx) d = std::max(d, dist(pts[i], pts[j]));
    return d;
  }
  double d = 0;
  for (std::size_t i = 0; i < h.size(); ++i)
    for (std::size_t j = i + 1; j < h.size(); ++j) d = std::max(d, dist(h[i], h[j]));
  return d;
}

inline double diameter(const WeightedCloud& c) {
  std::vector<std::size_t> idx(c.size());
  std::iota(idx.begin(), idx.end(), 0);
  return diameter(c.points, idx);
}

inline double min_pair_distance(const WeightedCloud& c) {
  if (c.size() < 2) return 0.0;
  PointIndex t(c.points);
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < c.size(); ++i) {
    auto nn = t.knn(c.points[i], 2);
    for (std::size_t j : nn)
      if (j != i) best = std::min(best, dist(c.points[i], c.points[j]));
  }
  return best;
}

}  // namespace homtype
