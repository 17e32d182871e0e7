#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "homtype/error.hpp"
#include "homtype/numeric.hpp"

namespace homtype {

inline constexpr std::size_t npos = std::size_t(-1);

struct Point {
  double x = 0.0;
  double y = 0.0;
  friend bool operator==(const Point&, const Point&) = default;
};

inline double dist(const Point& a, const Point& b) {
  double dx = a.x - b.x, dy = a.y - b.y;
  return std::sqrt(dx * dx + dy * dy);
}

// Relative slack of the open-ball test. Distances that equal the radius up to
// rounding count as on the sphere, hence outside.
inline constexpr double kBallTol = 1e-13;

inline double open_radius(double r) { return r * (1.0 - kBallTol); }
inline bool inside(double d, double r) { return d < open_radius(r); }

struct BallSpec {
  Point center;
  double radius = 1.0;
};

struct CurveParam {
  double t = 0.0;
  double speed = 1.0;
  friend bool operator==(const CurveParam&, const CurveParam&) = default;
};

struct WeightedCloud {
  int dim = 2;
  std::vector<Point> points;
  std::vector<double> weights;
  std::vector<CurveParam> params;  // empty when the cloud carries no curve metadata
  std::string label;
  double spacing = 0.0;  // nominal maximal sample spacing
  bool aliased = false;  // sampler hit its minimum step inside an oscillation

  std::size_t size() const { return points.size(); }
  bool has_params() const { return !params.empty(); }
  double total_mass() const { return ksum(weights); }
};

// Checks the invariants and merges coincident points by summing weights.
// The first occurrence keeps its position in the ordering.
inline void normalize(WeightedCloud& c) {
  if (c.dim != 1 && c.dim != 2) throw ParameterError("cloud dimension must be 1 or 2");
  if (c.points.size() != c.weights.size())
    throw ParameterError("points and weights differ in length");
  if (!c.params.empty() && c.params.size() != c.points.size())
    throw ParameterError("params and points differ in length");
  if (c.points.empty()) throw ParameterError("empty cloud");
  for (std::size_t i = 0; i < c.size(); ++i) {
    if (!(c.weights[i] > 0) || !std::isfinite(c.weights[i]))
      throw ParameterError("weights must be positive and finite");
    if (!std::isfinite(c.points[i].x) || !std::isfinite(c.points[i].y))
      throw ParameterError("non-finite coordinate");
    if (c.dim == 1) c.points[i].y = 0.0;
  }
  std::vector<std::size_t> order(c.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const Point &p = c.points[a], &q = c.points[b];
    if (p.x != q.x) return p.x < q.x;
    if (p.y != q.y) return p.y < q.y;
    return a < b;
  });
  std::vector<std::size_t> owner(c.size());
  bool dup = false;
  for (std::size_t k = 0; k < order.size(); ++k) {
    if (k > 0 && c.points[order[k]] == c.points[order[k - 1]]) {
      owner[order[k]] = owner[order[k - 1]];
      dup = true;
    } else {
      owner[order[k]] = order[k];
    }
  }
  if (!dup) return;
  WeightedCloud out;
  out.dim = c.dim;
  out.label = c.label;
  out.spacing = c.spacing;
  out.aliased = c.aliased;
  std::vector<std::size_t> slot(c.size(), std::size_t(-1));
  for (std::size_t i = 0; i < c.size(); ++i) {
    std::size_t o = owner[i];
    if (slot[o] == std::size_t(-1)) {
      slot[o] = out.points.size();
      out.points.push_back(c.points[o]);
      out.weights.push_back(0.0);
      if (!c.params.empty()) out.params.push_back(c.params[o]);
    }
    out.weights[slot[o]] += c.weights[i];
  }
  c = std::move(out);
}

inline WeightedCloud make_cloud(int dim, std::vector<Point> pts, std::vector<double> w,
                                std::string label = {}, double spacing = 0.0) {
  WeightedCloud c;
  c.dim = dim;
  c.points = std::move(pts);
  c.weights = std::move(w);
  c.label = std::move(label);
  c.spacing = spacing;
  normalize(c);
  return c;
}

// Uniform cloud of n points on [a, b] with total mass b - a.
inline WeightedCloud uniform_line(double a, double b, std::size_t n, std::string label = "line") {
  std::vector<Point> pts(n);
  std::vector<double> w(n, (b - a) / double(n));
  double h = (b - a) / double(n);
  for (std::size_t i = 0; i < n; ++i) pts[i] = {a + (double(i) + 0.5) * h, 0.0};
  return make_cloud(1, std::move(pts), std::move(w), std::move(label), h);
}

// m x m cell-centred grid on [0, side]^2 with total mass side^2.
inline WeightedCloud uniform_grid(std::size_t m, double side = 1.0, std::string label = "grid") {
  double h = side / double(m);
  std::vector<Point> pts;
  pts.reserve(m * m);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j) pts.push_back({(double(i) + 0.5) * h, (double(j) + 0.5) * h});
  std::vector<double> w(m * m, h * h);
  return make_cloud(2, std::move(pts), std::move(w), std::move(label), h);
}

inline WeightedCloud subset(const WeightedCloud& c, const std::vector<std::size_t>& idx) {
  WeightedCloud out;
  out.dim = c.dim;
  out.label = c.label;
  out.spacing = c.spacing;
  out.aliased = c.aliased;
  out.points.reserve(idx.size());
  out.weights.reserve(idx.size());
  for (std::size_t i : idx) {
    out.points.push_back(c.points[i]);
    out.weights.push_back(c.weights[i]);
    if (c.has_params()) out.params.push_back(c.params[i]);
  }
  return out;
}

}  // namespace homtype
