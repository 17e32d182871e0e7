#pragma once

#ifndef BOOST_ALLOW_DEPRECATED_HEADERS
#define BOOST_ALLOW_DEPRECATED_HEADERS
#endif
#include <boost/geometry.hpp>
#include <boost/geometry/index/rtree.hpp>
#include <limits>
#include <utility>
#include <vector>

#include "homtype/cloud.hpp"

namespace homtype {

namespace bg = boost::geometry;
namespace bgi = boost::geometry::index;

// R-tree over a subset of cloud points, addressed by cloud index.
class PointIndex {
 public:
  using BPoint = bg::model::point<double, 2, bg::cs::cartesian>;
  using Box = bg::model::box<BPoint>;
  using Entry = std::pair<BPoint, std::size_t>;

  PointIndex() = default;

  PointIndex(const std::vector<Point>& pts, const std::vector<std::size_t>& ids) {
    std::vector<Entry> e;
    e.reserve(ids.size());
    for (std::size_t i : ids) e.emplace_back(BPoint(pts[i].x, pts[i].y), i);
    tree_ = Tree(e.begin(), e.end());
  }

  explicit PointIndex(const std::vector<Point>& pts) {
    std::vector<Entry> e;
    e.reserve(pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i) e.emplace_back(BPoint(pts[i].x, pts[i].y), i);
    tree_ = Tree(e.begin(), e.end());
  }

  void insert(const Point& p, std::size_t id) { tree_.insert(Entry(BPoint(p.x, p.y), id)); }

  // True if some indexed point lies at distance < r.
  bool any_closer(const Point& p, double r) const {
    double pad = r * (1 + 1e-12);
    Box box(BPoint(p.x - pad, p.y - pad), BPoint(p.x + pad, p.y + pad));
    for (auto it = tree_.qbegin(bgi::intersects(box)); it != tree_.qend(); ++it)
      if (dist(p, {bg::get<0>(it->first), bg::get<1>(it->first)}) < r) return true;
    return false;
  }

  bool empty() const { return tree_.empty(); }
  std::size_t size() const { return tree_.size(); }

  // Distance to the nearest indexed point (infinity when empty).
  double nearest_distance(const Point& p) const {
    double best = std::numeric_limits<double>::infinity();
    for (auto it = tree_.qbegin(bgi::nearest(BPoint(p.x, p.y), 1)); it != tree_.qend(); ++it)
      best = dist(p, {bg::get<0>(it->first), bg::get<1>(it->first)});
    return best;
  }

  // Nearest point with lowest-index tie-break. Returns (distance, index).
  std::pair<double, std::size_t> nearest(const Point& p) const {
    double d = nearest_distance(p);
    std::size_t best = std::size_t(-1);
    if (!std::isfinite(d)) return {d, best};
    double pad = d * (1 + 1e-12) + 1e-300;
    Box box(BPoint(p.x - pad, p.y - pad), BPoint(p.x + pad, p.y + pad));
    for (auto it = tree_.qbegin(bgi::intersects(box)); it != tree_.qend(); ++it) {
      Point q{bg::get<0>(it->first), bg::get<1>(it->first)};
      if (dist(p, q) == d && it->second < best) best = it->second;
    }
    return {d, best};
  }

  // Indices of points with distance <= r (closed), ascending.
  std::vector<std::size_t> within(const Point& p, double r) const {
    std::vector<std::size_t> out;
    double pad = r * (1 + 1e-12);
    Box box(BPoint(p.x - pad, p.y - pad), BPoint(p.x + pad, p.y + pad));
    for (auto it = tree_.qbegin(bgi::intersects(box)); it != tree_.qend(); ++it) {
      Point q{bg::get<0>(it->first), bg::get<1>(it->first)};
      if (dist(p, q) <= r) out.push_back(it->second);
    }
    std::sort(out.begin(), out.end());
    return out;
  }

  // Calls fn(index, distance) for every point with distance <= r, in tree order.
  template <class F>
  void visit(const Point& p, double r, F&& fn) const {
    double pad = r * (1 + 1e-12);
    Box box(BPoint(p.x - pad, p.y - pad), BPoint(p.x + pad, p.y + pad));
    for (auto it = tree_.qbegin(bgi::intersects(box)); it != tree_.qend(); ++it) {
      double d = dist(p, {bg::get<0>(it->first), bg::get<1>(it->first)});
      if (d <= r) fn(it->second, d);
    }
  }

  // k nearest indices (unordered ties resolved by the tree).
  std::vector<std::size_t> knn(const Point& p, std::size_t k) const {
    std::vector<std::size_t> out;
    for (auto it = tree_.qbegin(bgi::nearest(BPoint(p.x, p.y), unsigned(k))); it != tree_.qend(); ++it)
      out.push_back(it->second);
    return out;
  }

 private:
  using Tree = bgi::rtree<Entry, bgi::rstar<16>>;
  Tree tree_;
};

}  // namespace homtype
