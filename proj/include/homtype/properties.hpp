#pragma once

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <numeric>
#include <random>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include "homtype/curves.hpp"
#include "homtype/measure.hpp"
#include "homtype/parallel.hpp"
#include "homtype/spatial.hpp"

namespace homtype {

// Portable uniform draws on top of mt19937_64 (the standard distributions are not
// reproducible across library implementations).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : g_(seed) {}
  double uniform() { return double(g_() >> 11) * 0x1.0p-53; }
  std::size_t index(std::size_t n) { return std::min(n - 1, std::size_t(uniform() * double(n))); }

 private:
  std::mt19937_64 g_;
};

struct Thresholds {
  double hold_eta = 0.2;
  double hold_r2 = 0.9;
  double fail_eta = 0.05;
  double trend_factor = 2.0;   // growth of the constant that counts as unbounded
  double hold_decades = 1.0;   // range needed for "holds"
  double trend_decades = 2.0;  // separation needed for a trend witness
  double m_hold = 4.0;         // (M) constant accepted as bounded
  double hb_hold = 8.0;        // (HB) constant accepted as bounded
  double witness_floor = 0.05; // least measure ratio of a single-source decay witness
  double flat_decades = 1.5;   // range of a single-source slope witness
};

struct ScanCfg {
  std::uint64_t seed = 1;
  std::size_t balls = 200;
  double r_min_spacings = 100;  // smallest sampled radius in units of the cloud spacing
  double r_max_fraction = 0.25;  // largest sampled radius as a fraction of the diameter
  std::vector<double> theta;     // eps/r grid; empty selects a default
  double theta_per_decade = 3;
  double theta_floor = 1e-7;
  double theta_max = 0.3;
  double resolution = 10;        // eps >= resolution * spacing
  std::size_t feature_balls = 100;
  std::size_t window_balls = 24;   // worst balls that receive generated windows
  std::size_t window_centers = 4;
  std::size_t hb_balls = 48;
  std::size_t hb_centers = 4;
  std::size_t cap_pairs = 16;
  std::size_t u_count = 12;
  std::size_t pair_count = 200;
  std::size_t minima_sources = 24;
  std::size_t minima_per_source = 8;
  unsigned threads = 1;
  Thresholds thresholds;
};

struct HBProbe {
  BallSpec ball;
  Point center;  // snapped to the nearest cloud point of the relevant side
};

// Space-specific sampling hints: curve breakpoints and planted witness families.
struct Probes {
  std::vector<Point> features;
  std::vector<BallSpec> balls;                               // extra LD/AD balls
  std::vector<std::pair<BallSpec, BallSpec>> windows;        // (ball, window) for RLD/RAD
  std::vector<std::vector<HBProbe>> hb_families;             // each ordered coarse to fine
};

// ---------------------------------------------------------------------------
// Sampling

namespace detail {

// A layer or corona of width eps is resolved when it is at least `resolution` atoms wide in mass
// spacing and holds at least `resolution` atoms; an empty set needs eps >= resolution * spacing.
inline bool resolved(const WeightedCloud& c, double eps, std::size_t count, double w, double w2, double resolution) {
  if (count == 0) return eps >= resolution * c.spacing;
  double sp = (c.dim == 2 && !c.has_params()) ? c.spacing : w2 / w;
  return double(count) >= resolution && eps >= resolution * sp;
}

inline std::vector<std::size_t> snap(const WeightedCloud& c, std::span<const Point> pts) {
  PointIndex all(c.points);
  std::vector<std::size_t> out;
  for (const auto& p : pts) {
    auto [d, i] = all.nearest(p);
    if (i != npos && std::find(out.begin(), out.end(), i) == out.end()) out.push_back(i);
  }
  return out;
}

}  // namespace detail

inline std::pair<double, double> radius_range(const WeightedCloud& c, const ScanCfg& cfg) {
  double diam = diameter(c);
  double hi = cfg.r_max_fraction * diam;
  double lo = std::min(cfg.r_min_spacings * c.spacing, hi / 10);
  return {lo, hi};
}

inline std::vector<double> theta_grid(const WeightedCloud& c, const ScanCfg& cfg) {
  if (!cfg.theta.empty()) return cfg.theta;
  auto [lo, hi] = radius_range(c, cfg);
  // finest ratio any ball of the sample could resolve; unresolved entries are dropped later
  double w = c.spacing;
  if (c.dim == 1 || c.has_params()) w = *std::min_element(c.weights.begin(), c.weights.end());
  double tmin = std::min(cfg.theta_max / 10, std::max(cfg.theta_floor, cfg.resolution * w / hi));
  auto n = std::size_t(std::ceil(cfg.theta_per_decade * std::log10(cfg.theta_max / tmin))) + 1;
  return logspace(tmin, cfg.theta_max, n);
}

// Stratified random balls (log-uniform radius per stratum, uniform centre index) followed by
// feature balls centred at breakpoints with breakpoint-to-breakpoint radii.
inline std::vector<BallSpec> sample_balls(const WeightedCloud& c, const ScanCfg& cfg, const Probes& probes = {}) {
  auto [lo, hi] = radius_range(c, cfg);
  Rng rng(cfg.seed);
  std::vector<BallSpec> out;
  double a = std::log(lo), b = std::log(hi);
  for (std::size_t k = 0; k < cfg.balls; ++k) {
    double u = (double(k) + rng.uniform()) / double(cfg.balls);
    double r = std::exp(a + (b - a) * u);
    out.push_back({c.points[rng.index(c.size())], r});
  }
  auto fi = detail::snap(c, probes.features);
  std::size_t added = 0;
  for (std::size_t i : fi)
    for (std::size_t j : fi) {
      if (i == j || added >= cfg.feature_balls) continue;
      double r = dist(c.points[i], c.points[j]);
      if (r < lo || r > 2 * hi) continue;
      out.push_back({c.points[i], r});
      ++added;
    }
  for (const auto& pb : probes.balls) out.push_back(pb);
  return out;
}

// ---------------------------------------------------------------------------
// Decay fits

struct DecaySample {
  double ratio = 0.0;    // eps/r or s/r (windowed: eps/R, s/R)
  double measure = 0.0;  // measure ratio
  std::size_t source = 0;
  BallSpec ball;
  BallSpec window{{}, 0.0};  // radius 0 when unwindowed
};

struct DecayFit {
  std::string scan;
  std::vector<double> ratio, measure;  // envelope, ascending in ratio
  std::vector<BallSpec> witness_ball, witness_window;  // per envelope entry
  std::vector<DecaySample> raw;
  double eta = std::numeric_limits<double>::quiet_NaN();
  double C = std::numeric_limits<double>::quiet_NaN();
  double r2 = 0.0;
  std::vector<double> residuals;
  std::size_t sources = 0, skipped = 0, unresolved = 0;

  double decades() const {
    if (ratio.size() < 2) return 0.0;
    return std::log10(ratio.back() / ratio.front());
  }
  // Growth of the constant needed at exponent eta_hold between the coarse part of the scan
  // (ratios >= 10^sep times the finest) and the finest ratio.
  double trend(double eta_hold, double sep_decades) const {
    if (ratio.empty()) return 0.0;
    double fine = measure.front() / std::pow(ratio.front(), eta_hold);
    double coarse = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < ratio.size(); ++k)
      if (ratio[k] >= ratio.front() * std::pow(10.0, sep_decades) * (1 - 1e-9) && measure[k] > 0)
        coarse = std::min(coarse, measure[k] / std::pow(ratio[k], eta_hold));
    return std::isfinite(coarse) ? fine / coarse : 0.0;
  }
  // Samples grouped by source (planted windows share one source), keeping the largest measure
  // per ratio, ascending in ratio.
  std::vector<std::vector<const DecaySample*>> by_source() const {
    std::size_t n = 0;
    for (const auto& s : raw) n = std::max(n, s.source + 1);
    std::vector<std::vector<const DecaySample*>> by(n);
    for (const auto& s : raw) {  // raw is sorted by ratio
      auto& v = by[s.source];
      if (!v.empty() && v.back()->ratio == s.ratio) {
        if (s.measure > v.back()->measure) v.back() = &s;
      } else {
        v.push_back(&s);
      }
    }
    return by;
  }

  // The trend statistic on each source's own resolved ratios. Sources whose finest measure is
  // below `floor` are skipped: a flat but negligible measure (a lone atom) is no witness.
  std::pair<double, DecaySample> source_trend(double eta_hold, double sep_decades, double floor) const {
    std::pair<double, DecaySample> best{0.0, {}};
    for (const auto& v : by_source()) {
      if (v.size() < 2 || v.front()->measure < floor) continue;
      double lo = v.front()->ratio;
      double fine = v.front()->measure / std::pow(lo, eta_hold);
      double coarse = std::numeric_limits<double>::infinity();
      for (const auto* s : v)
        if (s->ratio >= lo * std::pow(10.0, sep_decades) * (1 - 1e-9) && s->measure > 0)
          coarse = std::min(coarse, s->measure / std::pow(s->ratio, eta_hold));
      if (std::isfinite(coarse) && fine / coarse > best.first) best = {fine / coarse, *v.front()};
    }
    return best;
  }

  // Smallest log-log slope of a single source over the first `decades` of its resolved ratios
  // (sources with a shorter range or a finest measure below `floor` are skipped).
  std::pair<double, DecaySample> source_slope(double decades, double floor) const {
    std::pair<double, DecaySample> best{std::numeric_limits<double>::infinity(), {}};
    for (const auto& v : by_source()) {
      if (v.size() < 3 || v.front()->measure < floor) continue;
      double top = v.front()->ratio * std::pow(10.0, decades);
      if (v.back()->ratio < top * (1 - 1e-9)) continue;
      std::vector<double> x, y;
      for (const auto* s : v)
        if (s->ratio <= top * (1 + 1e-9)) {
          x.push_back(s->ratio);
          y.push_back(s->measure);
        }
      auto fit = fit_loglog(x, y);
      if (fit.n >= 3 && fit.slope < best.first) best = {fit.slope, *v.front()};
    }
    return best;
  }
};

namespace detail {

// Envelope over sources at each grid ratio, then the log-log fit.
inline void finish_fit(DecayFit& f, std::span<const double> grid, const std::vector<std::vector<double>>& best,
                       const std::vector<std::vector<std::size_t>>& arg, const std::vector<BallSpec>& balls,
                       const std::vector<BallSpec>& windows) {
  for (std::size_t a = 0; a < grid.size(); ++a) {
    double m = -1;
    std::size_t who = npos;
    for (std::size_t s = 0; s < best.size(); ++s)
      if (best[s][a] > m) {
        m = best[s][a];
        who = arg[s][a];
      }
    if (m < 0) continue;  // no resolved source at this ratio
    f.ratio.push_back(grid[a]);
    f.measure.push_back(m);
    f.witness_ball.push_back(who < balls.size() ? balls[who] : BallSpec{});
    f.witness_window.push_back(who < windows.size() ? windows[who] : BallSpec{{}, 0.0});
  }
  auto fit = fit_loglog(f.ratio, f.measure);
  if (fit.n >= 2) {
    f.eta = fit.slope;
    f.C = fit.constant();
    f.r2 = fit.r2;
    f.residuals = fit.residuals;
  }
  std::sort(f.raw.begin(), f.raw.end(),
            [](const DecaySample& a, const DecaySample& b) { return a.ratio < b.ratio; });
}

}  // namespace detail

// (LD): mass(B_eps)/mass(B) against eps/r, envelope over balls.
inline DecayFit layer_decay_scan(const WeightedCloud& c, std::span<const BallSpec> balls, std::span<const double> theta,
                                 double resolution = 10.0, unsigned threads = 1) {
  DecayFit f;
  f.scan = "LD";
  double tmax = *std::max_element(theta.begin(), theta.end());
  std::vector<std::vector<double>> best(balls.size(), std::vector<double>(theta.size(), -1.0));
  std::vector<std::vector<std::size_t>> arg(balls.size(), std::vector<std::size_t>(theta.size(), npos));
  std::vector<std::vector<DecaySample>> raw(balls.size());
  std::vector<char> skipped(balls.size(), 0);
  std::vector<std::size_t> unres(balls.size(), 0);
  parallel_for(balls.size(), threads, [&](std::size_t k) {
    const auto& b = balls[k];
    auto lp = layer_profile(c, b, tmax * b.radius);
    if (lp.degenerate || lp.ball_mass <= 0) {
      skipped[k] = 1;
      return;
    }
    for (std::size_t a = 0; a < theta.size(); ++a) {
      double eps = theta[a] * b.radius;
      auto kk = std::size_t(std::upper_bound(lp.d.begin(), lp.d.end(), eps) - lp.d.begin());
      KahanSum w, w2;
      for (std::size_t q = 0; q < kk; ++q) {
        double wi = c.weights[lp.idx[q]];
        w.add(wi);
        w2.add(wi * wi);
      }
      if (!detail::resolved(c, eps, kk, w.value(), w2.value(), resolution)) {
        ++unres[k];
        continue;
      }
      double m = lp.cum[kk] / lp.ball_mass;
      best[k][a] = m;
      arg[k][a] = k;
      raw[k].push_back({theta[a], m, k, b, {{}, 0.0}});
    }
  });
  for (std::size_t k = 0; k < balls.size(); ++k) {
    f.skipped += skipped[k];
    f.unresolved += unres[k];
    f.raw.insert(f.raw.end(), raw[k].begin(), raw[k].end());
  }
  f.sources = balls.size() - f.skipped;
  std::vector<BallSpec> bl(balls.begin(), balls.end());
  detail::finish_fit(f, theta, best, arg, bl, {});
  return f;
}

// Balls ranked by their layer ratio at the finest resolved ratio, worst first.
inline std::vector<std::size_t> worst_sources(const DecayFit& f, std::size_t count) {
  std::vector<std::pair<double, std::size_t>> score;
  std::size_t n = 0;
  for (const auto& s : f.raw) n = std::max(n, s.source + 1);
  std::vector<double> m(n, -1), rr(n, std::numeric_limits<double>::infinity());
  for (const auto& s : f.raw)
    if (s.ratio < rr[s.source] || (s.ratio == rr[s.source] && s.measure > m[s.source])) {
      rr[s.source] = s.ratio;
      m[s.source] = s.measure;
    }
  for (std::size_t i = 0; i < n; ++i)
    if (m[i] >= 0) score.emplace_back(-(m[i] / std::pow(std::max(rr[i], 1e-300), 0.2)), i);
  std::sort(score.begin(), score.end());
  std::vector<std::size_t> out;
  for (std::size_t k = 0; k < score.size() && k < count; ++k) out.push_back(score[k].second);
  return out;
}

namespace detail {

inline std::vector<std::size_t> spread(std::vector<std::size_t> idx, std::size_t k) {
  std::sort(idx.begin(), idx.end());
  if (idx.size() <= k) return idx;
  std::vector<std::size_t> out;
  for (std::size_t q = 0; q < k; ++q) out.push_back(idx[(q * idx.size()) / k + idx.size() / (2 * k)]);
  return out;
}

}  // namespace detail

// (RLD): mass(B_eps ∩ B(w,R))/mass(B(w,R)) against eps/R with R <= 2r. Windows: the planted
// (ball, window) pairs plus generated windows on the layers of the given balls.
inline DecayFit relative_layer_decay_scan(const WeightedCloud& c, std::span<const BallSpec> balls,
                                          std::span<const std::pair<BallSpec, BallSpec>> planted,
                                          std::span<const double> theta, std::size_t centers_per_ball = 4,
                                          double resolution = 10.0, unsigned threads = 1) {
  DecayFit f;
  f.scan = "RLD";
  double tmax = *std::max_element(theta.begin(), theta.end());
  double tmin = *std::min_element(theta.begin(), theta.end());
  std::vector<std::pair<BallSpec, BallSpec>> jobs(planted.begin(), planted.end());
  for (const auto& b : balls) {
    auto lp = layer_profile(c, b, tmax * 2 * b.radius);
    if (lp.degenerate) continue;
    auto pts = lp.indices(tmin * b.radius);
    if (pts.empty()) pts = lp.indices(tmax * b.radius);
    auto cen = detail::spread(pts, centers_per_ball);
    for (std::size_t i : cen)
      for (double R : {2 * b.radius, b.radius / 2, b.radius / 8, b.radius / 32}) jobs.push_back({b, {c.points[i], R}});
  }
  PointIndex all(c.points);
  std::vector<std::vector<double>> best(jobs.size(), std::vector<double>(theta.size(), -1.0));
  std::vector<std::vector<std::size_t>> arg(jobs.size(), std::vector<std::size_t>(theta.size(), npos));
  std::vector<std::vector<DecaySample>> raw(jobs.size());
  std::vector<char> skipped(jobs.size(), 0);
  std::vector<std::size_t> unres(jobs.size(), 0);
  parallel_for(jobs.size(), threads, [&](std::size_t k) {
    const auto& [b, w] = jobs[k];
    if (w.radius > 2 * b.radius * (1 + 1e-12)) throw ParameterError("RLD window larger than 2r");
    KahanSum wm;
    all.visit(w.center, w.radius, [&](std::size_t i, double d) {
      if (inside(d, w.radius)) wm.add(c.weights[i]);
    });
    auto lp = layer_profile(c, b, tmax * w.radius);
    if (lp.degenerate || wm.value() <= 0) {
      skipped[k] = 1;
      return;
    }
    std::vector<std::pair<double, double>> hits;  // (layer distance, weight) inside the window
    for (std::size_t q = 0; q < lp.d.size(); ++q)
      if (inside(dist(c.points[lp.idx[q]], w.center), w.radius)) hits.emplace_back(lp.d[q], c.weights[lp.idx[q]]);
    for (std::size_t a = 0; a < theta.size(); ++a) {
      double eps = theta[a] * w.radius;
      KahanSum m, m2;
      std::size_t cnt = 0;
      for (const auto& [d, wi] : hits)
        if (d <= eps) {
          m.add(wi);
          m2.add(wi * wi);
          ++cnt;
        }
      if (!detail::resolved(c, eps, cnt, m.value(), m2.value(), resolution)) {
        ++unres[k];
        continue;
      }
      double r = m.value() / wm.value();
      best[k][a] = r;
      arg[k][a] = k;
      raw[k].push_back({theta[a], r, k < planted.size() ? 0 : k, jobs[k].first, jobs[k].second});
    }
  });
  std::vector<BallSpec> bl, wl;
  for (const auto& [b, w] : jobs) {
    bl.push_back(b);
    wl.push_back(w);
  }
  for (std::size_t k = 0; k < jobs.size(); ++k) {
    f.skipped += skipped[k];
    f.unresolved += unres[k];
    f.raw.insert(f.raw.end(), raw[k].begin(), raw[k].end());
  }
  f.sources = jobs.size() - f.skipped;
  detail::finish_fit(f, theta, best, arg, bl, wl);
  return f;
}

// (AD): for each centre, the exact supremum over r in [r_lo, r_hi] of
// mass(C_{r,r-s}(z))/mass(B(z,r)) at s = theta r. The supremum is approached as r decreases
// to a sample distance, so only those radii need to be examined.
inline DecayFit annular_decay_scan(const WeightedCloud& c, std::span<const Point> centers, double r_lo, double r_hi,
                                   std::span<const double> theta, double resolution = 10.0, unsigned threads = 1,
                                   std::span<const BallSpec> planted = {}) {
  DecayFit f;
  f.scan = "AD";
  std::vector<std::vector<double>> best(centers.size(), std::vector<double>(theta.size(), -1.0));
  std::vector<std::vector<std::size_t>> arg(centers.size(), std::vector<std::size_t>(theta.size(), npos));
  std::vector<std::vector<BallSpec>> wit(centers.size(), std::vector<BallSpec>(theta.size()));
  std::vector<std::vector<DecaySample>> raw(centers.size());
  std::vector<std::size_t> unres(centers.size(), 0);
  parallel_for(centers.size(), threads, [&](std::size_t k) {
    auto prof = distance_profile(c, centers[k], r_hi);
    std::size_t n = prof.d.size();
    std::vector<double> w2(n + 1, 0.0);
    KahanSum s2;
    for (std::size_t q = 0; q < n; ++q) {
      double wi = c.weights[prof.idx[q]];
      s2.add(wi * wi);
      w2[q + 1] = s2.value();
    }
    for (std::size_t a = 0; a < theta.size(); ++a) {
      double th = theta[a];
      std::size_t j = 0;
      bool any = false;
      for (std::size_t q = 0; q < n; ++q) {
        if (q + 1 < n && prof.d[q + 1] == prof.d[q]) continue;  // last of a tie group
        double r = prof.d[q];
        if (r < r_lo || r >= r_hi) continue;
        while (j < n && prof.d[j] <= r * (1 - th)) ++j;
        double mass = prof.cum[q + 1] - prof.cum[j];
        if (!detail::resolved(c, th * r, q + 1 - j, mass, w2[q + 1] - w2[j], resolution)) continue;
        any = true;
        double ratio = mass / prof.cum[q + 1];
        if (ratio > best[k][a]) {
          best[k][a] = ratio;
          arg[k][a] = k;
          double rr = r * (1 + 1e-9);
          wit[k][a] = {centers[k], rr};
        }
      }
      if (!any) ++unres[k];
    }
    // Per-source series: each maximising corona, held fixed across ratios.
    std::vector<double> done;
    for (std::size_t fa = 0; fa < theta.size(); ++fa) {
      if (best[k][fa] < 0) continue;
      double rs = wit[k][fa].radius / (1 + 1e-9);
      if (std::find(done.begin(), done.end(), rs) != done.end()) continue;
      done.push_back(rs);
      auto q = std::size_t(std::upper_bound(prof.d.begin(), prof.d.end(), rs) - prof.d.begin());
      for (std::size_t a = 0; a < theta.size(); ++a) {
        auto j = std::size_t(std::upper_bound(prof.d.begin(), prof.d.end(), rs * (1 - theta[a])) - prof.d.begin());
        double mass = prof.cum[q] - prof.cum[j];
        if (!detail::resolved(c, theta[a] * rs, q - j, mass, w2[q] - w2[j], resolution)) continue;
        raw[k].push_back({theta[a], mass / prof.cum[q], k * theta.size() + fa, wit[k][fa], {{}, 0.0}});
      }
    }
  });
  // Planted coronae B(z, r) \ B(z, r - s), evaluated as given.
  std::vector<std::vector<DecaySample>> praw(planted.size());
  parallel_for(planted.size(), threads, [&](std::size_t p) {
    const auto& b = planted[p];
    auto prof = distance_profile(c, b.center, b.radius);
    std::vector<double> w2(prof.d.size() + 1, 0.0);
    KahanSum s2;
    for (std::size_t q = 0; q < prof.d.size(); ++q) {
      double wi = c.weights[prof.idx[q]];
      s2.add(wi * wi);
      w2[q + 1] = s2.value();
    }
    auto q = std::size_t(std::lower_bound(prof.d.begin(), prof.d.end(), open_radius(b.radius)) - prof.d.begin());
    if (prof.cum[q] <= 0) return;
    for (std::size_t a = 0; a < theta.size(); ++a) {
      double inner = open_radius(b.radius * (1 - theta[a]));
      auto j = std::size_t(std::lower_bound(prof.d.begin(), prof.d.end(), inner) - prof.d.begin());
      double mass = prof.cum[q] - prof.cum[j];
      if (!detail::resolved(c, theta[a] * b.radius, q - j, mass, w2[q] - w2[j], resolution)) continue;
      praw[p].push_back({theta[a], mass / prof.cum[q], (centers.size() + p) * theta.size(), b, {{}, 0.0}});
    }
  });
  for (std::size_t k = 0; k < centers.size(); ++k) {
    f.unresolved += unres[k];
    f.raw.insert(f.raw.end(), raw[k].begin(), raw[k].end());
  }
  for (const auto& r : praw) f.raw.insert(f.raw.end(), r.begin(), r.end());
  f.sources = centers.size() + planted.size();
  // envelope with per-entry witnesses (radius of the maximising corona)
  for (std::size_t a = 0; a < theta.size(); ++a) {
    double m = -1;
    BallSpec w;
    for (std::size_t k = 0; k < centers.size(); ++k)
      if (best[k][a] > m) {
        m = best[k][a];
        w = wit[k][a];
      }
    if (m < 0) continue;
    f.ratio.push_back(theta[a]);
    f.measure.push_back(m);
    f.witness_ball.push_back(w);
    f.witness_window.push_back({{}, 0.0});
  }
  auto fit = fit_loglog(f.ratio, f.measure);
  if (fit.n >= 2) {
    f.eta = fit.slope;
    f.C = fit.constant();
    f.r2 = fit.r2;
    f.residuals = fit.residuals;
  }
  std::sort(f.raw.begin(), f.raw.end(), [](const DecaySample& a, const DecaySample& b) { return a.ratio < b.ratio; });
  return f;
}

// (RAD): mass(C_{r,r-s}(z) ∩ B(w,R))/mass(B(w,R)) against s/R, R <= 2r, for coronas (z, r)
// and windows centred on corona points.
inline DecayFit relative_annular_decay_scan(const WeightedCloud& c, std::span<const BallSpec> coronas,
                                            std::span<const std::pair<BallSpec, BallSpec>> planted,
                                            std::span<const double> theta, std::size_t centers_per_corona = 4,
                                            double resolution = 10.0, unsigned threads = 1) {
  DecayFit f;
  f.scan = "RAD";
  double tmax = *std::max_element(theta.begin(), theta.end());
  std::vector<std::pair<BallSpec, BallSpec>> jobs(planted.begin(), planted.end());
  for (const auto& z : coronas) {
    std::vector<std::size_t> pts;
    double s = std::min(tmax * z.radius, 0.5 * z.radius);
    for (std::size_t i : corona_indices(c, z.center, z.radius, s)) pts.push_back(i);
    jobs.push_back({z, z});
    for (std::size_t i : detail::spread(pts, centers_per_corona))
      for (double R : {2 * z.radius, z.radius / 2, z.radius / 8, z.radius / 32}) jobs.push_back({z, {c.points[i], R}});
  }
  PointIndex all(c.points);
  std::vector<std::vector<double>> best(jobs.size(), std::vector<double>(theta.size(), -1.0));
  std::vector<std::vector<std::size_t>> arg(jobs.size(), std::vector<std::size_t>(theta.size(), npos));
  std::vector<std::vector<DecaySample>> raw(jobs.size());
  std::vector<char> skipped(jobs.size(), 0);
  std::vector<std::size_t> unres(jobs.size(), 0);
  parallel_for(jobs.size(), threads, [&](std::size_t k) {
    const auto& [z, w] = jobs[k];
    std::vector<std::pair<double, double>> pts;  // (distance to z, weight) for window points
    KahanSum wm;
    all.visit(w.center, w.radius, [&](std::size_t i, double d) {
      if (!inside(d, w.radius)) return;
      wm.add(c.weights[i]);
      pts.emplace_back(dist(c.points[i], z.center), c.weights[i]);
    });
    if (wm.value() <= 0) {
      skipped[k] = 1;
      return;
    }
    for (std::size_t a = 0; a < theta.size(); ++a) {
      double s = theta[a] * w.radius;
      if (!(s < z.radius)) continue;
      KahanSum m, m2;
      std::size_t cnt = 0;
      for (const auto& [d, wi] : pts)
        if (inside(d, z.radius) && !inside(d, z.radius - s)) {
          m.add(wi);
          m2.add(wi * wi);
          ++cnt;
        }
      if (!detail::resolved(c, s, cnt, m.value(), m2.value(), resolution)) {
        ++unres[k];
        continue;
      }
      double r = m.value() / wm.value();
      best[k][a] = r;
      arg[k][a] = k;
      raw[k].push_back({theta[a], r, k < planted.size() ? 0 : k, jobs[k].first, jobs[k].second});
    }
  });
  std::vector<BallSpec> bl, wl;
  for (const auto& [b, w] : jobs) {
    bl.push_back(b);
    wl.push_back(w);
  }
  for (std::size_t k = 0; k < jobs.size(); ++k) {
    f.skipped += skipped[k];
    f.unresolved += unres[k];
    f.raw.insert(f.raw.end(), raw[k].begin(), raw[k].end());
  }
  f.sources = jobs.size() - f.skipped;
  detail::finish_fit(f, theta, best, arg, bl, wl);
  return f;
}

// ---------------------------------------------------------------------------
// Monotone geodesic property

struct MonotoneResult {
  std::vector<double> u;        // ascending
  std::vector<double> C;        // sup over pairs of the minimal feasible constant at each u
  std::vector<std::pair<std::size_t, std::size_t>> witness;  // pair realising C at each u
  double constant = 0.0;
  std::size_t pairs = 0;
  // Worst pair whose first point is a curve feature (vertex), at the finest u, when that
  // sub-sample fails on its own; npos otherwise.
  std::pair<std::size_t, std::size_t> feature_witness{npos, npos};
  double feature_C = 0.0;
  // C at the finest u over C at the first u at least 4 times larger (two halvings)
  double trend() const {
    if (u.empty()) return 0.0;
    for (std::size_t k = 0; k < u.size(); ++k)
      if (u[k] >= 4 * u.front() * (1 - 1e-9) && C[k] > 0) return C.front() / C[k];
    return 0.0;
  }
};

// For each pair (x, y) and u <= rho(x,y): min over z with rho(z,x) <= rho(x,y) - u of rho(z,y)/u.
inline MonotoneResult monotone_geodesic_constant(const WeightedCloud& c,
                                                 std::span<const std::pair<std::size_t, std::size_t>> pairs,
                                                 std::span<const double> u_grid, unsigned threads = 1) {
  MonotoneResult res;
  res.u.assign(u_grid.begin(), u_grid.end());
  std::sort(res.u.begin(), res.u.end());
  res.C.assign(res.u.size(), 0.0);
  res.witness.assign(res.u.size(), {npos, npos});
  res.pairs = pairs.size();
  PointIndex all(c.points);
  std::vector<std::vector<double>> per(pairs.size(), std::vector<double>(res.u.size(), 0.0));
  parallel_for(pairs.size(), threads, [&](std::size_t k) {
    auto [xi, yi] = pairs[k];
    const Point& x = c.points[xi];
    const Point& y = c.points[yi];
    double rho = dist(x, y);
    std::vector<std::pair<double, double>> cand;  // (rho(z,x), rho(z,y)) for z in the closed ball at x
    all.visit(x, rho, [&](std::size_t i, double d) { cand.emplace_back(d, dist(c.points[i], y)); });
    std::sort(cand.begin(), cand.end());
    std::vector<double> pmin(cand.size());
    double m = std::numeric_limits<double>::infinity();
    for (std::size_t q = 0; q < cand.size(); ++q) pmin[q] = m = std::min(m, cand[q].second);
    for (std::size_t a = 0; a < res.u.size(); ++a) {
      double u = res.u[a];
      if (u > rho) continue;
      auto q = std::size_t(std::upper_bound(cand.begin(), cand.end(), std::make_pair(rho - u, std::numeric_limits<double>::infinity())) -
                           cand.begin());
      per[k][a] = q == 0 ? std::numeric_limits<double>::infinity() : pmin[q - 1] / u;
    }
  });
  for (std::size_t k = 0; k < pairs.size(); ++k)
    for (std::size_t a = 0; a < res.u.size(); ++a)
      if (per[k][a] > res.C[a]) {
        res.C[a] = per[k][a];
        res.witness[a] = pairs[k];
      }
  for (double v : res.C) res.constant = std::max(res.constant, v);
  return res;
}

// Six nearest neighbours of every point (self excluded).
inline std::vector<std::array<std::size_t, 6>> knn_graph(const WeightedCloud& c) {
  PointIndex all(c.points);
  std::vector<std::array<std::size_t, 6>> g(c.size());
  for (std::size_t i = 0; i < c.size(); ++i) {
    auto nb = all.knn(c.points[i], 7);
    std::size_t q = 0;
    g[i].fill(i);
    for (std::size_t j : nb)
      if (j != i && q < 6) g[i][q++] = j;
  }
  return g;
}

// Points y != x at which rho(., x) has a local minimum over the neighbour graph, nearest first.
inline std::vector<std::size_t> distance_minima(const WeightedCloud& c, const std::vector<std::array<std::size_t, 6>>& g,
                                                std::size_t x, double min_dist, std::size_t keep) {
  std::vector<double> d(c.size());
  for (std::size_t i = 0; i < c.size(); ++i) d[i] = dist(c.points[i], c.points[x]);
  std::vector<std::pair<double, std::size_t>> mins;
  for (std::size_t i = 0; i < c.size(); ++i) {
    if (i == x || d[i] < min_dist) continue;
    bool local = true;
    for (std::size_t j : g[i])
      if (d[j] < d[i]) {
        local = false;
        break;
      }
    if (local) mins.emplace_back(d[i], i);
  }
  std::sort(mins.begin(), mins.end());
  std::vector<std::size_t> out;
  for (std::size_t k = 0; k < mins.size() && k < keep; ++k) out.push_back(mins[k].second);
  return out;
}

struct PairSample {
  std::vector<std::pair<std::size_t, std::size_t>> random, minima;
  std::size_t feature_minima = 0;  // leading entries of minima whose source is a feature
  std::vector<std::pair<std::size_t, std::size_t>> all() const {
    auto v = random;
    v.insert(v.end(), minima.begin(), minima.end());
    return v;
  }
};

inline PairSample sample_pairs(const WeightedCloud& c, const ScanCfg& cfg, const Probes& probes, double u_lo) {
  PairSample ps;
  Rng rng(cfg.seed ^ 0x9e3779b97f4a7c15ULL);
  for (std::size_t k = 0, tries = 0; k < cfg.pair_count && tries < 20 * cfg.pair_count; ++tries) {
    std::size_t x = rng.index(c.size()), y = rng.index(c.size());
    if (dist(c.points[x], c.points[y]) < u_lo) continue;
    ps.random.push_back({x, y});
    ++k;
  }
  auto g = knn_graph(c);
  auto src = detail::snap(c, probes.features);
  std::size_t n_feat = src.size();
  for (std::size_t k = 0; k < cfg.minima_sources; ++k) src.push_back(rng.index(c.size()));
  for (std::size_t s = 0; s < src.size(); ++s) {
    for (std::size_t y : distance_minima(c, g, src[s], u_lo, cfg.minima_per_source)) ps.minima.push_back({src[s], y});
    if (s + 1 == n_feat) ps.feature_minima = ps.minima.size();
  }
  return ps;
}

// ---------------------------------------------------------------------------
// Homogeneous balls property

// Doubling constant of the subspace {i : side[i] == want} at centre x (a point of that side):
// exact supremum over r >= r_min of mass(B(x,2r) ∩ S)/mass(B(x,r) ∩ S).
inline double subspace_doubling(const WeightedCloud& c, const std::vector<char>& side, char want, std::size_t x,
                                double resolution, double* r_at = nullptr) {
  std::vector<std::pair<double, double>> dw;
  for (std::size_t i = 0; i < c.size(); ++i)
    if (side[i] == want) dw.emplace_back(dist(c.points[i], c.points[x]), c.weights[i]);
  std::sort(dw.begin(), dw.end());
  std::size_t n = dw.size();
  if (n == 0) return 0.0;
  std::vector<double> d(n), cum(n + 1, 0.0);
  KahanSum s;
  for (std::size_t q = 0; q < n; ++q) {
    d[q] = dw[q].first;
    s.add(dw[q].second);
    cum[q + 1] = s.value();
  }
  double sp = c.spacing;
  if (c.dim == 1 || c.has_params()) {
    sp = 0;
    for (std::size_t q = 0; q < std::min<std::size_t>(n, 9); ++q) sp = std::max(sp, dw[q].second);
  }
  double r_min = resolution * sp;
  auto open_mass = [&](double r) {
    return cum[std::size_t(std::lower_bound(d.begin(), d.end(), open_radius(r)) - d.begin())];
  };
  double best = 1.0;
  auto consider = [&](double r) {
    double m1 = open_mass(r);
    if (m1 <= 0) return;
    double q = open_mass(2 * r) / m1;
    if (q > best) {
      best = q;
      if (r_at) *r_at = r;
    }
  };
  consider(r_min);
  for (std::size_t q = 1; q < n; ++q)
    if (d[q] > d[q - 1] && d[q] >= r_min) consider(d[q]);
  return best;
}

struct HBResult {
  double constant = 0.0;
  BallSpec witness_ball;
  Point witness_center;
  double witness_r = 0.0;
  std::vector<std::vector<double>> family_constants;
  double trend = 0.0;  // largest fine/coarse growth over families
  std::size_t balls = 0, skipped = 0;
};

// Cap probes: for a distance minimum y of rho(., x), balls B(x, rho + delta) with shrinking delta
// leave a small cap around y that is isolated from the rest of the ball.
inline std::vector<std::vector<HBProbe>> cap_families(const WeightedCloud& c, std::span<const std::pair<std::size_t, std::size_t>> minima,
                                                      std::size_t count) {
  std::vector<std::vector<HBProbe>> out;
  for (std::size_t k = 0; k < minima.size() && out.size() < count; ++k) {
    auto [x, y] = minima[k];
    double rho = dist(c.points[x], c.points[y]);
    std::vector<HBProbe> fam;
    for (int m = 0; m < 3; ++m) {
      double delta = 0.05 * rho * std::pow(0.25, m);
      fam.push_back({{c.points[x], rho + delta}, c.points[y]});
    }
    out.push_back(std::move(fam));
  }
  return out;
}

inline double probe_constant(const WeightedCloud& c, const PointIndex& all, const HBProbe& p, double resolution,
                             double* r_at = nullptr) {
  std::vector<char> side(c.size());
  std::size_t n_in = 0;
  for (std::size_t i = 0; i < c.size(); ++i) {
    side[i] = inside(dist(c.points[i], p.ball.center), p.ball.radius);
    n_in += side[i];
  }
  if (n_in == 0 || n_in == c.size()) return 0.0;
  // nearest cloud point to the probe centre on the side the centre lies on
  auto [d0, i0] = all.nearest(p.center);
  (void)d0;
  char want = side[i0];
  return subspace_doubling(c, side, want, i0, resolution, r_at);
}

inline HBResult homogeneous_balls_constant(const WeightedCloud& c, std::span<const BallSpec> balls,
                                           std::span<const std::vector<HBProbe>> families, std::size_t centers_per_side,
                                           std::uint64_t seed, double resolution = 10.0, unsigned threads = 1) {
  HBResult res;
  PointIndex all(c.points);
  std::vector<double> ball_best(balls.size(), 0.0), ball_r(balls.size(), 0.0);
  std::vector<Point> ball_cen(balls.size());
  std::vector<char> skip(balls.size(), 0);
  parallel_for(balls.size(), threads, [&](std::size_t k) {
    const auto& b = balls[k];
    std::vector<char> side(c.size());
    std::vector<std::size_t> in, out;
    for (std::size_t i = 0; i < c.size(); ++i) {
      side[i] = inside(dist(c.points[i], b.center), b.radius);
      (side[i] ? in : out).push_back(i);
    }
    if (in.empty()) {
      skip[k] = 1;
      return;
    }
    Rng rng(seed + 7919 * k);
    for (auto* grp : {&in, &out}) {
      if (grp->empty()) continue;
      for (std::size_t q = 0; q < centers_per_side; ++q) {
        std::size_t x = (*grp)[rng.index(grp->size())];
        double r = 0;
        double v = subspace_doubling(c, side, side[x], x, resolution, &r);
        if (v > ball_best[k]) {
          ball_best[k] = v;
          ball_r[k] = r;
          ball_cen[k] = c.points[x];
        }
      }
    }
  });
  for (std::size_t k = 0; k < balls.size(); ++k) {
    res.skipped += skip[k];
    if (ball_best[k] > res.constant) {
      res.constant = ball_best[k];
      res.witness_ball = balls[k];
      res.witness_center = ball_cen[k];
      res.witness_r = ball_r[k];
    }
  }
  res.balls = balls.size() - res.skipped;
  res.family_constants.resize(families.size());
  std::vector<std::vector<double>> fr(families.size());
  parallel_for(families.size(), threads, [&](std::size_t f) {
    for (const auto& p : families[f]) {
      double r = 0;
      double v = probe_constant(c, all, p, resolution, &r);
      res.family_constants[f].push_back(v);
      fr[f].push_back(r);
    }
  });
  for (std::size_t f = 0; f < families.size(); ++f) {
    const auto& fc = res.family_constants[f];
    for (std::size_t m = 0; m < fc.size(); ++m) {
      ++res.balls;
      if (fc[m] > res.constant) {
        res.constant = fc[m];
        res.witness_ball = families[f][m].ball;
        res.witness_center = families[f][m].center;
        res.witness_r = fr[f][m];
      }
    }
    if (fc.size() >= 2 && fc.front() > 0) res.trend = std::max(res.trend, fc.back() / fc.front());
  }
  return res;
}

// ---------------------------------------------------------------------------
// Verdicts

enum class Property { LD, RLD, AD, RAD, M, HB, AhlforsDavid };
enum class Verdict { holds, fails, inconclusive };

inline const char* to_string(Property p) {
  switch (p) {
    case Property::LD: return "LD";
    case Property::RLD: return "RLD";
    case Property::AD: return "AD";
    case Property::RAD: return "RAD";
    case Property::M: return "M";
    case Property::HB: return "HB";
    case Property::AhlforsDavid: return "AhlforsDavid";
  }
  return "?";
}

inline const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::holds: return "holds";
    case Verdict::fails: return "fails";
    case Verdict::inconclusive: return "inconclusive";
  }
  return "?";
}

struct PropertyVerdict {
  Property property = Property::LD;
  Verdict verdict = Verdict::inconclusive;
  double exponent = std::numeric_limits<double>::quiet_NaN();
  double constant = std::numeric_limits<double>::quiet_NaN();
  double r2 = std::numeric_limits<double>::quiet_NaN();
  double trend = std::numeric_limits<double>::quiet_NaN();
  // decay scans: smallest single-source slope over its first decade (the worst ball)
  double worst_exponent = std::numeric_limits<double>::quiet_NaN();
  bool empirical = false;
  std::string witness;  // empty unless the verdict is "fails"
  std::string note;
};

namespace detail {

inline std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string fmt_point(const Point& p) { return "(" + fmt(p.x) + "," + fmt(p.y) + ")"; }

inline std::string ball_text(const BallSpec& b) { return "B(" + fmt_point(b.center) + "," + fmt(b.radius) + ")"; }

}  // namespace detail

inline PropertyVerdict decay_verdict(Property p, const DecayFit& f, const Thresholds& t) {
  PropertyVerdict v;
  v.property = p;
  v.exponent = f.eta;
  v.constant = f.C;
  v.r2 = f.r2;
  double dec = f.decades();
  double env = dec >= t.trend_decades ? f.trend(t.hold_eta, t.trend_decades) : 0.0;
  auto [src, ws] = f.source_trend(t.hold_eta, t.trend_decades, t.witness_floor);
  auto [slope, wf] = f.source_slope(t.flat_decades, t.witness_floor);
  v.trend = std::max(env, src);
  if (double w = f.source_slope(t.hold_decades, t.witness_floor).first; std::isfinite(w)) v.worst_exponent = w;
  auto witness = [&](const DecaySample& s) {
    std::string out = "ratio=" + detail::fmt(s.ratio) + " measure=" + detail::fmt(s.measure) + " ball=" +
                      detail::ball_text(s.ball);
    if (s.window.radius > 0) out += " window=" + detail::ball_text(s.window);
    return out;
  };
  if (f.ratio.size() < 3 || !std::isfinite(f.eta)) {
    v.note = "too few resolved ratios";
    return v;
  }
  DecaySample we{f.ratio.front(), f.measure.front(), 0, f.witness_ball.front(), f.witness_window.front()};
  if (f.eta <= t.fail_eta) {
    v.verdict = Verdict::fails;
    v.witness = witness(we);
    v.note = "fitted exponent at or below the failure threshold";
  } else if (slope <= t.fail_eta) {
    v.verdict = Verdict::fails;
    v.witness = witness(wf);
    v.note = "a single source is flat at its finest ratios";
  } else if (src >= t.trend_factor) {
    v.verdict = Verdict::fails;
    v.witness = witness(ws);
    v.note = "a single source does not decay across two decades";
  } else if (f.eta >= t.hold_eta && f.r2 >= t.hold_r2 && dec >= t.hold_decades) {
    v.verdict = Verdict::holds;
  } else if (env >= t.trend_factor) {
    v.verdict = Verdict::fails;
    v.witness = witness(we);
    v.note = "constant at the hold exponent grows without bound across the scan";
  } else {
    v.note = dec < t.hold_decades ? "ratio range below one decade" : (f.r2 < t.hold_r2 ? "poor fit" : "weak decay");
  }
  return v;
}

inline PropertyVerdict monotone_verdict(const WeightedCloud& c, const MonotoneResult& m, const Thresholds& t) {
  const double spacing = c.spacing;
  PropertyVerdict v;
  v.property = Property::M;
  v.empirical = true;
  v.constant = m.constant;
  v.trend = m.trend();
  double excess = 0;
  for (std::size_t a = 0; a < m.u.size(); ++a) excess = std::max(excess, m.C[a] - 10 * spacing / m.u[a]);
  if (m.u.empty() || m.pairs == 0) {
    v.note = "no pairs";
  } else if (v.trend >= t.trend_factor) {
    v.verdict = Verdict::fails;
    bool feat = m.feature_witness.first != npos;
    auto [x, y] = feat ? m.feature_witness : m.witness.front();
    v.witness = "u=" + detail::fmt(m.u.front()) + " C=" + detail::fmt(feat ? m.feature_C : m.C.front()) + " x=" + detail::fmt_point(c.points[x]) +
                " y=" + detail::fmt_point(c.points[y]);
    v.note = feat ? "constant grows as u is halved twice; x is a curve vertex" : "constant grows as u is halved twice";
  } else if (excess <= t.m_hold) {
    v.verdict = Verdict::holds;
  } else {
    v.note = "large but stable constant";
  }
  return v;
}

inline PropertyVerdict hb_verdict(const HBResult& h, const Thresholds& t) {
  PropertyVerdict v;
  v.property = Property::HB;
  v.constant = h.constant;
  v.trend = h.trend;
  if (h.balls == 0) {
    v.note = "no balls";
  } else if (h.trend >= t.trend_factor) {
    v.verdict = Verdict::fails;
    v.witness = "ball=" + detail::ball_text(h.witness_ball) + " centre=(" + detail::fmt(h.witness_center.x) + "," +
                detail::fmt(h.witness_center.y) + ") r=" + detail::fmt(h.witness_r) + " C=" + detail::fmt(h.constant);
    v.note = "subspace doubling constant grows along a probe family";
  } else if (h.constant <= t.hb_hold) {
    v.verdict = Verdict::holds;
  } else {
    v.note = "large but stable constant";
  }
  return v;
}

// Proven implications of the diagram, as (premise, conclusion).
inline const std::vector<std::pair<Property, Property>>& implications() {
  static const std::vector<std::pair<Property, Property>> v = {
      {Property::M, Property::RAD},  {Property::RAD, Property::RLD}, {Property::RAD, Property::AD},
      {Property::RLD, Property::LD}, {Property::AD, Property::LD},   {Property::HB, Property::RLD},
      {Property::M, Property::AD},   {Property::M, Property::RLD},   {Property::M, Property::LD},
      {Property::RAD, Property::LD}, {Property::HB, Property::LD}};
  return v;
}

inline std::vector<std::string> implication_flags(std::span<const PropertyVerdict> rows) {
  std::vector<std::string> flags;
  auto find = [&](Property p) -> const PropertyVerdict* {
    for (const auto& r : rows)
      if (r.property == p) return &r;
    return nullptr;
  };
  for (auto [a, b] : implications()) {
    auto* pa = find(a);
    auto* pb = find(b);
    if (pa && pb && pa->verdict == Verdict::holds && pb->verdict == Verdict::fails)
      flags.push_back(std::string(to_string(a)) + " holds but " + to_string(b) +
                      " fails: discretization artifact");
  }
  return flags;
}

// ---------------------------------------------------------------------------
// Diagram report

struct DiagramReport {
  std::string space;
  std::vector<PropertyVerdict> rows;
  std::vector<std::string> flags;
  DecayFit ld, rld, ad, rad;
  MonotoneResult m;
  HBResult hb;
  AhlforsRatio adr;
};

namespace detail {

// Shared inputs of the scans: theta grid, ball sample and radius range.
struct ScanContext {
  std::vector<double> theta;
  std::vector<BallSpec> balls;
  double r_lo = 0.0, r_hi = 0.0;
};

inline ScanContext scan_context(const WeightedCloud& c, const Probes& probes, const ScanCfg& cfg) {
  ScanContext x;
  x.theta = theta_grid(c, cfg);
  x.balls = sample_balls(c, cfg, probes);
  std::tie(x.r_lo, x.r_hi) = radius_range(c, cfg);
  return x;
}

inline DecayFit run_ld(const WeightedCloud& c, const ScanContext& x, const ScanCfg& cfg) {
  return layer_decay_scan(c, x.balls, x.theta, cfg.resolution, cfg.threads);
}

// Windows go to the worst balls of the LD scan and to balls spread over the upper half of the
// radius range, since only large balls resolve the finest ratios.
inline DecayFit run_rld(const WeightedCloud& c, const Probes& probes, const ScanContext& x, const ScanCfg& cfg,
                        const DecayFit& ld) {
  std::vector<std::size_t> pick = worst_sources(ld, cfg.window_balls / 2);
  std::vector<std::size_t> by_r(x.balls.size());
  std::iota(by_r.begin(), by_r.end(), std::size_t(0));
  std::sort(by_r.begin(), by_r.end(), [&](std::size_t a, std::size_t b) { return x.balls[a].radius > x.balls[b].radius; });
  std::size_t want = cfg.window_balls - pick.size();
  for (std::size_t q = 0; q < want && q < by_r.size(); ++q) {
    std::size_t k = by_r[(q * by_r.size()) / (2 * want)];
    if (std::find(pick.begin(), pick.end(), k) == pick.end()) pick.push_back(k);
  }
  std::vector<BallSpec> wb;
  for (std::size_t k : pick) wb.push_back(x.balls[k]);
  return relative_layer_decay_scan(c, wb, probes.windows, x.theta, cfg.window_centers, cfg.resolution, cfg.threads);
}

inline DecayFit run_ad(const WeightedCloud& c, const Probes& probes, const ScanContext& x, const ScanCfg& cfg) {
  std::vector<Point> centers;
  for (const auto& b : x.balls) centers.push_back(b.center);
  return annular_decay_scan(c, centers, x.r_lo, 2 * x.r_hi, x.theta, cfg.resolution, cfg.threads, probes.balls);
}

inline DecayFit run_rad(const WeightedCloud& c, const Probes& probes, const ScanContext& x, const ScanCfg& cfg,
                        const DecayFit& ad) {
  std::vector<BallSpec> cor;
  for (std::size_t k = 0; k < ad.witness_ball.size() && cor.size() < cfg.window_balls; ++k) {
    const auto& w = ad.witness_ball[k];
    if (w.radius > 0 && std::find_if(cor.begin(), cor.end(), [&](const BallSpec& q) {
                          return q.center == w.center && q.radius == w.radius;
                        }) == cor.end())
      cor.push_back(w);
  }
  return relative_annular_decay_scan(c, cor, probes.windows, x.theta, cfg.window_centers, cfg.resolution, cfg.threads);
}

inline std::pair<MonotoneResult, PairSample> run_m(const WeightedCloud& c, const Probes& probes, const ScanCfg& cfg) {
  double u_lo = cfg.resolution * c.spacing, u_hi = std::max(u_lo * 10, diameter(c) / 4);
  auto pairs = sample_pairs(c, cfg, probes, u_lo);
  auto all = pairs.all();
  auto grid = logspace(u_lo, u_hi, cfg.u_count);
  auto m = monotone_geodesic_constant(c, all, grid, cfg.threads);
  if (pairs.feature_minima > 0) {
    std::span<const std::pair<std::size_t, std::size_t>> feat(pairs.minima.data(), pairs.feature_minima);
    auto mf = monotone_geodesic_constant(c, feat, grid, cfg.threads);
    if (mf.trend() >= cfg.thresholds.trend_factor) {
      m.feature_witness = mf.witness.front();
      m.feature_C = mf.C.front();
    }
  }
  return {std::move(m), pairs};
}

inline HBResult run_hb(const WeightedCloud& c, const Probes& probes, const ScanContext& x, const ScanCfg& cfg,
                       const PairSample& pairs) {
  std::vector<BallSpec> hb_balls;
  for (std::size_t k = 0; k < cfg.hb_balls && k < cfg.balls; ++k) hb_balls.push_back(x.balls[(k * cfg.balls) / cfg.hb_balls]);
  auto fams = cap_families(c, pairs.minima, cfg.cap_pairs);
  fams.insert(fams.end(), probes.hb_families.begin(), probes.hb_families.end());
  return homogeneous_balls_constant(c, hb_balls, fams, cfg.hb_centers, cfg.seed, cfg.resolution, cfg.threads);
}

inline PropertyVerdict ahlfors_verdict(const WeightedCloud& c, const AhlforsRatio& adr) {
  PropertyVerdict v;
  v.property = Property::AhlforsDavid;
  v.constant = adr.sup / adr.inf;
  if (c.dim == 2 && !c.has_params()) {
    v.note = "two-dimensional cloud";
  } else if (v.constant <= 16) {
    v.verdict = Verdict::holds;
  } else {
    v.note = "band wider than 16";
  }
  return v;
}

}  // namespace detail

inline DiagramReport diagram_report(const WeightedCloud& c, const Probes& probes, const ScanCfg& cfg) {
  DiagramReport rep;
  rep.space = c.label;
  const auto& th = cfg.thresholds;
  auto x = detail::scan_context(c, probes, cfg);
  rep.ld = detail::run_ld(c, x, cfg);
  rep.rld = detail::run_rld(c, probes, x, cfg, rep.ld);
  rep.ad = detail::run_ad(c, probes, x, cfg);
  rep.rad = detail::run_rad(c, probes, x, cfg, rep.ad);
  auto [m, pairs] = detail::run_m(c, probes, cfg);
  rep.m = std::move(m);
  rep.hb = detail::run_hb(c, probes, x, cfg, pairs);
  std::vector<BallSpec> adr_balls(x.balls.begin(), x.balls.begin() + std::ptrdiff_t(std::min(x.balls.size(), cfg.balls)));
  rep.adr = ahlfors_ratio(c, adr_balls);

  rep.rows.push_back(decay_verdict(Property::LD, rep.ld, th));
  rep.rows.push_back(decay_verdict(Property::RLD, rep.rld, th));
  rep.rows.push_back(decay_verdict(Property::AD, rep.ad, th));
  rep.rows.push_back(decay_verdict(Property::RAD, rep.rad, th));
  rep.rows.push_back(monotone_verdict(c, rep.m, th));
  rep.rows.push_back(hb_verdict(rep.hb, th));
  rep.rows.push_back(detail::ahlfors_verdict(c, rep.adr));
  rep.flags = implication_flags(rep.rows);
  return rep;
}

// One property scan with its verdict. RLD and RAD run the LD and AD scans they select windows from.
struct ScanOutput {
  PropertyVerdict verdict;
  DecayFit fit;  // decay properties
  MonotoneResult m;
  HBResult hb;
};

inline Property parse_property(const std::string& s) {
  std::string u;
  for (char ch : s) u.push_back(char(std::toupper(static_cast<unsigned char>(ch))));
  for (Property p : {Property::LD, Property::RLD, Property::AD, Property::RAD, Property::M, Property::HB})
    if (u == to_string(p)) return p;
  throw ParameterError("unknown property: " + s);
}

inline ScanOutput scan_property(const WeightedCloud& c, const Probes& probes, const ScanCfg& cfg, Property p) {
  ScanOutput out;
  const auto& th = cfg.thresholds;
  auto x = detail::scan_context(c, probes, cfg);
  switch (p) {
    case Property::LD:
      out.fit = detail::run_ld(c, x, cfg);
      out.verdict = decay_verdict(p, out.fit, th);
      break;
    case Property::RLD:
      out.fit = detail::run_rld(c, probes, x, cfg, detail::run_ld(c, x, cfg));
      out.verdict = decay_verdict(p, out.fit, th);
      break;
    case Property::AD:
      out.fit = detail::run_ad(c, probes, x, cfg);
      out.verdict = decay_verdict(p, out.fit, th);
      break;
    case Property::RAD:
      out.fit = detail::run_rad(c, probes, x, cfg, detail::run_ad(c, probes, x, cfg));
      out.verdict = decay_verdict(p, out.fit, th);
      break;
    case Property::M:
      out.m = detail::run_m(c, probes, cfg).first;
      out.verdict = monotone_verdict(c, out.m, th);
      break;
    case Property::HB: {
      auto pairs = sample_pairs(c, cfg, probes, cfg.resolution * c.spacing);
      out.hb = detail::run_hb(c, probes, x, cfg, pairs);
      out.verdict = hb_verdict(out.hb, th);
      break;
    }
    case Property::AhlforsDavid: {
      std::vector<BallSpec> b(x.balls.begin(), x.balls.begin() + std::ptrdiff_t(std::min(x.balls.size(), cfg.balls)));
      out.verdict = detail::ahlfors_verdict(c, ahlfors_ratio(c, b));
      break;
    }
  }
  return out;
}

}  // namespace homtype
