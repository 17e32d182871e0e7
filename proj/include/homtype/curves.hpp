#pragma once

#include <array>
#include <cmath>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

#include "homtype/cloud.hpp"
#include "homtype/measure.hpp"

namespace homtype {

enum class CurveKind { Line, GappedLine, Triangle, Tessera, TesseraTruncated, PerturbedCircle };
enum class Oscillation { Exp, Poly };

struct CurveSpec {
  CurveKind kind = CurveKind::Line;
  double lo = 0.0, hi = 1.0;  // Line and GappedLine domain
  double eps0 = 0.01;         // GappedLine
  std::array<Point, 3> vertices{{{0.0, 0.0}, {1.0, 0.0}, {0.3, 0.8}}};
  int k_max = 6;              // Tessera
  double tail_length = 3.0;   // PerturbedCircle, TesseraTruncated
  Oscillation osc = Oscillation::Poly;
  double A0 = 0.01;
};

struct SamplerCfg {
  double h = 1e-3;
  double h_straight = 0.0;  // spacing on straight pieces; 0 means h
  double dphi_max = std::numbers::pi / 8;
  double t_min = 1e-3;
  double h_min = 1e-9;      // smallest arc step; below it the oscillation aliases
  std::size_t point_cap = 8'000'000;
};

inline void validate(const SamplerCfg& c) {
  if (!(c.h > 0)) throw ParameterError("sampler: h must be positive");
  if (!(c.dphi_max > 0) || c.dphi_max > std::numbers::pi / 8 + 1e-15)
    throw ParameterError("sampler: dphi_max must lie in (0, pi/8]");
  if (!(c.t_min > 0)) throw ParameterError("sampler: t_min must be positive");
  if (!(c.h_min > 0) || c.h_min > c.h) throw ParameterError("sampler: h_min must lie in (0, h]");
  if (c.h_straight < 0) throw ParameterError("sampler: h_straight must be nonnegative");
}

// ---------------------------------------------------------------------------
// Analytic ingredients

inline double tessera_breakpoint(int i) {
  constexpr double pi = std::numbers::pi;
  if (i < 0) throw ParameterError("tessera breakpoint index must be nonnegative");
  if (i == 0) return 0.0;
  if (i == 1) return 1.0;
  int k = i / 2;
  double p = std::ldexp(1.0, k - 1);
  return i % 2 == 0 ? -pi + (1 + 2 * pi) * p : -pi + (2 + 2 * pi) * p;
}

inline double oscillation_zeros(Oscillation kind, long k) {
  if (k < 1) throw ParameterError("oscillation_zeros: k must be >= 1");
  constexpr double pi = std::numbers::pi;
  if (kind == Oscillation::Exp) return 1.0 / (std::log(double(k)) + 1.0 / pi);
  return pi / double(k);
}

struct Oscillator {
  Oscillation kind;
  double A0;

  double amp(double t) const {
    constexpr double pi = std::numbers::pi;
    return kind == Oscillation::Exp ? std::exp(-1.0 / (t * t)) : A0 * std::pow(t / pi, 3);
  }
  double amp_d(double t) const {
    constexpr double pi = std::numbers::pi;
    return kind == Oscillation::Exp ? amp(t) * 2.0 / (t * t * t) : 3.0 * A0 * t * t / (pi * pi * pi);
  }
  double phase(double t) const {
    constexpr double pi = std::numbers::pi;
    return kind == Oscillation::Exp ? pi * std::exp(1.0 / t - 1.0 / pi) : pi * pi / t;
  }
  double phase_rate(double t) const { return phase(t) / (kind == Oscillation::Exp ? t * t : t); }
  double eps(double t) const { return amp(t) * std::sin(phase(t)); }
  double eps_d(double t) const {
    double b = phase(t);
    return amp_d(t) * std::sin(b) - amp(t) * phase_rate(t) * std::cos(b);
  }
  // Radial offset with a sign-preserving floor so that underflow never moves a sample onto the circle.
  double eps_floored(double t) const {
    double s = std::sin(phase(t));
    double e = amp(t) * s;
    double sg = s >= 0 ? 1.0 : -1.0;
    return sg * std::max(std::abs(e), 1e-12);
  }
};

// ---------------------------------------------------------------------------
// Pieces

struct Piece {
  double t0 = 0, t1 = 0;
  Point p0, p1;  // exact endpoint coordinates
  bool straight = true;
  std::function<Point(double)> at;
  std::function<double(double)> speed;
  std::function<double(double)> phase_rate;  // |b'(t)| for oscillating pieces
  std::function<double(double)> max_step;    // optional arc-length refinement
  std::function<double(double, double)> arc;  // arc length over [a, b]
};

namespace detail {

inline Piece segment_piece(double t0, double t1, Point a, Point b) {
  Piece p;
  p.t0 = t0;
  p.t1 = t1;
  p.p0 = a;
  p.p1 = b;
  double len = dist(a, b);
  double L = t1 - t0;
  p.at = [=](double t) {
    if (t == t0) return a;
    if (t == t1) return b;
    double u = (t - t0) / L;
    return Point{a.x + (b.x - a.x) * u, a.y + (b.y - a.y) * u};
  };
  p.speed = [=](double) { return len / L; };
  p.arc = [=](double s, double e) { return (e - s) * len / L; };
  return p;
}

// Half-circle of radius R about the origin, unit speed, starting at angle th0.
inline Piece circle_piece(double t0, double R, double th0, Point a, Point b) {
  Piece p;
  p.t0 = t0;
  p.t1 = t0 + std::numbers::pi * R;
  p.p0 = a;
  p.p1 = b;
  p.straight = false;
  double t1 = p.t1;
  p.at = [=](double t) {
    if (t == t0) return a;
    if (t == t1) return b;
    double th = th0 + (t - t0) / R;
    return Point{R * std::cos(th), R * std::sin(th)};
  };
  p.speed = [](double) { return 1.0; };
  p.arc = [](double s, double e) { return e - s; };
  return p;
}

inline std::vector<Piece> tessera_pieces(int k_max, bool close_last_circle) {
  std::vector<Piece> out;
  out.push_back(segment_piece(0.0, 1.0, {0, 0}, {1, 0}));
  out.push_back(circle_piece(1.0, 1.0, 0.0, {1, 0}, {-1, 0}));
  for (int k = 1; k <= k_max; ++k) {
    double s = k % 2 ? -1.0 : 1.0;
    double a = std::ldexp(1.0, k - 1), R = std::ldexp(1.0, k);
    out.push_back(segment_piece(tessera_breakpoint(2 * k), tessera_breakpoint(2 * k + 1), {s * a, 0},
                                {s * R, 0}));
    if (k < k_max || close_last_circle)
      out.push_back(circle_piece(tessera_breakpoint(2 * k + 1), R, k % 2 ? std::numbers::pi : 0.0,
                                 {s * R, 0}, {-s * R, 0}));
  }
  return out;
}

}  // namespace detail

inline std::vector<Piece> pieces(const CurveSpec& spec, double t_min) {
  constexpr double pi = std::numbers::pi;
  std::vector<Piece> out;
  switch (spec.kind) {
    case CurveKind::Line:
      if (!(spec.hi > spec.lo)) throw ParameterError("line: empty domain");
      out.push_back(detail::segment_piece(spec.lo, spec.hi, {spec.lo, 0}, {spec.hi, 0}));
      break;
    case CurveKind::GappedLine: {
      if (!(spec.hi > spec.lo)) throw ParameterError("gapped line: empty domain");
      if (!(spec.eps0 > 0 && spec.eps0 < 1)) throw ParameterError("gapped line: eps0 must lie in (0,1)");
      std::vector<std::pair<double, double>> gaps;
      for (int n = 1; n < 64; ++n) {
        double a = spec.eps0 / std::ldexp(1.0, n - 1);
        double gl = n - a, gr = n - a * a;
        if (gl >= spec.hi) break;
        if (gr <= spec.lo) continue;
        gaps.emplace_back(gl, gr);
      }
      std::vector<double> edges;
      double finest = spec.hi - spec.lo;
      for (auto [gl, gr] : gaps) {
        edges.push_back(gl);
        edges.push_back(gr);
        double a = double(std::lround(gr)) - gl;
        finest = std::min(finest, a * a / 100.0);
      }
      auto grade = [edges, finest](double t) {
        double d = std::numeric_limits<double>::infinity();
        for (double e : edges) d = std::min(d, std::abs(t - e));
        return std::max(finest, 0.2 * d);
      };
      double start = spec.lo;
      for (auto [gl, gr] : gaps) {
        if (gl > start) {
          auto p = detail::segment_piece(start, gl, {start, 0}, {gl, 0});
          p.max_step = grade;
          out.push_back(p);
        }
        start = std::max(start, gr);
      }
      if (spec.hi > start) {
        auto p = detail::segment_piece(start, spec.hi, {start, 0}, {spec.hi, 0});
        p.max_step = grade;
        out.push_back(p);
      }
      break;
    }
    case CurveKind::Triangle: {
      const auto& v = spec.vertices;
      double cross = (v[1].x - v[0].x) * (v[2].y - v[0].y) - (v[1].y - v[0].y) * (v[2].x - v[0].x);
      if (std::abs(cross) < 1e-12) throw ParameterError("triangle: degenerate vertices");
      double t = 0;
      for (int e = 0; e < 3; ++e) {
        Point a = v[std::size_t(e)], b = v[std::size_t((e + 1) % 3)];
        double L = dist(a, b);
        out.push_back(detail::segment_piece(t, t + L, a, b));
        t += L;
      }
      break;
    }
    case CurveKind::Tessera:
      if (spec.k_max < 1) throw ParameterError("tessera: k_max must be >= 1");
      out = detail::tessera_pieces(spec.k_max, false);
      break;
    case CurveKind::TesseraTruncated: {
      out = detail::tessera_pieces(3, true);
      double t8 = tessera_breakpoint(8);
      out.push_back(detail::segment_piece(t8, t8 + spec.tail_length, {8, 0}, {8 + spec.tail_length, 0}));
      break;
    }
    case CurveKind::PerturbedCircle: {
      if (spec.osc == Oscillation::Poly && !(spec.A0 > 0)) throw ParameterError("perturbed circle: A0 must be positive");
      if (spec.osc == Oscillation::Exp && t_min < 1.0 / 700.0)
        throw ParameterError("perturbed circle (Exp): t_min below 1/700 overflows the phase");
      if (!(t_min < pi)) throw ParameterError("perturbed circle: t_min must be below pi");
      out.push_back(detail::segment_piece(-1.0, 0.0, {0, 0}, {1, 0}));
      Oscillator osc{spec.osc, spec.A0};
      Piece arc;
      arc.t0 = t_min;
      arc.t1 = pi;
      arc.straight = false;
      arc.p0 = {(1 + osc.eps_floored(t_min)) * std::cos(t_min), (1 + osc.eps_floored(t_min)) * std::sin(t_min)};
      arc.p1 = {-1, 0};
      arc.at = [osc](double t) {
        if (t == pi) return Point{-1, 0};
        double r = 1 + osc.eps_floored(t);
        return Point{r * std::cos(t), r * std::sin(t)};
      };
      arc.speed = [osc](double t) {
        double r = 1 + osc.eps(t), rd = osc.eps_d(t);
        return std::sqrt(r * r + rd * rd);
      };
      arc.phase_rate = [osc](double t) { return osc.phase_rate(t); };
      arc.arc = [osc](double s, double e) {
        return gauss5(
            [osc](double t) {
              double r = 1 + osc.eps(t), rd = osc.eps_d(t);
              return std::sqrt(r * r + rd * rd);
            },
            s, e);
      };
      out.push_back(arc);
      out.push_back(detail::segment_piece(pi, pi + spec.tail_length, {-1, 0}, {-1 - spec.tail_length, 0}));
      break;
    }
  }
  return out;
}

inline int curve_dim(const CurveSpec& s) {
  return s.kind == CurveKind::Line || s.kind == CurveKind::GappedLine ? 1 : 2;
}

inline Point gamma(const CurveSpec& spec, double t) {
  if (spec.kind == CurveKind::PerturbedCircle && t > 0 && t < std::numbers::pi) {
    Oscillator osc{spec.osc, spec.A0};
    if (spec.osc == Oscillation::Exp && t < 1.0 / 700.0) {
      // amplitude exp(-1/t^2) is below the smallest double here
      return {std::cos(t), std::sin(t)};
    }
    double r = 1 + osc.eps(t);
    return {r * std::cos(t), r * std::sin(t)};
  }
  auto ps = pieces(spec, spec.kind == CurveKind::PerturbedCircle ? 0.5 : 1e-3);
  for (const auto& p : ps)
    if (t >= p.t0 && t <= p.t1) return p.at(t);
  throw ParameterError("gamma: parameter outside the curve domain");
}

inline double analytic_length(const CurveSpec& spec, double t_min) {
  double L = 0;
  for (const auto& p : pieces(spec, t_min)) {
    if (p.straight || !p.phase_rate) {
      L += p.arc(p.t0, p.t1);
      continue;
    }
    // per half-period of the oscillation, high-order quadrature; below the
    // two-millionth zero the amplitude is negligible and plain panels suffice
    std::vector<double> cuts{p.t1};
    for (long k = 1; k <= 2'000'000; ++k) {
      double z = oscillation_zeros(spec.osc, k);
      if (z <= p.t0) break;
      if (z < p.t1) cuts.push_back(z);
    }
    cuts.push_back(p.t0);
    std::reverse(cuts.begin(), cuts.end());
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
      const int sub = i == 0 ? 4000 : 8;
      for (int s = 0; s < sub; ++s) {
        double u = cuts[i] + (cuts[i + 1] - cuts[i]) * s / sub;
        double v = cuts[i] + (cuts[i + 1] - cuts[i]) * (s + 1) / sub;
        L += p.arc(u, v);
      }
    }
  }
  return L;
}

// Distinct piece endpoints, used as feature points by the property scans.
inline std::vector<Point> breakpoints(const CurveSpec& spec, const SamplerCfg& cfg) {
  std::vector<Point> out;
  for (const auto& p : pieces(spec, cfg.t_min))
    for (Point q : {p.p0, p.p1})
      if (std::find(out.begin(), out.end(), q) == out.end()) out.push_back(q);
  return out;
}

// ---------------------------------------------------------------------------
// Discretization

inline WeightedCloud discretize(const CurveSpec& spec, const SamplerCfg& cfg, std::string label = {}) {
  validate(cfg);
  auto ps = pieces(spec, cfg.t_min);
  const double hs = cfg.h_straight > 0 ? cfg.h_straight : cfg.h;
  std::vector<Point> pts;
  std::vector<double> w;
  std::vector<CurveParam> prm;
  bool aliased = false;
  std::size_t count = 0;
  for (const auto& p : ps) {
    double h = p.straight ? hs : cfg.h;
    std::vector<double> ts{p.t0};
    double t = p.t0;
    while (true) {
      double sp = p.speed(t);
      double step = h / sp;
      if (p.max_step) step = std::min(step, p.max_step(t) / sp);
      if (p.phase_rate) {
        double dt_phase = cfg.dphi_max / p.phase_rate(t);
        if (dt_phase < cfg.h_min / sp) {
          aliased = true;
          dt_phase = cfg.h_min / sp;
        }
        step = std::min(step, dt_phase);
      }
      double next = t + step;
      if (next >= p.t1 - 1e-3 * step) break;
      ts.push_back(next);
      t = next;
      if (++count > cfg.point_cap) {
        double suggested = cfg.t_min * double(count + (ps.size() > 1 ? 1 : 0)) / double(cfg.point_cap) * 4.0;
        throw ResolutionError("discretize: point budget exceeded; raise t_min or h", suggested);
      }
    }
    ts.push_back(p.t1);
    ++count;
    std::size_t base = pts.size();
    for (std::size_t i = 0; i < ts.size(); ++i) {
      Point q = i == 0 ? p.p0 : (i + 1 == ts.size() ? p.p1 : p.at(ts[i]));
      pts.push_back(q);
      w.push_back(0.0);
      prm.push_back({ts[i], p.speed(ts[i])});
    }
    for (std::size_t i = 0; i + 1 < ts.size(); ++i) {
      double a = p.arc(ts[i], ts[i + 1]);
      w[base + i] += 0.5 * a;
      w[base + i + 1] += 0.5 * a;
    }
  }
  WeightedCloud c;
  c.dim = curve_dim(spec);
  c.points = std::move(pts);
  c.weights = std::move(w);
  c.params = std::move(prm);
  c.label = std::move(label);
  c.spacing = std::max(cfg.h, hs);
  c.aliased = aliased;
  normalize(c);
  return c;
}

// ---------------------------------------------------------------------------
// Checks

struct AhlforsRatio {
  double inf = std::numeric_limits<double>::infinity();
  double sup = 0.0;
};

inline AhlforsRatio ahlfors_ratio(const WeightedCloud& c, std::span<const BallSpec> balls) {
  AhlforsRatio r;
  for (const auto& b : balls) {
    double q = mu_ball(c, b) / b.radius;
    r.inf = std::min(r.inf, q);
    r.sup = std::max(r.sup, q);
  }
  return r;
}

struct SeparationCheck {
  bool ok = true;
  double min_margin = std::numeric_limits<double>::infinity();
  double witness_t = 0.0, witness_r = 0.0;
};

// u(t): radial gap between the unit circle and the far side of B(1-r, r) along the ray at angle t.
inline double tangential_gap(double t, double r) {
  double q = (1 - r) * (1 - r) * std::cos(t) * std::cos(t) + 2 * r - 1;
  if (q < 0) return std::numeric_limits<double>::infinity();
  return 1 - (1 - r) * std::cos(t) - std::sqrt(q);
}

inline SeparationCheck tangential_separation_check(double A0, std::span<const double> ts,
                                                   std::span<const double> rs) {
  if (!(A0 > 0)) throw ParameterError("tangential_separation_check: A0 must be positive");
  Oscillator osc{Oscillation::Poly, A0};
  SeparationCheck out;
  for (double r : rs) {
    double tmax = std::atan(r / (1 - r));
    for (double t : ts) {
      if (t <= 0 || t > tmax) continue;
      double m = tangential_gap(t, r) - std::abs(osc.eps(t));
      if (m < out.min_margin) {
        out.min_margin = m;
        out.witness_t = t;
        out.witness_r = r;
      }
    }
  }
  out.ok = out.min_margin > 0;
  return out;
}

}  // namespace homtype
