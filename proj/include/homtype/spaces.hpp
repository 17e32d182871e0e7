#pragma once

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "homtype/curves.hpp"
#include "homtype/properties.hpp"

namespace homtype {

// A built-in example space: curve spec (absent for the grid), default sampler and scan probes.
struct SpaceDef {
  std::string id;
  std::string description;
  bool is_curve = true;
  CurveSpec spec;
  SamplerCfg sampler;
  std::size_t grid_m = 0;  // grid side count when !is_curve
};

inline std::vector<SpaceDef> builtin_spaces() {
  std::vector<SpaceDef> v;
  auto curve = [&](std::string id, std::string desc, CurveSpec s, SamplerCfg c = {}) {
    v.push_back({std::move(id), std::move(desc), true, s, c, 0});
  };
  {
    CurveSpec s;
    s.kind = CurveKind::Line;
    SamplerCfg c;
    c.h = 1e-4;
    curve("line", "unit segment [0,1]", s, c);
  }
  {
    CurveSpec s;
    s.kind = CurveKind::GappedLine;
    s.lo = -0.5;
    s.hi = 3.5;
    s.eps0 = 0.1;
    SamplerCfg c;
    c.h = 1e-4;
    curve("gapped-line", "[-0.5,3.5] minus I_n = (n - a_n, n - a_n^2), a_n = 0.1/2^(n-1), n = 1..3", s, c);
  }
  {
    CurveSpec s;
    s.kind = CurveKind::Triangle;
    SamplerCfg c;
    c.h = 2e-4;
    curve("triangle", "edges of the triangle (0,0), (1,0), (0.3,0.8)", s, c);
  }
  {
    CurveSpec s;
    s.kind = CurveKind::Tessera;
    s.k_max = 6;
    curve("tessera", "dyadic stairway spiral, half-circles of radius 1..32", s);
  }
  {
    CurveSpec s;
    s.kind = CurveKind::TesseraTruncated;
    s.tail_length = 8;
    curve("tessera-truncated", "spiral up to radius 8 followed by the half-line [8,16]", s);
  }
  {
    CurveSpec s;
    s.kind = CurveKind::PerturbedCircle;
    s.osc = Oscillation::Exp;
    SamplerCfg c;
    c.h = 2e-5;
    c.h_straight = 1e-3;
    c.t_min = 2e-3;
    c.h_min = 1e-6;
    curve("x1", "unit half-circle with exponential oscillation, segment [0,1] and tail [-4,-1]", s, c);
  }
  {
    CurveSpec s;
    s.kind = CurveKind::PerturbedCircle;
    s.osc = Oscillation::Poly;
    s.A0 = 0.01;
    SamplerCfg c;
    c.t_min = 1e-3;
    c.dphi_max = std::numbers::pi / 16;
    curve("x2", "unit half-circle with polynomial oscillation (A0 = 0.01), segment [0,1] and tail [-4,-1]", s, c);
  }
  {
    SpaceDef g;
    g.id = "grid";
    g.description = "64 x 64 cell-centred grid on the unit square";
    g.is_curve = false;
    g.grid_m = 64;
    v.push_back(g);
  }
  return v;
}

inline SpaceDef find_space(const std::string& id) {
  for (auto& s : builtin_spaces())
    if (s.id == id) return s;
  throw ParameterError("unknown space: " + id);
}

inline WeightedCloud build_space(const SpaceDef& s) {
  if (!s.is_curve) return uniform_grid(s.grid_m, 1.0, s.id);
  return discretize(s.spec, s.sampler, s.id);
}

inline WeightedCloud build_space(const SpaceDef& s, const SamplerCfg& cfg) {
  if (!s.is_curve) return uniform_grid(s.grid_m, 1.0, s.id);
  return discretize(s.spec, cfg, s.id);
}

// Probes: curve breakpoints as features, plus the planted witnesses for each counterexample.
inline Probes space_probes(const SpaceDef& s, const SamplerCfg& cfg) {
  Probes p;
  if (!s.is_curve) return p;
  p.features = breakpoints(s.spec, cfg);
  switch (s.spec.kind) {
    case CurveKind::GappedLine: {
      // B(n - 1/2, 1/2) keeps the sliver [n - a^2, n) apart from the rest of the ball
      std::vector<HBProbe> fam;
      for (int n = 1; n <= 3; ++n) {
        double a = s.spec.eps0 / std::ldexp(1.0, n - 1);
        if (n - a * a >= s.spec.hi) break;
        fam.push_back({{{n - 0.5, 0}, 0.5}, {n - a * a, 0}});
      }
      p.hb_families.push_back(fam);
      break;
    }
    case CurveKind::Tessera:
    case CurveKind::TesseraTruncated: {
      std::vector<HBProbe> fam;
      for (double e : {1e-2, 2.5e-3, 6.25e-4}) fam.push_back({{{0, 4}, 3 + e}, {0, 1}});
      p.hb_families.push_back(fam);
      for (double R = 1; R <= 32; R *= 2) p.balls.push_back({{0, 0}, R * (1 + 1e-9)});
      break;
    }
    case CurveKind::PerturbedCircle: {
      BallSpec unit{{0, 0}, 1.0};
      p.balls.push_back(unit);
      if (s.spec.osc == Oscillation::Poly)
        for (double R : logspace(3e-3, 1e-1, 7)) p.windows.push_back({unit, {{1, 0}, R}});
      break;
    }
    default:
      break;
  }
  return p;
}

inline Probes space_probes(const SpaceDef& s) { return space_probes(s, s.sampler); }

}  // namespace homtype
