#include <gtest/gtest.h>

#include <numbers>

#include "homtype/curves.hpp"
#include "homtype/spaces.hpp"

using namespace homtype;

namespace {

constexpr double pi = std::numbers::pi;

// Reference value from tests/oracles/compute.py: arc length of x2 over (1e-3, pi).
constexpr double kX2ArcLength = 3.13713256099299;

}  // namespace

TEST(Tessera, Breakpoints) {
  EXPECT_EQ(tessera_breakpoint(0), 0.0);
  EXPECT_EQ(tessera_breakpoint(1), 1.0);
  EXPECT_NEAR(tessera_breakpoint(2), 1 + pi, 1e-14);
  EXPECT_NEAR(tessera_breakpoint(3), 2 + pi, 1e-14);
  for (int i = 1; i < 12; ++i) EXPECT_LT(tessera_breakpoint(i), tessera_breakpoint(i + 1));
  EXPECT_THROW(tessera_breakpoint(-1), ParameterError);

  CurveSpec s;
  s.kind = CurveKind::Tessera;
  auto g = gamma(s, tessera_breakpoint(2));
  EXPECT_NEAR(g.x, -1, 1e-12);
  EXPECT_NEAR(g.y, 0, 1e-12);
  g = gamma(s, tessera_breakpoint(3));
  EXPECT_NEAR(g.x, -2, 1e-12);
  EXPECT_NEAR(g.y, 0, 1e-12);
}

TEST(Tessera, TotalLengthClosedForm) {
  CurveSpec s;
  s.kind = CurveKind::Tessera;
  s.k_max = 5;
  SamplerCfg cfg;
  cfg.h = 1e-2;
  auto c = discretize(s, cfg);
  EXPECT_NEAR(c.total_mass(), 32 + 31 * pi, 1e-9);
  EXPECT_NEAR(analytic_length(s, cfg.t_min), 32 + 31 * pi, 1e-9);
}

TEST(PerturbedCircle, QuarterPoint) {
  CurveSpec s;
  s.kind = CurveKind::PerturbedCircle;
  s.osc = Oscillation::Poly;
  auto g = gamma(s, pi / 2);
  EXPECT_NEAR(g.x, 0, 1e-12);
  EXPECT_NEAR(g.y, 1, 1e-12);
}

TEST(PerturbedCircle, ExpZerosOnUnitCircle) {
  CurveSpec s;
  s.kind = CurveKind::PerturbedCircle;
  s.osc = Oscillation::Exp;
  for (long k : {2, 3, 5}) {
    auto g = gamma(s, oscillation_zeros(Oscillation::Exp, k));
    EXPECT_NEAR(std::hypot(g.x, g.y), 1.0, 1e-12) << k;
  }
}

TEST(PerturbedCircle, OscillationZeros) {
  EXPECT_NEAR(oscillation_zeros(Oscillation::Poly, 4), pi / 4, 1e-15);
  EXPECT_NEAR(oscillation_zeros(Oscillation::Exp, 1), pi, 1e-15);
  for (long k = 1; k < 50; ++k) {
    double gap = oscillation_zeros(Oscillation::Poly, k) - oscillation_zeros(Oscillation::Poly, k + 1);
    EXPECT_NEAR(gap, pi / double(k * (k + 1)), 1e-14) << k;
  }
  EXPECT_THROW(oscillation_zeros(Oscillation::Poly, 0), ParameterError);
}

TEST(PerturbedCircle, ArcMassMatchesOracle) {
  auto s = find_space("x2");
  auto c = discretize(s.spec, s.sampler);
  ASSERT_EQ(c.params.size(), c.size());
  // arc samples are the ones with parameter in (t_min, pi); the segment uses t in [-1, 0]
  double m = 0;
  for (std::size_t i = 0; i < c.size(); ++i) {
    double t = c.params[i].t;
    if (t > 1e-3 && t < pi) m += c.weights[i];
  }
  EXPECT_NEAR(m / kX2ArcLength, 1.0, 1e-2);
}

TEST(PerturbedCircle, RejectsBadParameters) {
  CurveSpec s;
  s.kind = CurveKind::PerturbedCircle;
  s.osc = Oscillation::Exp;
  SamplerCfg cfg;
  cfg.t_min = 1e-4;
  EXPECT_THROW(discretize(s, cfg), ParameterError);
  s.osc = Oscillation::Poly;
  s.A0 = 0;
  EXPECT_THROW(discretize(s, SamplerCfg{}), ParameterError);
}

TEST(Line, TotalMass) {
  CurveSpec s;
  SamplerCfg cfg;
  cfg.h = 1e-3;
  auto c = discretize(s, cfg);
  EXPECT_NEAR(c.total_mass(), 1.0, 1e-6);
  EXPECT_EQ(c.dim, 1);
}

TEST(Line, AhlforsRatioBounded) {
  CurveSpec s;
  SamplerCfg cfg;
  cfg.h = 1e-4;
  auto c = discretize(s, cfg);
  std::vector<BallSpec> balls;
  for (double x : {0.0, 0.3, 0.7, 1.0})
    for (double r : {1e-2, 0.1, 0.5, 2.0}) balls.push_back({{x, 0}, r});
  auto a = ahlfors_ratio(c, balls);
  EXPECT_GE(a.inf, 0.5 - 1e-3);  // a ball centred at an endpoint of a long enough segment
  EXPECT_LE(a.sup, 2.0 + 1e-9);
}

TEST(GappedLine, GapsCarryNoMass) {
  auto s = find_space("gapped-line");
  auto c = discretize(s.spec, s.sampler);
  double a = s.spec.eps0;
  for (const auto& p : c.points) EXPECT_FALSE(p.x > 1 - a + 1e-12 && p.x < 1 - a * a - 1e-12) << p.x;
  EXPECT_NEAR(c.total_mass(), 4 - (a - a * a) - (a / 2 - a * a / 4) - (a / 4 - a * a / 16), 1e-9);
}

TEST(Triangle, PerimeterAndFeatures) {
  auto s = find_space("triangle");
  auto c = discretize(s.spec, s.sampler);
  const auto& v = s.spec.vertices;
  EXPECT_NEAR(c.total_mass(), dist(v[0], v[1]) + dist(v[1], v[2]) + dist(v[2], v[0]), 1e-12);
  EXPECT_EQ(breakpoints(s.spec, s.sampler).size(), 3u);
  CurveSpec flat = s.spec;
  flat.vertices = {{{0, 0}, {1, 0}, {2, 0}}};
  EXPECT_THROW(discretize(flat, s.sampler), ParameterError);
}

TEST(Sampler, Validation) {
  SamplerCfg c;
  c.h = 0;
  EXPECT_THROW(validate(c), ParameterError);
  c = {};
  c.dphi_max = 1.0;
  EXPECT_THROW(validate(c), ParameterError);
  c = {};
  c.h_min = 2 * c.h;
  EXPECT_THROW(validate(c), ParameterError);
}

TEST(TangentialSeparation, SmallAmplitudePasses) {
  auto ts = logspace(1e-4, 0.5, 200);
  auto rs = logspace(1e-3, 0.5, 40);
  EXPECT_TRUE(tangential_separation_check(0.01, ts, rs).ok);
  auto bad = tangential_separation_check(100.0, ts, rs);
  EXPECT_FALSE(bad.ok);
  EXPECT_LT(bad.min_margin, 0);
  EXPECT_THROW(tangential_separation_check(0, ts, rs), ParameterError);
}

TEST(TangentialSeparation, GapQuadraticLowerBound) {
  for (double r : {0.05, 0.2, 0.5})
    for (double t : logspace(1e-3, std::atan(r / (1 - r)), 30))
      EXPECT_GE(tangential_gap(t, r), 3.0 / 16.0 * t * t * (1 - 1e-9)) << t << " " << r;
}
