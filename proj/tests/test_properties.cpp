#include <gtest/gtest.h>

#include "homtype/properties.hpp"
#include "homtype/spaces.hpp"

using namespace homtype;

namespace {

// A one-source fit with measure = C * ratio^eta on the given ratios.
DecayFit power_fit(std::vector<double> ratios, double C, double eta) {
  DecayFit f;
  for (double r : ratios) {
    double m = C * std::pow(r, eta);
    f.ratio.push_back(r);
    f.measure.push_back(m);
    f.witness_ball.push_back({{0, 0}, 1.0});
    f.witness_window.push_back({{}, 0.0});
    f.raw.push_back({r, m, 0, {{0, 0}, 1.0}});
  }
  auto fit = fit_loglog(f.ratio, f.measure);
  f.eta = fit.slope;
  f.C = fit.constant();
  f.r2 = fit.r2;
  return f;
}

WeightedCloud curve(const std::string& id, double h) {
  auto s = find_space(id);
  auto cfg = s.sampler;
  cfg.h = h;
  cfg.h_min = std::min(cfg.h_min, h);
  return discretize(s.spec, cfg, id);
}

void expect_invariants(const PropertyVerdict& v) {
  if (v.verdict == Verdict::fails) {
    EXPECT_FALSE(v.witness.empty()) << to_string(v.property);
  } else {
    EXPECT_TRUE(v.witness.empty()) << to_string(v.property);
  }
}

}  // namespace

TEST(DecayVerdict, Ladder) {
  Thresholds t;
  auto grid = logspace(1e-4, 1e-1, 7);
  auto holds = decay_verdict(Property::LD, power_fit(grid, 2.0, 0.3), t);
  EXPECT_EQ(holds.verdict, Verdict::holds);
  EXPECT_NEAR(holds.exponent, 0.3, 1e-12);
  EXPECT_NEAR(holds.worst_exponent, 0.3, 1e-9);
  expect_invariants(holds);

  auto flat = decay_verdict(Property::LD, power_fit(grid, 0.5, 0.01), t);
  EXPECT_EQ(flat.verdict, Verdict::fails);
  expect_invariants(flat);

  // constant at exponent 0.2 grows by 1e3^0.12 > 2 across the scan
  auto weak = decay_verdict(Property::LD, power_fit(grid, 1.0, 0.08), t);
  EXPECT_EQ(weak.verdict, Verdict::fails);
  expect_invariants(weak);

  // growth 1e3^0.08 < 2 and exponent below the hold threshold
  auto between = decay_verdict(Property::LD, power_fit(grid, 1.0, 0.12), t);
  EXPECT_EQ(between.verdict, Verdict::inconclusive);
  expect_invariants(between);

  auto few = decay_verdict(Property::LD, power_fit({1e-2, 1e-1}, 1.0, 1.0), t);
  EXPECT_EQ(few.verdict, Verdict::inconclusive);
  expect_invariants(few);

  auto short_range = decay_verdict(Property::LD, power_fit(logspace(1e-2, 5e-2, 4), 1.0, 1.0), t);
  EXPECT_EQ(short_range.verdict, Verdict::inconclusive);
}

TEST(DecayScan, LineAnnularExponentNearOne) {
  auto c = uniform_line(0, 1, 20000);
  auto theta = logspace(1e-3, 1e-1, 7);
  std::vector<Point> centers{{0.3, 0}, {0.5, 0}, {0.8, 0}};
  auto f = annular_decay_scan(c, centers, 0.05, 0.2, theta);
  EXPECT_NEAR(f.eta, 1.0, 0.1);
  EXPECT_GE(f.r2, 0.95);
}

TEST(DecayScan, GridAnnularExponent) {
  auto c = uniform_grid(64);
  auto theta = logspace(0.02, 0.3, 5);
  std::vector<Point> centers{{0.5, 0.5}, {0.4, 0.6}};
  auto f = annular_decay_scan(c, centers, 0.2, 0.3, theta, 2.0);
  EXPECT_GE(f.eta, 0.8);
}

TEST(DecayScan, X2UnitBallHalfExponent) {
  auto s = find_space("x2");
  auto c = discretize(s.spec, s.sampler, "x2");
  std::vector<BallSpec> ball{{{0, 0}, 1.0}};
  auto f = layer_decay_scan(c, ball, theta_grid(c, ScanCfg{}));
  EXPECT_NEAR(f.eta, 0.5, 0.1);
}

TEST(DecayScan, LayerMeasureAtMostOne) {
  auto c = curve("triangle", 2e-3);
  ScanCfg cfg;
  cfg.balls = 30;
  auto out = scan_property(c, space_probes(find_space("triangle")), cfg, Property::LD);
  for (double m : out.fit.measure) {
    EXPECT_GE(m, 0);
    EXPECT_LE(m, 1 + 1e-12);
  }
  for (std::size_t k = 1; k < out.fit.ratio.size(); ++k) EXPECT_LT(out.fit.ratio[k - 1], out.fit.ratio[k]);
  expect_invariants(out.verdict);
}

TEST(Monotone, LineConstantNearOne) {
  auto c = uniform_line(0, 1, 2000);
  ScanCfg cfg;
  cfg.pair_count = 40;
  auto out = scan_property(c, {}, cfg, Property::M);
  EXPECT_EQ(out.verdict.verdict, Verdict::holds);
  EXPECT_LE(out.m.constant, 1.2);
  EXPECT_GE(out.m.constant, 0.9);
}

TEST(Monotone, TriangleVertexWitness) {
  auto sp = find_space("triangle");
  auto c = build_space(sp);
  auto out = scan_property(c, space_probes(sp), ScanCfg{}, Property::M);
  EXPECT_EQ(out.verdict.verdict, Verdict::fails);
  expect_invariants(out.verdict);
  EXPECT_NE(out.verdict.witness.find("x=(0,0)"), std::string::npos) << out.verdict.witness;
  EXPECT_GE(out.m.trend(), 2.0);
}

TEST(HomogeneousBalls, LineBounded) {
  auto c = uniform_line(0, 1, 4000);
  ScanCfg cfg;
  cfg.hb_balls = 12;
  auto out = scan_property(c, {}, cfg, Property::HB);
  EXPECT_LE(out.hb.constant, 4.5);
  EXPECT_NE(out.verdict.verdict, Verdict::fails);
  expect_invariants(out.verdict);
}

TEST(HomogeneousBalls, GappedLineFails) {
  auto sp = find_space("gapped-line");
  auto c = build_space(sp);
  ScanCfg cfg;
  cfg.hb_balls = 12;
  auto out = scan_property(c, space_probes(sp), cfg, Property::HB);
  EXPECT_EQ(out.verdict.verdict, Verdict::fails);
  expect_invariants(out.verdict);
}

TEST(Diagram, ImplicationFlags) {
  PropertyVerdict m{Property::M, Verdict::holds}, ad{Property::AD, Verdict::fails},
      ld{Property::LD, Verdict::holds};
  std::vector<PropertyVerdict> rows{m, ad, ld};
  auto flags = implication_flags(rows);
  ASSERT_EQ(flags.size(), 1u);
  EXPECT_EQ(flags[0], "M holds but AD fails: discretization artifact");
  rows[1].verdict = Verdict::inconclusive;
  EXPECT_TRUE(implication_flags(rows).empty());
}

TEST(Diagram, ParseProperty) {
  EXPECT_EQ(parse_property("ld"), Property::LD);
  EXPECT_EQ(parse_property("Rad"), Property::RAD);
  EXPECT_EQ(parse_property("HB"), Property::HB);
  EXPECT_THROW(parse_property("xyz"), ParameterError);
}

TEST(Diagram, ScanIsDeterministic) {
  auto c = curve("tessera-truncated", 5e-3);
  auto pr = space_probes(find_space("tessera-truncated"));
  ScanCfg cfg;
  cfg.balls = 30;
  auto a = scan_property(c, pr, cfg, Property::AD);
  cfg.threads = 2;
  auto b = scan_property(c, pr, cfg, Property::AD);
  EXPECT_EQ(a.fit.measure, b.fit.measure);
  EXPECT_EQ(a.verdict.witness, b.verdict.witness);
}
