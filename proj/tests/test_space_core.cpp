#include <gtest/gtest.h>

#include <random>

#include "homtype/bump.hpp"
#include "homtype/measure.hpp"
#include "homtype/spaces.hpp"

using namespace homtype;

namespace {

// Reference values from tests/oracles/compute.py.
constexpr double kBumpC = 0.29148487185844052;
constexpr double kLambdaTildeLine = 0.90256865513342049;

WeightedCloud small_curve(const std::string& id, double h) {
  auto s = find_space(id);
  auto cfg = s.sampler;
  cfg.h = h;
  cfg.h_straight = 0;
  cfg.h_min = std::min(cfg.h_min, h);
  if (s.spec.kind == CurveKind::PerturbedCircle) {
    cfg.t_min = 2e-2;
    cfg.dphi_max = std::numbers::pi / 8;
  }
  return discretize(s.spec, cfg, id);
}

}  // namespace

TEST(Cloud, MergesCoincidentPoints) {
  auto c = make_cloud(2, {{0, 0}, {1, 0}, {0, 0}}, {1.0, 2.0, 3.0});
  ASSERT_EQ(c.size(), 2u);
  EXPECT_EQ(c.points[0], (Point{0, 0}));
  EXPECT_DOUBLE_EQ(c.weights[0], 4.0);
  EXPECT_DOUBLE_EQ(c.weights[1], 2.0);
}

TEST(Cloud, RejectsBadInput) {
  EXPECT_THROW(make_cloud(2, {{0, 0}}, {0.0}), ParameterError);
  EXPECT_THROW(make_cloud(2, {{0, 0}}, {-1.0}), ParameterError);
  EXPECT_THROW(make_cloud(2, {{0, 0}, {1, 1}}, {1.0}), ParameterError);
  EXPECT_THROW(make_cloud(3, {{0, 0}}, {1.0}), ParameterError);
  EXPECT_THROW(make_cloud(2, {}, {}), ParameterError);
  EXPECT_THROW(make_cloud(2, {{std::nan(""), 0}}, {1.0}), ParameterError);
}

TEST(MuBall, UniformInterval) {
  auto c = uniform_line(0, 1, 10000);
  EXPECT_NEAR(mu_ball(c, {{0.5, 0}, 0.25}), 0.5, 2e-4);
}

TEST(MuBall, OpenConvention) {
  auto c = make_cloud(1, {{0, 0}, {1, 0}}, {1.0, 1.0});
  EXPECT_DOUBLE_EQ(mu_ball(c, {{0, 0}, 1.0}), 1.0);  // the point at distance r is outside
  EXPECT_DOUBLE_EQ(mu_ball(c, {{0, 0}, 1.0 + 1e-9}), 2.0);
  EXPECT_DOUBLE_EQ(lambda(c, {0, 0}, {1, 0}), 1.0);
}

TEST(MuBall, MonotoneAndLeftContinuous) {
  auto c = small_curve("triangle", 1e-2);
  Point z = c.points[7];
  auto prof = distance_profile(c, z);
  double prev = 0;
  for (double r = 1e-3; r < 2; r *= 1.1) {
    double m = mu_ball(c, {z, r});
    EXPECT_GE(m, prev);
    prev = m;
  }
  // at a distance value d_k the open ball excludes the point; just above it includes it
  for (std::size_t k = 1; k < prof.d.size(); k += 37) {
    double d = prof.d[k];
    if (d == prof.d[k - 1]) continue;
    EXPECT_NEAR(mu_ball(c, {z, d}), prof.cum[k], 1e-12);
    EXPECT_NEAR(prof.open_mass(d), mu_ball(c, {z, d}), 1e-12);
  }
}

TEST(MuBall, TesseraOracle) {
  auto c = small_curve("tessera", 1e-3);
  // segment [0,1], radius-1 half-circle and segment [-2,-1)
  EXPECT_NEAR(mu_ball(c, {{0, 0}, 2.0}), 2 + std::numbers::pi, 5e-3);
  for (int k = 2; k <= 4; ++k) {
    double R = std::ldexp(1.0, k);
    double q = mu_ball(c, {{0, 0}, R}) / R;
    EXPECT_GT(q, 1.0);
    EXPECT_LT(q, 8.0);
  }
}

TEST(Lambda, UniformInterval) {
  auto c = uniform_line(0, 1, 10000);
  EXPECT_NEAR(lambda(c, {0.2, 0}, {0.5, 0}), 0.5, 2e-4);
  EXPECT_THROW(lambda(c, {0.2, 0}, {0.2, 0}), DegeneratePairError);
}

TEST(Lambda, QuasiSymmetryBoundedByDoubling) {
  for (const char* id : {"line", "triangle", "tessera-truncated"}) {
    auto c = small_curve(id, 5e-3);
    std::mt19937_64 rng(5);
    std::uniform_int_distribution<std::size_t> pick(0, c.size() - 1);
    std::vector<BallSpec> balls;
    double worst = 1;
    for (int k = 0; k < 300; ++k) {
      std::size_t a = pick(rng), b = pick(rng);
      if (a == b) continue;
      double rho = dist(c.points[a], c.points[b]);
      double q = lambda(c, c.points[a], c.points[b]) / lambda(c, c.points[b], c.points[a]);
      worst = std::max({worst, q, 1 / q});
      balls.push_back({c.points[a], rho});
      balls.push_back({c.points[b], rho});
    }
    double CD = doubling_constant(c, balls).constant;
    EXPECT_LE(worst, CD * CD) << id;
  }
}

TEST(Bump, NormalizationMatchesOracle) {
  auto b = BumpSpec::standard();
  EXPECT_NEAR(b.c, kBumpC, 1e-12);
  EXPECT_NEAR(b.log_integral(), 1.0, 1e-12);
  EXPECT_EQ(b.phi(1.0), 0.0);
  EXPECT_EQ(b.phi(4.0), 0.0);
}

TEST(LambdaTilde, LineOracle) {
  // unit density on [-5, 5]: lambda(y, r) = 2r for the balls involved
  auto c = uniform_line(-5, 5, 100000);
  double v = lambda_tilde(c, {0.0, 0}, {1.0, 0});
  EXPECT_NEAR(v, kLambdaTildeLine, 2e-4);
  EXPECT_GE(v, mu_ball(c, {{1, 0}, 0.25}));
  EXPECT_LE(v, mu_ball(c, {{1, 0}, 1.0}));
}

TEST(LambdaTilde, SandwichOnBuiltins) {
  for (const char* id : {"line", "gapped-line", "triangle", "tessera-truncated", "x2"}) {
    auto c = small_curve(id, 2e-2);
    std::mt19937_64 rng(9);
    std::uniform_int_distribution<std::size_t> pick(0, c.size() - 1);
    for (int k = 0; k < 40; ++k) {
      std::size_t a = pick(rng), b = pick(rng);
      if (a == b) continue;
      const Point &x = c.points[a], &y = c.points[b];
      double rho = dist(x, y);
      double v = lambda_tilde(c, x, y);
      EXPECT_GE(v, mu_ball(c, {y, rho / 4}) * (1 - 1e-6)) << id;
      EXPECT_LE(v, mu_ball(c, {y, rho}) * (1 + 1e-6)) << id;
    }
  }
}

TEST(LambdaTilde, LipschitzRatioBounded) {
  auto c = small_curve("triangle", 5e-3);
  std::mt19937_64 rng(21);
  std::uniform_int_distribution<std::size_t> pick(0, c.size() - 1);
  double K = 0;
  int used = 0;
  while (used < 60) {
    std::size_t a = pick(rng), b = pick(rng), a2 = pick(rng);
    const Point &x = c.points[a], &y = c.points[b], &x2 = c.points[a2];
    double rho = dist(x, y), d = dist(x, x2);
    if (a == b || a == a2 || a2 == b || d > rho / 2 || rho < 0.05) continue;
    double l1 = lambda_tilde(c, x, y), l2 = lambda_tilde(c, x2, y);
    K = std::max(K, std::abs(1 / l1 - 1 / l2) / ((d / rho) / l1));
    ++used;
  }
  EXPECT_LT(K, 50.0);
}

TEST(Layer, UniformLineFourEps) {
  auto c = uniform_line(0, 1, 100000);
  for (double eps : {1e-3, 1e-2, 5e-2}) {
    auto L = layer(c, {{0.5, 0}, 0.2}, eps);
    EXPECT_NEAR(L.mass, 4 * eps, 6 * c.spacing) << eps;
    EXPECT_TRUE(L.resolved);
  }
}

TEST(Layer, InsideCorona) {
  for (const char* id : {"line", "triangle", "tessera-truncated", "x2"}) {
    auto c = small_curve(id, 1e-2);
    std::mt19937_64 rng(2);
    std::uniform_int_distribution<std::size_t> pick(0, c.size() - 1);
    for (int k = 0; k < 20; ++k) {
      Point x = c.points[pick(rng)];
      double r = 0.1 + 0.5 * double(k) / 20;
      for (double eps : {1e-2, 3e-2}) {
        auto L = layer(c, {x, r}, eps);
        auto C = corona_indices(c, x, r + 2 * eps, 3 * eps);
        EXPECT_TRUE(std::includes(C.begin(), C.end(), L.indices.begin(), L.indices.end())) << id;
      }
    }
  }
}

TEST(Corona, UniformLine) {
  auto c = uniform_line(0, 1, 10000);
  EXPECT_NEAR(corona(c, {0.5, 0}, 0.2, 0.1), 0.2, 2e-4);
  EXPECT_THROW(corona(c, {0.5, 0}, 0.2, 0.3), ParameterError);
}

TEST(Doubling, UniformLineInterior) {
  auto c = uniform_line(0, 1, 10000);
  std::vector<BallSpec> b;
  for (double r : {0.01, 0.05, 0.1}) b.push_back({{0.5, 0}, r});
  EXPECT_LE(doubling_constant(c, b).constant, 2 + 1e-3);
}

TEST(Maximal, ConstantFunction) {
  auto c = small_curve("triangle", 1e-2);
  std::vector<double> f(c.size(), -3.0);
  std::vector<double> radii{0.01, 0.1, 0.5};
  EXPECT_DOUBLE_EQ(maximal_function(c, f, c.points[3], radii), 3.0);
}

TEST(Maximal, BruteForceOracle) {
  auto c = uniform_line(0, 1, 200);
  std::vector<double> f(c.size());
  for (std::size_t i = 0; i < c.size(); ++i) f[i] = c.points[i].x <= 0.5 ? 1.0 : 0.0;
  Point x{0.75, 0};
  // every distinct ball: radii just above each distance value
  std::vector<double> d;
  for (const auto& p : c.points) d.push_back(dist(p, x));
  std::sort(d.begin(), d.end());
  double brute = 0;
  std::vector<double> radii;
  for (double r : d) {
    double rr = r * (1 + 1e-9) + 1e-15;
    radii.push_back(rr);
    double m = 0, s = 0;
    for (std::size_t i = 0; i < c.size(); ++i)
      if (dist(c.points[i], x) < rr) {
        m += c.weights[i];
        s += c.weights[i] * f[i];
      }
    if (m > 0) brute = std::max(brute, s / m);
  }
  EXPECT_NEAR(maximal_function(c, f, x, radii), brute, 1e-12);
}

TEST(Maximal, DominatesBallAverages) {
  auto c = uniform_grid(16);
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-1, 1);
  std::vector<double> f(c.size());
  for (auto& v : f) v = u(rng);
  std::vector<double> radii{0.05, 0.1, 0.2, 0.4};
  for (std::size_t i = 0; i < c.size(); i += 17) {
    double M = maximal_function(c, f, c.points[i], radii);
    for (double r : radii) {
      double m = 0, s = 0;
      for (std::size_t j = 0; j < c.size(); ++j)
        if (inside(dist(c.points[i], c.points[j]), r)) {
          m += c.weights[j];
          s += c.weights[j] * f[j];
        }
      EXPECT_GE(M + 1e-12, std::abs(s / m));
    }
  }
}

TEST(Maximal, WeakTypeOneOne) {
  auto c = uniform_line(0, 1, 400);
  std::vector<double> radii = logspace(1e-3, 1, 16);
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(0, 1);
  double C = 0;
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> f(c.size(), 0.0);
    for (int b = 0; b < 5; ++b) f[std::size_t(u(rng) * double(c.size()))] = 1 / u(rng);
    double l1 = 0;
    for (std::size_t i = 0; i < c.size(); ++i) l1 += c.weights[i] * f[i];
    std::vector<double> M(c.size());
    for (std::size_t i = 0; i < c.size(); ++i) M[i] = maximal_function(c, f, c.points[i], radii);
    for (double alpha : {0.5, 1.0, 4.0, 16.0}) {
      double m = 0;
      for (std::size_t i = 0; i < c.size(); ++i)
        if (M[i] > alpha) m += c.weights[i];
      C = std::max(C, m * alpha / l1);
    }
  }
  EXPECT_LT(C, 10.0);
}
