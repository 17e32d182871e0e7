#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <random>

#include "homtype/hardy.hpp"
#include "homtype/spaces.hpp"

using namespace homtype;

namespace {

// Reference values from tests/oracles/compute.py (numpy SVD).
constexpr double kHilbert8 = 1.6990862851903152;
constexpr double kHilbert64 = 5.63339119586327;

std::vector<double> random_on(const WeightedCloud& c, std::span<const std::size_t> idx, std::uint64_t seed) {
  std::mt19937_64 g(seed);
  std::uniform_real_distribution<double> u(-1, 1);
  std::vector<double> v(c.size(), 0.0);
  for (std::size_t i : idx) v[i] = u(g);
  return v;
}

// sigma_max of the dense matrix sqrt(w_x) K[x, y] sqrt(w_y) by Eigen's SVD.
double eigen_sigma(const WeightedCloud& c, const HardySets& s, KernelKind kind) {
  KernelRows kr(c, kind);
  Eigen::MatrixXd M(s.R.size(), s.D.size());
  std::vector<double> row(s.D.size());
  for (std::size_t i = 0; i < s.R.size(); ++i) {
    kr.row(s.R[i], s.D, row);
    for (std::size_t j = 0; j < s.D.size(); ++j)
      M(Eigen::Index(i), Eigen::Index(j)) = std::sqrt(c.weights[s.R[i]] * c.weights[s.D[j]]) * row[j];
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(M);
  double a = svd.singularValues()(0);
  Eigen::JacobiSVD<Eigen::MatrixXd> svdt(M.transpose());
  EXPECT_NEAR(svdt.singularValues()(0), a, 1e-10 * a);
  return a;
}

}  // namespace

TEST(HardyForm, ZeroFunction) {
  auto c = uniform_line(-1, 3, 400);
  auto s = hardy_sets(c, {{0.5, 0}, 0.5});
  std::vector<double> f(c.size(), 0.0);
  auto g = random_on(c, s.R, 1);
  EXPECT_EQ(hardy_form(c, s, f, g), 0.0);
}

TEST(HardyForm, BilinearAndMonotone) {
  auto c = uniform_line(-1, 3, 400);
  auto s = hardy_sets(c, {{0.5, 0}, 0.5});
  auto f = random_on(c, s.D, 2), g = random_on(c, s.R, 3);
  double base = hardy_form(c, s, f, g);
  auto f2 = f;
  for (double& v : f2) v *= 3;
  EXPECT_NEAR(hardy_form(c, s, f2, g), 3 * base, 1e-12 * base);
  auto f3 = f;
  for (std::size_t i : s.D) f3[i] = std::abs(f[i]) + 0.1;
  EXPECT_GE(hardy_form(c, s, f3, g), base);
  auto bad = f;
  bad[s.R.front()] = 1;
  EXPECT_THROW(hardy_form(c, s, bad, g), ParameterError);
}

TEST(HardyNorm, OneByOneExact) {
  auto c = make_cloud(1, {{0, 0}, {1, 0}}, {0.3, 0.7});
  HardySets s{{0}, {1}};
  // lambda(1, 0) is the open ball B(1, 1), which holds only the point at 1
  auto e = hardy_norm(c, s, 2.0);
  EXPECT_NEAR(e.value, std::sqrt(0.3 / 0.7), 1e-12);
}

TEST(HardyNorm, MatchesEigenOracle) {
  auto c = uniform_line(-1, 3, 300);
  auto s = hardy_sets(c, {{0.5, 0}, 0.5});
  HardyOptions o;
  o.rel_tol = 1e-12;
  o.max_iter = 200000;
  EXPECT_NEAR(hardy_norm(c, s, 2.0, o).value, eigen_sigma(c, s, KernelKind::lambda), 1e-6);
  auto t = find_space("triangle");
  auto cfg = t.sampler;
  cfg.h = 2e-2;
  auto ct = discretize(t.spec, cfg);
  auto st = hardy_sets(ct, {{0.5, 0}, 0.3});
  EXPECT_NEAR(hardy_norm(ct, st, 2.0, o).value, eigen_sigma(ct, st, KernelKind::lambda), 1e-6);
}

TEST(HardyNorm, FormBoundedByNorm) {
  auto c = uniform_line(-1, 3, 600);
  auto s = hardy_sets(c, {{0.5, 0}, 0.5});
  double n = hardy_norm(c, s, 2.0).value;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    auto f = random_on(c, s.D, seed), g = random_on(c, s.R, seed + 100);
    double q = hardy_form(c, s, f, g) / (lp_norm(c, f, 2) * lp_norm(c, g, 2));
    EXPECT_LE(q, n * (1 + 1e-6));
  }
}

TEST(HardyNorm, AscentIsLowerBound) {
  auto c = uniform_line(-1, 3, 400);
  auto s = hardy_sets(c, {{0.5, 0}, 0.5});
  HardyOptions o;
  double sigma = hardy_norm(c, s, 2.0, o).value;
  detail::HardyOperator op(c, s, o);
  auto a = alternating_ascent(c, s, 2.0, op, o, false);
  EXPECT_TRUE(a.lower_bound);
  EXPECT_LE(a.value, sigma * (1 + 1e-6));
  EXPECT_GE(a.value, sigma * 0.99);
  auto a3 = hardy_norm(c, s, 3.0, o);
  EXPECT_TRUE(a3.lower_bound);
  EXPECT_GT(a3.value, 0);
}

TEST(HardyNorm, LineStableUnderRefinement) {
  auto coarse = uniform_line(-1, 3, 1000), fine = uniform_line(-1, 3, 2000);
  BallSpec b{{0.5, 0}, 0.5};
  double a = hardy_norm(coarse, b, 2.0).value, f = hardy_norm(fine, b, 2.0).value;
  EXPECT_LT(std::abs(f - a) / a, 0.02);
}

TEST(HardyNorm, KernelsComparable) {
  auto c = uniform_line(-1, 3, 300);
  auto s = hardy_sets(c, {{0.5, 0}, 0.5});
  HardyOptions o;
  double l = hardy_norm(c, s, 2.0, o).value;
  o.kernel = KernelKind::lambda_tilde;
  double lt = hardy_norm(c, s, 2.0, o).value;
  // lambda_tilde(x, y) lies between mu(B(y, rho/4)) and mu(B(y, rho)); lambda(x, y) = mu(B(x, rho))
  EXPECT_GE(lt / l, 1.0);
  EXPECT_LE(lt / l, 8.0);
}

TEST(HardyNorm, RejectsBadInput) {
  auto c = uniform_line(-1, 3, 100);
  auto s = hardy_sets(c, {{0.5, 0}, 0.5});
  EXPECT_THROW(hardy_norm(c, s, 1.0), ParameterError);
  EXPECT_THROW(hardy_norm(c, HardySets{{}, s.R}, 2.0), ParameterError);
  EXPECT_THROW(hardy_sets(c, {{0.5, 0}, 0.5}, 1.0), ParameterError);
}

TEST(Hilbert, SmallAndFrozen) {
  EXPECT_EQ(hilbert_like_norm(2), 0.0);
  EXPECT_NEAR(hilbert_like_norm(3), 0.5, 1e-12);
  EXPECT_NEAR(hilbert_like_norm(8), kHilbert8, 1e-9);
  EXPECT_NEAR(hilbert_like_norm(64), kHilbert64, 1e-9);
  EXPECT_THROW(hilbert_like_norm(1), ParameterError);
  EXPECT_GT(hilbert_like_norm(8, HilbertExclusion::one_sided), hilbert_like_norm(8));
}

TEST(Adversarial, CoefficientNormsMatchDiscreteNorms) {
  auto sp = find_space("x2");
  auto cfg = sp.sampler;
  cfg.t_min = 2e-2;
  cfg.h = 1e-2;
  cfg.h_straight = 1e-2;
  auto c = discretize(sp.spec, cfg);
  auto s = hardy_sets(c, {{0, 0}, 1.0});
  for (double nu : {2.0, 3.0}) {
    auto a = adversarial_pair(c, s, Oscillation::Poly, 20, nu);
    EXPECT_NEAR(lp_norm(c, a.f, nu), a.norm_f, 1e-12);
    EXPECT_NEAR(lp_norm(c, a.g, nu / (nu - 1)), a.norm_g, 1e-12);
    for (std::size_t i = 0; i < c.size(); ++i) {
      if (a.f[i] != 0) EXPECT_TRUE(std::binary_search(s.D.begin(), s.D.end(), i));
      if (a.g[i] != 0) EXPECT_TRUE(std::binary_search(s.R.begin(), s.R.end(), i));
    }
  }
  EXPECT_THROW(adversarial_pair(c, s, Oscillation::Poly, 100000), ParameterError);
  EXPECT_THROW(adversarial_pair(uniform_line(0, 1, 10), s, Oscillation::Poly, 5), ParameterError);
}

TEST(DyadicHardy, SingleCubeGenerationIsEmpty) {
  auto c = uniform_line(0, 1, 256);
  auto [a, b] = feasible_scales(c, 0.5);
  auto t = build_cubes(c, 0.5, a - 1, b);  // delta^(a-1) exceeds the diameter
  ASSERT_EQ(t.gens.front().cubes.size(), 1u);
  auto r = dyadic_hardy_check(c, t, t.j_min);
  EXPECT_TRUE(r.values.empty());
  EXPECT_EQ(r.argmax, npos);
  auto r2 = dyadic_hardy_check(c, t, t.j_min + 2);
  EXPECT_EQ(r2.values.size(), t.gen(t.j_min + 2).cubes.size());
  EXPECT_GT(r2.max_value, 0);
}
