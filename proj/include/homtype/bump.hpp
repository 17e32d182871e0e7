#pragma once

#include <cmath>

#include "homtype/measure.hpp"

namespace homtype {

// phi(t) = c (t-1)^2 (4-t)^2 on [1,4], normalized so that the integral of phi(t) dt/t is 1.
struct BumpSpec {
  double c = 0.0;
  int node_count = 64;       // initial trapezoid intervals in log r
  double rel_tol = 1e-6;     // stopping rule for node doubling
  int max_doublings = 18;

  double phi(double t) const {
    if (t <= 1.0 || t >= 4.0) return 0.0;
    double a = (t - 1.0) * (4.0 - t);
    return c * a * a;
  }

  // Unit log-integral of phi, by composite Gauss-Legendre.
  double log_integral() const {
    double s = 0;
    const int panels = 256;
    for (int i = 0; i < panels; ++i) {
      double a = 1.0 + 3.0 * i / panels, b = 1.0 + 3.0 * (i + 1) / panels;
      s += gauss5([this](double t) { return phi(t) / t; }, a, b);
    }
    return s;
  }

  static BumpSpec standard() {
    BumpSpec b;
    b.c = 1.0;
    b.c = 1.0 / b.log_integral();
    return b;
  }
};

struct QuadratureResult {
  double value = 0.0;
  int nodes = 0;
  double last_change = 0.0;
};

// Trapezoid in s = log r over [log(rho/4), log rho] of lambda(y, e^s) phi(rho e^-s),
// doubling the node count until the relative change drops below bump.rel_tol.
inline QuadratureResult lambda_tilde_quadrature(const Profile& py, double rho, const BumpSpec& bump) {
  const double a = std::log(rho / 4.0), b = std::log(rho);
  auto eval_sorted = [&](const std::vector<double>& s) {
    // s ascending; one monotone pass over the profile
    KahanSum acc;
    std::size_t k = 0;
    for (double si : s) {
      double r = std::exp(si);
      double orad = open_radius(r);
      while (k < py.d.size() && py.d[k] < orad) ++k;
      acc.add(py.cum[k] * bump.phi(rho / r));
    }
    return acc.value();
  };
  int n = bump.node_count;
  double h = (b - a) / n;
  std::vector<double> s(std::size_t(n) + 1);
  for (int i = 0; i <= n; ++i) s[std::size_t(i)] = a + h * i;
  // endpoint values vanish with phi, kept for form
  double sum = eval_sorted(s);
  double t_prev = h * sum;
  QuadratureResult q;
  for (int it = 0; it < bump.max_doublings; ++it) {
    std::vector<double> mids(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) mids[std::size_t(i)] = a + h * (i + 0.5);
    sum += eval_sorted(mids);
    n *= 2;
    h *= 0.5;
    double t = h * sum;
    q.value = t;
    q.nodes = n;
    q.last_change = std::abs(t - t_prev) / std::abs(t);
    if (q.last_change <= bump.rel_tol) return q;
    t_prev = t;
  }
  throw AccuracyError("lambda_tilde: quadrature did not reach relative tolerance");
}

inline double lambda_tilde(const WeightedCloud& c, const Point& x, const Point& y,
                           const BumpSpec& bump = BumpSpec::standard()) {
  if (x == y) throw DegeneratePairError("lambda_tilde undefined on the diagonal");
  double rho = dist(x, y);
  auto py = distance_profile(c, y, rho);
  return lambda_tilde_quadrature(py, rho, bump).value;
}

// Fixed-node variant used for kernel matrices; weights are precomputed once.
class FixedBumpRule {
 public:
  explicit FixedBumpRule(const BumpSpec& bump, int nodes = 256) {
    const double a = -std::log(4.0);
    double h = -a / nodes;
    KahanSum tot;
    for (int i = 1; i < nodes; ++i) {
      double s = a + h * i;  // r = rho e^s
      double w = h * bump.phi(std::exp(-s));
      scale_.push_back(std::exp(s));
      weight_.push_back(w);
      tot.add(w);
    }
    // renormalize so that a constant lambda is reproduced exactly
    for (double& w : weight_) w /= tot.value();
  }
  template <class MassAt>
  double operator()(double rho, MassAt&& mass_open) const {
    KahanSum acc;
    for (std::size_t i = 0; i < scale_.size(); ++i) acc.add(weight_[i] * mass_open(rho * scale_[i]));
    return acc.value();
  }

 private:
  std::vector<double> scale_, weight_;
};

}  // namespace homtype
