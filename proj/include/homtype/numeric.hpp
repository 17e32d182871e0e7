#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

namespace homtype {

// Neumaier compensated sum.
class KahanSum {
 public:
  void add(double v) {
    double t = sum_ + v;
    if (std::abs(sum_) >= std::abs(v))
      comp_ += (sum_ - t) + v;
    else
      comp_ += (v - t) + sum_;
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

inline double ksum(std::span<const double> v) {
  KahanSum s;
  for (double x : v) s.add(x);
  return s.value();
}

struct LogLogFit {
  double slope = 0.0;
  double intercept = 0.0;  // log C
  double r2 = 0.0;
  std::size_t n = 0;
  std::vector<double> residuals;
  double constant() const { return std::exp(intercept); }
};

// Least squares fit of log y = intercept + slope * log x. Nonpositive entries are skipped.
inline LogLogFit fit_loglog(std::span<const double> xs, std::span<const double> ys) {
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < xs.size() && i < ys.size(); ++i) {
    if (xs[i] > 0 && ys[i] > 0 && std::isfinite(xs[i]) && std::isfinite(ys[i])) {
      lx.push_back(std::log(xs[i]));
      ly.push_back(std::log(ys[i]));
    }
  }
  LogLogFit fit;
  fit.n = lx.size();
  if (fit.n < 2) return fit;
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < fit.n; ++i) {
    mx += lx[i];
    my += ly[i];
  }
  mx /= double(fit.n);
  my /= double(fit.n);
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < fit.n; ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
    syy += (ly[i] - my) * (ly[i] - my);
  }
  if (sxx <= 0) return fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double ssr = 0;
  fit.residuals.resize(fit.n);
  for (std::size_t i = 0; i < fit.n; ++i) {
    fit.residuals[i] = ly[i] - (fit.intercept + fit.slope * lx[i]);
    ssr += fit.residuals[i] * fit.residuals[i];
  }
  // A flat series is explained perfectly by a zero slope.
  fit.r2 = syy > 1e-300 ? 1.0 - ssr / syy : 1.0;
  return fit;
}

inline std::vector<double> logspace(double lo, double hi, std::size_t n) {
  std::vector<double> v(n);
  if (n == 1) {
    v[0] = lo;
    return v;
  }
  double a = std::log(lo), b = std::log(hi);
  for (std::size_t i = 0; i < n; ++i) v[i] = std::exp(a + (b - a) * double(i) / double(n - 1));
  v.front() = lo;
  v.back() = hi;
  return v;
}

// 64-bit FNV-1a, used for config hashes that must be stable across runs and platforms.
inline std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  static const char* digits = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[std::size_t(i)] = digits[v & 0xf];
    v >>= 4;
  }
  return out;
}

// Five-point Gauss-Legendre rule on [a, b].
template <class F>
double gauss5(F&& f, double a, double b) {
  static constexpr double x[5] = {0.0, -0.5384693101056831, 0.5384693101056831,
                                  -0.9061798459386640, 0.9061798459386640};
  static constexpr double w[5] = {0.5688888888888889, 0.4786286704993665, 0.4786286704993665,
                                  0.2369268850561891, 0.2369268850561891};
  double c = 0.5 * (a + b), h = 0.5 * (b - a), s = 0;
  for (int i = 0; i < 5; ++i) s += w[i] * f(c + h * x[i]);
  return s * h;
}

}  // namespace homtype
