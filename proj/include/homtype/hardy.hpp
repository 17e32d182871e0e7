#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "homtype/bump.hpp"
#include "homtype/curves.hpp"
#include "homtype/dyadic.hpp"
#include "homtype/measure.hpp"
#include "homtype/parallel.hpp"

namespace homtype {

enum class KernelKind { lambda, lambda_tilde };

inline const char* to_string(KernelKind k) { return k == KernelKind::lambda ? "lambda" : "lambda_tilde"; }

// Domain D (points of B) and range R (points of cB \ B), ascending cloud indices.
struct HardySets {
  std::vector<std::size_t> D, R;
};

inline HardySets hardy_sets(const WeightedCloud& c, const BallSpec& b, double factor = 2.0) {
  if (!(factor > 1)) throw ParameterError("hardy: dilation factor must exceed 1");
  HardySets s;
  for (std::size_t i = 0; i < c.size(); ++i) {
    double d = dist(b.center, c.points[i]);
    if (inside(d, b.radius))
      s.D.push_back(i);
    else if (inside(d, factor * b.radius))
      s.R.push_back(i);
  }
  return s;
}

// Kernel rows K[x, y] = 1/lambda(x, y) (or 1/lambda_tilde) for one x over a list of y.
class KernelRows {
 public:
  KernelRows(const WeightedCloud& c, KernelKind kind, const BumpSpec& bump = BumpSpec::standard(), int bump_nodes = 64)
      : c_(c), kind_(kind), rule_(bump, bump_nodes) {
    line_ = c.dim == 1 && kind == KernelKind::lambda;
    if (line_) {
      std::vector<std::pair<double, std::size_t>> t;
      for (std::size_t i = 0; i < c.size(); ++i) t.emplace_back(c.points[i].x, i);
      std::sort(t.begin(), t.end());
      xs_.resize(t.size());
      cum_.assign(t.size() + 1, 0.0);
      KahanSum s;
      for (std::size_t k = 0; k < t.size(); ++k) {
        xs_[k] = t[k].first;
        s.add(c.weights[t[k].second]);
        cum_[k + 1] = s.value();
      }
    }
  }

  // out[j] = K[x, ys[j]]
  void row(std::size_t x, std::span<const std::size_t> ys, std::span<double> out) const {
    const Point& px = c_.points[x];
    if (line_) {
      for (std::size_t j = 0; j < ys.size(); ++j) {
        double o = open_radius(std::abs(c_.points[ys[j]].x - px.x));
        auto lo = std::upper_bound(xs_.begin(), xs_.end(), px.x - o) - xs_.begin();
        auto hi = std::lower_bound(xs_.begin(), xs_.end(), px.x + o) - xs_.begin();
        out[j] = 1.0 / (cum_[std::size_t(hi)] - cum_[std::size_t(lo)]);
      }
      return;
    }
    if (kind_ == KernelKind::lambda) {
      auto prof = distance_profile(c_, px);
      for (std::size_t j = 0; j < ys.size(); ++j) out[j] = 1.0 / prof.open_mass(dist(px, c_.points[ys[j]]));
      return;
    }
    for (std::size_t j = 0; j < ys.size(); ++j) {
      const Point& py = c_.points[ys[j]];
      double rho = dist(px, py);
      auto prof = distance_profile(c_, py, rho);
      out[j] = 1.0 / rule_(rho, [&](double r) { return prof.open_mass(r); });
    }
  }

 private:
  const WeightedCloud& c_;
  KernelKind kind_;
  FixedBumpRule rule_;
  bool line_ = false;
  std::vector<double> xs_, cum_;
};

// Pairs closer than twice the local atom size; their kernel values are dominated by discretization.
inline bool near_diagonal(const WeightedCloud& c, std::size_t x, std::size_t y) {
  double s = (c.dim == 2 && !c.has_params()) ? c.spacing : std::max(c.weights[x], c.weights[y]);
  return dist(c.points[x], c.points[y]) < 2 * s;
}

// Absolute bilinear form sum_{y in D} sum_{x in R} |f(y)| |g(x)| w_y w_x K[x, y]; f and g are full-cloud vectors.
inline double hardy_form(const WeightedCloud& c, const HardySets& s, std::span<const double> f, std::span<const double> g,
                         KernelKind kind = KernelKind::lambda, unsigned threads = 1, std::string* warning = nullptr) {
  if (f.size() != c.size() || g.size() != c.size()) throw ParameterError("hardy_form: f and g need one value per point");
  std::vector<char> inD(c.size(), 0), inR(c.size(), 0);
  for (std::size_t i : s.D) inD[i] = 1;
  for (std::size_t i : s.R) {
    if (inD[i]) throw ParameterError("hardy_form: D and R intersect");
    inR[i] = 1;
  }
  for (std::size_t i = 0; i < c.size(); ++i) {
    if (f[i] != 0 && !inD[i]) throw ParameterError("hardy_form: f is nonzero outside D");
    if (g[i] != 0 && !inR[i]) throw ParameterError("hardy_form: g is nonzero outside R");
  }
  KahanSum mD, mR;
  for (std::size_t i : s.D) mD.add(c.weights[i]);
  for (std::size_t i : s.R) mR.add(c.weights[i]);
  if (mD.value() <= 0 || mR.value() <= 0) {
    if (warning) *warning = "hardy_form: D or R has zero mass";
    return 0.0;
  }
  std::vector<std::size_t> ys;
  std::vector<double> fy;
  for (std::size_t i : s.D)
    if (f[i] != 0) {
      ys.push_back(i);
      fy.push_back(std::abs(f[i]) * c.weights[i]);
    }
  KernelRows kr(c, kind);
  std::vector<double> part(s.R.size(), 0.0);
  parallel_for(s.R.size(), threads, [&](std::size_t r) {
    std::size_t x = s.R[r];
    if (g[x] == 0 || ys.empty()) return;
    std::vector<double> k(ys.size());
    kr.row(x, ys, k);
    KahanSum acc;
    for (std::size_t j = 0; j < ys.size(); ++j) acc.add(fy[j] * k[j]);
    part[r] = acc.value() * std::abs(g[x]) * c.weights[x];
  });
  return ksum(part);
}

struct HardyOptions {
  KernelKind kernel = KernelKind::lambda;
  double rel_tol = 1e-6;
  std::size_t max_iter = 5000;
  int max_restarts = 5;
  std::size_t dense_cap = 40'000'000;  // matrix entries
  std::uint64_t seed = 1;
  unsigned threads = 1;
};

struct HardyEstimate {
  double nu = 2.0;
  double value = 0.0;           // all pairs
  double value_excluded = 0.0;  // near-diagonal pairs removed
  std::string method;           // "singular-value", "alternating-ascent", "adversarial-pair"
  bool lower_bound = false;
  std::size_t iterations = 0;
  int restarts = 0;
  std::vector<double> log;  // estimate per iteration (all pairs)
  std::size_t d_size = 0, r_size = 0;
  std::size_t excluded = 0;  // near-diagonal pairs
  bool dense = true;
  double truncation = 0.0;  // t_min or N when the caller refines a sequence
};

namespace detail {

// Measure-normalized kernel M[x, y] = sqrt(w_x) K[x, y] sqrt(w_y), either stored or rebuilt per product.
class HardyOperator {
 public:
  HardyOperator(const WeightedCloud& c, const HardySets& s, const HardyOptions& o)
      : c_(c), s_(s), o_(o), rows_(c, o.kernel) {
    sw_D_.resize(s.D.size());
    sw_R_.resize(s.R.size());
    for (std::size_t j = 0; j < s.D.size(); ++j) sw_D_[j] = std::sqrt(c.weights[s.D[j]]);
    for (std::size_t i = 0; i < s.R.size(); ++i) sw_R_[i] = std::sqrt(c.weights[s.R[i]]);
    dense_ = double(s.D.size()) * double(s.R.size()) <= double(o.dense_cap);
    near_.assign(s.R.size(), {});
    parallel_for(s.R.size(), o.threads, [&](std::size_t i) {
      for (std::size_t j = 0; j < s.D.size(); ++j)
        if (near_diagonal(c, s.R[i], s.D[j])) near_[i].push_back(j);
    });
    for (const auto& v : near_) excluded_ += v.size();
    if (dense_) {
      m_.resize(s.R.size() * s.D.size());
      parallel_for(s.R.size(), o.threads, [&](std::size_t i) { fill_row(i, std::span(m_).subspan(i * s_.D.size(), s_.D.size())); });
    }
  }

  std::size_t rows() const { return s_.R.size(); }
  std::size_t cols() const { return s_.D.size(); }
  bool dense() const { return dense_; }
  std::size_t excluded() const { return excluded_; }

  // y = M v (length rows), optionally with near-diagonal entries zeroed
  void apply(std::span<const double> v, std::span<double> y, bool exclude) const {
    parallel_for(rows(), o_.threads, [&](std::size_t i) {
      std::vector<double> tmp;
      std::span<const double> r;
      if (dense_) {
        r = std::span<const double>(m_).subspan(i * cols(), cols());
      } else {
        tmp.resize(cols());
        fill_row(i, tmp);
        r = tmp;
      }
      KahanSum acc;
      for (std::size_t j = 0; j < cols(); ++j) acc.add(r[j] * v[j]);
      double s = acc.value();
      if (exclude)
        for (std::size_t j : near_[i]) s -= r[j] * v[j];
      y[i] = s;
    });
  }
  // x = M^T u (length cols)
  void apply_t(std::span<const double> u, std::span<double> x, bool exclude) const {
    std::fill(x.begin(), x.end(), 0.0);
    if (dense_) {
      // column sums in fixed row order keep the result deterministic
      parallel_for(cols(), o_.threads, [&](std::size_t j) {
        KahanSum acc;
        for (std::size_t i = 0; i < rows(); ++i) acc.add(m_[i * cols() + j] * u[i]);
        x[j] = acc.value();
      });
      if (exclude)
        for (std::size_t i = 0; i < rows(); ++i)
          for (std::size_t j : near_[i]) x[j] -= m_[i * cols() + j] * u[i];
      return;
    }
    std::vector<std::vector<double>> part(rows());
    parallel_for(rows(), o_.threads, [&](std::size_t i) {
      part[i].resize(cols());
      fill_row(i, part[i]);
      for (double& e : part[i]) e *= u[i];
      if (exclude)
        for (std::size_t j : near_[i]) part[i][j] = 0.0;
    });
    for (std::size_t i = 0; i < rows(); ++i)
      for (std::size_t j = 0; j < cols(); ++j) x[j] += part[i][j];
  }

  // raw kernel row K[x_i, .] (no weights)
  void kernel_row(std::size_t i, std::span<double> out) const { rows_.row(s_.R[i], s_.D, out); }
  const std::vector<std::size_t>& near(std::size_t i) const { return near_[i]; }

 private:
  void fill_row(std::size_t i, std::span<double> out) const {
    rows_.row(s_.R[i], s_.D, out);
    for (std::size_t j = 0; j < out.size(); ++j) out[j] *= sw_R_[i] * sw_D_[j];
  }

  const WeightedCloud& c_;
  const HardySets& s_;
  HardyOptions o_;
  KernelRows rows_;
  std::vector<double> sw_D_, sw_R_;
  bool dense_ = true;
  std::vector<double> m_;
  std::vector<std::vector<std::size_t>> near_;
  std::size_t excluded_ = 0;
};

inline double norm2(std::span<const double> v) {
  KahanSum s;
  for (double x : v) s.add(x * x);
  return std::sqrt(s.value());
}

struct PowerResult {
  double sigma = 0.0;
  std::size_t iterations = 0;
  int restarts = 0;
  std::vector<double> log;
};

// Largest singular value by power iteration on M^T M. The Rayleigh estimate of a positive
// semidefinite operator is nondecreasing; a drop beyond rounding or a stall is treated as stagnation.
template <class Apply, class ApplyT>
PowerResult power_sigma(std::size_t rows, std::size_t cols, std::span<const double> start, Apply&& apply,
                        ApplyT&& apply_t, double rel_tol, std::size_t max_iter, int max_restarts, std::uint64_t seed) {
  PowerResult res;
  std::mt19937_64 g(seed);
  std::vector<double> v(start.begin(), start.end()), u(rows), w(cols);
  for (int attempt = 0; attempt <= max_restarts; ++attempt) {
    if (attempt > 0) {
      for (double& e : v) e = 0.5 + double(g() >> 11) * 0x1.0p-53;
      res.restarts = attempt;
    }
    double nv = norm2(v);
    if (nv == 0) return res;
    for (double& e : v) e /= nv;
    double prev = 0.0;
    int drops = 0;
    for (std::size_t it = 1; it <= max_iter; ++it) {
      apply(v, std::span<double>(u));
      double s = norm2(u);  // ||M v|| with ||v|| = 1
      res.log.push_back(s);
      ++res.iterations;
      if (s == 0) return res;
      if (s < prev * (1 - 1e-12)) ++drops;
      if (drops > 3) break;
      if (it > 1 && std::abs(s - prev) <= rel_tol * s) {
        res.sigma = s;
        return res;
      }
      prev = s;
      apply_t(u, std::span<double>(w));
      double nw = norm2(w);
      if (nw == 0) return res;
      for (std::size_t j = 0; j < cols; ++j) v[j] = w[j] / nw;
    }
  }
  throw ConvergenceError("hardy_norm: power iteration did not converge after restarts");
}

}  // namespace detail

// Alternating maximization of the normalized form over unit f in L^nu(D) and unit g in L^nu'(R).
// Returns a lower bound of the best constant (exact in the limit only for nu = 2).
inline HardyEstimate alternating_ascent(const WeightedCloud& c, const HardySets& s, double nu, const detail::HardyOperator& op,
                                        const HardyOptions& o, bool exclude) {
  if (!(nu > 1) || !std::isfinite(nu)) throw ParameterError("hardy: nu must lie in (1, inf)");
  const double nup = nu / (nu - 1);
  HardyEstimate e;
  e.nu = nu;
  e.method = "alternating-ascent";
  e.lower_bound = true;
  const std::size_t nd = s.D.size(), nr = s.R.size();
  std::vector<double> wD(nd), wR(nr), sD(nd), sR(nr);
  for (std::size_t j = 0; j < nd; ++j) {
    wD[j] = c.weights[s.D[j]];
    sD[j] = std::sqrt(wD[j]);
  }
  for (std::size_t i = 0; i < nr; ++i) {
    wR[i] = c.weights[s.R[i]];
    sR[i] = std::sqrt(wR[i]);
  }
  auto lp = [](std::span<const double> v, std::span<const double> w, double p) {
    KahanSum acc;
    for (std::size_t k = 0; k < v.size(); ++k) acc.add(w[k] * std::pow(std::abs(v[k]), p));
    return std::pow(acc.value(), 1.0 / p);
  };
  // f = 1 normalized in L^nu(D)
  std::vector<double> f(nd, 1.0), g(nr), hD(nd), hR(nr), tmp(nd), tmpR(nr);
  double nf = lp(f, wD, nu);
  for (double& x : f) x /= nf;
  double prev = 0.0;
  for (std::size_t it = 1; it <= o.max_iter; ++it) {
    // hR[x] = sum_y K[x,y] w_y f_y = (M (sD f))_x / sR_x
    for (std::size_t j = 0; j < nd; ++j) tmp[j] = sD[j] * f[j];
    op.apply(tmp, hR, exclude);
    for (std::size_t i = 0; i < nr; ++i) hR[i] /= sR[i];
    // best g: g ~ hR^(nu-1), value ||hR||_{nu}
    double val_g = lp(hR, wR, nu);
    if (val_g == 0) break;
    for (std::size_t i = 0; i < nr; ++i) g[i] = std::pow(hR[i] / val_g, nu - 1);
    // hD[y] = sum_x K[x,y] w_x g_x
    for (std::size_t i = 0; i < nr; ++i) tmpR[i] = sR[i] * g[i];
    op.apply_t(tmpR, hD, exclude);
    for (std::size_t j = 0; j < nd; ++j) hD[j] /= sD[j];
    double val = lp(hD, wD, nup);
    for (std::size_t j = 0; j < nd; ++j) f[j] = std::pow(hD[j] / val, nup - 1);
    e.log.push_back(val);
    e.iterations = it;
    if (std::abs(val - prev) <= o.rel_tol * val) {
      prev = val;
      break;
    }
    prev = val;
  }
  e.value = prev;
  return e;
}

// Best constant of the Hardy inequality on (D, R). nu = 2: largest singular value of
// W_R^{1/2} K W_D^{1/2}; otherwise alternating ascent (a lower bound). Both variants are
// reported: with all pairs and with near-diagonal pairs removed.
inline HardyEstimate hardy_norm(const WeightedCloud& c, const HardySets& s, double nu, const HardyOptions& o = {}) {
  if (!(nu > 1) || !std::isfinite(nu)) throw ParameterError("hardy: nu must lie in (1, inf)");
  if (s.D.empty() || s.R.empty()) throw ParameterError("hardy: D and R must be nonempty");
  detail::HardyOperator op(c, s, o);
  HardyEstimate e;
  if (nu == 2.0) {
    std::vector<double> start(s.D.size());
    for (std::size_t j = 0; j < s.D.size(); ++j) start[j] = std::sqrt(c.weights[s.D[j]]);
    auto run = [&](bool ex) {
      return detail::power_sigma(
          op.rows(), op.cols(), start, [&](std::span<const double> v, std::span<double> y) { op.apply(v, y, ex); },
          [&](std::span<const double> u, std::span<double> x) { op.apply_t(u, x, ex); }, o.rel_tol, o.max_iter,
          o.max_restarts, o.seed);
    };
    auto all = run(false);
    auto ex = op.excluded() > 0 ? run(true) : all;
    e.nu = 2.0;
    e.method = "singular-value";
    e.value = all.sigma;
    e.value_excluded = ex.sigma;
    e.iterations = all.iterations;
    e.restarts = all.restarts;
    e.log = all.log;
  } else {
    e = alternating_ascent(c, s, nu, op, o, false);
    e.value_excluded = op.excluded() > 0 ? alternating_ascent(c, s, nu, op, o, true).value : e.value;
  }
  e.d_size = s.D.size();
  e.r_size = s.R.size();
  e.excluded = op.excluded();
  e.dense = op.dense();
  return e;
}

inline HardyEstimate hardy_norm(const WeightedCloud& c, const BallSpec& b, double nu, const HardyOptions& o = {},
                                double factor = 2.0) {
  return hardy_norm(c, hardy_sets(c, b, factor), nu, o);
}

// ---------------------------------------------------------------------------
// Adversarial block-constant pairs on the arcs between consecutive oscillation zeros

struct AdversarialPair {
  std::vector<double> f, g;            // full-cloud vectors
  std::vector<double> f_coef, g_coef;  // block coefficients, index k - first
  long first = 3, last = 3;
  double nu = 2.0, eta = 0.25;
  double norm_f = 0.0, norm_g = 0.0;  // l^nu and l^nu' norms of the coefficients
};

// Arc number l of parameter t: t lies between the zeros t_{l+1} < t < t_l.
inline long arc_index(Oscillation kind, double t) {
  constexpr double pi = std::numbers::pi;
  double k = kind == Oscillation::Exp ? std::exp(1.0 / t - 1.0 / pi) : pi / t;
  return long(std::floor(k));
}

// Blocks k in [first, last]: f_k = k^{-1/nu} (ln k)^{-1/nu - eta} on the k-th arc pair inside B,
// g_p = p^{-1/nu'} (ln p)^{-1/nu' - eta} outside; arc l belongs to block floor(l / 2).
// Values are spread over each arc so that the discrete L^nu norm of the arc equals the coefficient.
inline AdversarialPair adversarial_pair(const WeightedCloud& c, const HardySets& s, Oscillation kind, long last,
                                        double nu = 2.0, double eta = 0.25, long first = 3) {
  if (!c.has_params()) throw ParameterError("adversarial_pair: cloud carries no curve parameters");
  if (first < 3 || last < first) throw ParameterError("adversarial_pair: need 3 <= first <= N");
  if (!(nu > 1) || !std::isfinite(nu)) throw ParameterError("adversarial_pair: nu must lie in (1, inf)");
  if (!(eta > 0 && eta < 0.5)) throw ParameterError("adversarial_pair: eta must lie in (0, 1/2)");
  const double nup = nu / (nu - 1);
  const double pi = std::numbers::pi;
  AdversarialPair a;
  a.first = first;
  a.last = last;
  a.nu = nu;
  a.eta = eta;
  a.f.assign(c.size(), 0.0);
  a.g.assign(c.size(), 0.0);
  const std::size_t nb = std::size_t(last - first + 1);
  std::vector<double> massD(nb, 0.0), massR(nb, 0.0);
  std::vector<long> blk(c.size(), -1);
  auto block_of = [&](std::size_t i) -> long {
    double t = c.params[i].t;
    if (!(t > 0 && t < pi)) return -1;
    return arc_index(kind, t) / 2;
  };
  long max_block = -1;
  for (std::size_t i : s.D) {
    long k = block_of(i);
    max_block = std::max(max_block, k);
    if (k >= first && k <= last) {
      blk[i] = k;
      massD[std::size_t(k - first)] += c.weights[i];
    }
  }
  for (std::size_t i : s.R) {
    long k = block_of(i);
    max_block = std::max(max_block, k);
    if (k >= first && k <= last) {
      blk[i] = k;
      massR[std::size_t(k - first)] += c.weights[i];
    }
  }
  if (last > max_block) throw ParameterError("adversarial_pair: N exceeds the sampled block count");
  a.f_coef.resize(nb);
  a.g_coef.resize(nb);
  KahanSum nf, ng;
  for (std::size_t b = 0; b < nb; ++b) {
    double k = double(first) + double(b), lk = std::log(k);
    a.f_coef[b] = massD[b] > 0 ? std::pow(k, -1 / nu) * std::pow(lk, -1 / nu - eta) : 0.0;
    a.g_coef[b] = massR[b] > 0 ? std::pow(k, -1 / nup) * std::pow(lk, -1 / nup - eta) : 0.0;
    nf.add(std::pow(a.f_coef[b], nu));
    ng.add(std::pow(a.g_coef[b], nup));
  }
  a.norm_f = std::pow(nf.value(), 1 / nu);
  a.norm_g = std::pow(ng.value(), 1 / nup);
  for (std::size_t i : s.D)
    if (blk[i] >= 0) {
      auto b = std::size_t(blk[i] - first);
      a.f[i] = a.f_coef[b] / std::pow(massD[b], 1 / nu);
    }
  for (std::size_t i : s.R)
    if (blk[i] >= 0) {
      auto b = std::size_t(blk[i] - first);
      a.g[i] = a.g_coef[b] / std::pow(massR[b], 1 / nup);
    }
  return a;
}

// Discrete L^p norm sum_i w_i |v_i|^p over the cloud.
inline double lp_norm(const WeightedCloud& c, std::span<const double> v, double p) {
  KahanSum s;
  for (std::size_t i = 0; i < c.size(); ++i)
    if (v[i] != 0) s.add(c.weights[i] * std::pow(std::abs(v[i]), p));
  return std::pow(s.value(), 1 / p);
}

// ---------------------------------------------------------------------------
// Hilbert-type matrix A[k, p] = 1/|p - k| on indices 1..N

enum class HilbertExclusion {
  symmetric,  // |p - k| <= 1 removed
  one_sided   // p in {k, k - 1} removed
};

inline double hilbert_entry(long k, long p, HilbertExclusion ex) {
  if (ex == HilbertExclusion::symmetric ? std::abs(p - k) <= 1 : (p == k || p == k - 1)) return 0.0;
  return 1.0 / double(std::abs(p - k));
}

inline double hilbert_like_norm(long N, HilbertExclusion ex = HilbertExclusion::symmetric, double rel_tol = 1e-12) {
  if (N < 2 || N > 2048) throw ParameterError("hilbert_like_norm: N must lie in [2, 2048]");
  const auto n = std::size_t(N);
  std::vector<double> a(n * n);
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t p = 0; p < n; ++p) a[k * n + p] = hilbert_entry(long(k) + 1, long(p) + 1, ex);
  std::vector<double> start(n, 1.0);
  auto res = detail::power_sigma(
      n, n, start,
      [&](std::span<const double> v, std::span<double> y) {
        for (std::size_t k = 0; k < n; ++k) {
          double s = 0;
          for (std::size_t p = 0; p < n; ++p) s += a[k * n + p] * v[p];
          y[k] = s;
        }
      },
      [&](std::span<const double> u, std::span<double> x) {
        std::fill(x.begin(), x.end(), 0.0);
        for (std::size_t k = 0; k < n; ++k)
          for (std::size_t p = 0; p < n; ++p) x[p] += a[k * n + p] * u[k];
      },
      rel_tol, 200000, 5, 1);
  return res.sigma;
}

// ---------------------------------------------------------------------------
// Dyadic Hardy check: D = Q, R = hat(Q) \ Q for every cube of one generation

struct DyadicHardyResult {
  int j = 0;
  double max_value = 0.0;
  std::size_t argmax = npos;
  std::vector<double> values;  // per cube, NaN when skipped
  std::size_t skipped = 0;
};

inline DyadicHardyResult dyadic_hardy_check(const WeightedCloud& c, const DyadicTree& t, int j, HardyOptions o = {}) {
  const auto& gen = t.gen(j);
  DyadicHardyResult r;
  r.j = j;
  if (gen.cubes.size() < 2) return r;
  r.values.assign(gen.cubes.size(), std::numeric_limits<double>::quiet_NaN());
  unsigned threads = o.threads;
  o.threads = 1;
  std::vector<char> skip(gen.cubes.size(), 0);
  parallel_for(gen.cubes.size(), threads, [&](std::size_t k) {
    HardySets s;
    s.D = gen.cubes[k].members;
    auto h = hat(t, c, j, k);
    std::set_difference(h.begin(), h.end(), s.D.begin(), s.D.end(), std::back_inserter(s.R));
    if (s.R.empty() || s.D.empty()) {
      skip[k] = 1;
      return;
    }
    r.values[k] = hardy_norm(c, s, 2.0, o).value;
  });
  for (std::size_t k = 0; k < gen.cubes.size(); ++k) {
    r.skipped += skip[k];
    if (!skip[k] && r.values[k] > r.max_value) {
      r.max_value = r.values[k];
      r.argmax = k;
    }
  }
  return r;
}

}  // namespace homtype
