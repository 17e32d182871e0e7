#pragma once

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "homtype/dyadic.hpp"
#include "homtype/hardy.hpp"
#include "homtype/properties.hpp"
#include "homtype/spaces.hpp"

namespace homtype {

inline constexpr const char* kToolName = "homtype";
inline constexpr const char* kVersion = "0.1.0";

using json = nlohmann::json;

// Shortest decimal form that reads back to the same double.
inline std::string num(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  for (int prec = 1; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, v);
    if (std::strtod(buf, nullptr) == v) break;
  }
  return buf;
}

// Non-finite numbers become strings so that the JSON stays valid and lossless.
inline json jnum(double v) {
  if (std::isfinite(v)) return v;
  return num(v);
}

inline double from_jnum(const json& j) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) return std::strtod(j.get<std::string>().c_str(), nullptr);
  throw ParameterError("expected a number");
}

// ---------------------------------------------------------------------------
// Specs and configs

inline const char* to_string(CurveKind k) {
  switch (k) {
    case CurveKind::Line: return "line";
    case CurveKind::GappedLine: return "gapped-line";
    case CurveKind::Triangle: return "triangle";
    case CurveKind::Tessera: return "tessera";
    case CurveKind::TesseraTruncated: return "tessera-truncated";
    case CurveKind::PerturbedCircle: return "perturbed-circle";
  }
  return "?";
}

inline json point_json(const Point& p) { return json::array({jnum(p.x), jnum(p.y)}); }
inline json ball_json(const BallSpec& b) { return {{"center", point_json(b.center)}, {"radius", jnum(b.radius)}}; }

inline json to_json(const CurveSpec& s) {
  json params;
  switch (s.kind) {
    case CurveKind::Line: params = {{"lo", s.lo}, {"hi", s.hi}}; break;
    case CurveKind::GappedLine: params = {{"lo", s.lo}, {"hi", s.hi}, {"eps0", s.eps0}}; break;
    case CurveKind::Triangle:
      params = {{"vertices", json::array({point_json(s.vertices[0]), point_json(s.vertices[1]), point_json(s.vertices[2])})}};
      break;
    case CurveKind::Tessera: params = {{"k_max", s.k_max}}; break;
    case CurveKind::TesseraTruncated: params = {{"tail_length", s.tail_length}}; break;
    case CurveKind::PerturbedCircle:
      params = {{"oscillation", s.osc == Oscillation::Exp ? "exp" : "poly"}, {"A0", s.A0}, {"tail_length", s.tail_length}};
      break;
  }
  return {{"kind", to_string(s.kind)}, {"params", params}};
}

inline json to_json(const SamplerCfg& c) {
  return {{"h", c.h},         {"h_straight", c.h_straight}, {"dphi_max", c.dphi_max},
          {"t_min", c.t_min}, {"h_min", c.h_min},           {"point_cap", c.point_cap}};
}

inline json to_json(const SpaceDef& s) {
  json j = {{"id", s.id}, {"description", s.description}};
  if (s.is_curve) {
    j.update(to_json(s.spec));
    j["sampler"] = to_json(s.sampler);
  } else {
    j["kind"] = "grid";
    j["params"] = {{"m", s.grid_m}, {"side", 1.0}};
  }
  return j;
}

inline json to_json(const Thresholds& t) {
  return {{"hold_eta", t.hold_eta},         {"hold_r2", t.hold_r2},       {"fail_eta", t.fail_eta},
          {"trend_factor", t.trend_factor}, {"hold_decades", t.hold_decades}, {"trend_decades", t.trend_decades},
          {"m_hold", t.m_hold},             {"hb_hold", t.hb_hold},       {"witness_floor", t.witness_floor},
          {"flat_decades", t.flat_decades}};
}

// Thread count is left out: results do not depend on it.
inline json to_json(const ScanCfg& c) {
  json th = json::array();
  for (double v : c.theta) th.push_back(v);
  return {{"seed", c.seed},
          {"balls", c.balls},
          {"r_min_spacings", c.r_min_spacings},
          {"r_max_fraction", c.r_max_fraction},
          {"theta", th},
          {"theta_per_decade", c.theta_per_decade},
          {"theta_floor", c.theta_floor},
          {"theta_max", c.theta_max},
          {"resolution", c.resolution},
          {"feature_balls", c.feature_balls},
          {"window_balls", c.window_balls},
          {"window_centers", c.window_centers},
          {"hb_balls", c.hb_balls},
          {"hb_centers", c.hb_centers},
          {"cap_pairs", c.cap_pairs},
          {"u_count", c.u_count},
          {"pair_count", c.pair_count},
          {"minima_sources", c.minima_sources},
          {"minima_per_source", c.minima_per_source},
          {"thresholds", to_json(c.thresholds)}};
}

inline std::string config_hash(const json& config) { return hex64(fnv1a(config.dump())); }

// Every output document: {tool, version, config_hash, config, space, result}.
inline json envelope(const json& config, const json& space, json result) {
  return {{"tool", kToolName},
          {"version", kVersion},
          {"config_hash", config_hash(config)},
          {"config", config},
          {"space", space},
          {"result", std::move(result)}};
}

// ---------------------------------------------------------------------------
// Results

inline json to_json(const PropertyVerdict& v, const std::string& space, const std::string& hash) {
  return {{"space", space},
          {"property", to_string(v.property)},
          {"verdict", to_string(v.verdict)},
          {"exponent", jnum(v.exponent)},
          {"constant", jnum(v.constant)},
          {"r2", jnum(v.r2)},
          {"trend", jnum(v.trend)},
          {"worst_exponent", jnum(v.worst_exponent)},
          {"empirical", v.empirical},
          {"witness", v.witness.empty() ? json(nullptr) : json(v.witness)},
          {"note", v.note},
          {"config_hash", hash}};
}

inline json fit_summary(const DecayFit& f) {
  return {{"scan", f.scan},           {"eta", jnum(f.eta)},         {"C", jnum(f.C)},
          {"r2", jnum(f.r2)},         {"decades", jnum(f.decades())}, {"points", f.ratio.size()},
          {"sources", f.sources},     {"skipped", f.skipped},       {"unresolved", f.unresolved}};
}

inline json to_json(const DiagramReport& r, const std::string& hash) {
  json rows = json::array();
  for (const auto& v : r.rows) rows.push_back(to_json(v, r.space, hash));
  return {{"space", r.space},
          {"rows", rows},
          {"flags", r.flags},
          {"fits", {{"LD", fit_summary(r.ld)}, {"RLD", fit_summary(r.rld)}, {"AD", fit_summary(r.ad)}, {"RAD", fit_summary(r.rad)}}},
          {"M", {{"constant", jnum(r.m.constant)}, {"trend", jnum(r.m.trend())}, {"pairs", r.m.pairs}}},
          {"HB", {{"constant", jnum(r.hb.constant)}, {"trend", jnum(r.hb.trend)}, {"balls", r.hb.balls}}},
          {"ahlfors_ratio", {{"inf", jnum(r.adr.inf)}, {"sup", jnum(r.adr.sup)}}}};
}

inline json to_json(const HardyEstimate& e, const std::string& space, const BallSpec& ball) {
  return {{"space", space},
          {"ball", ball_json(ball)},
          {"nu", e.nu},
          {"value", jnum(e.value)},
          {"value_excluded", jnum(e.value_excluded)},
          {"method", e.method},
          {"lower_bound", e.lower_bound},
          {"truncation", jnum(e.truncation)},
          {"iterations", e.iterations},
          {"restarts", e.restarts},
          {"excluded_near_diagonal", e.excluded},
          {"d_size", e.d_size},
          {"r_size", e.r_size}};
}

inline json to_json(const AxiomReport& a) {
  return {{"partition", a.partition}, {"nesting", a.nesting}, {"diameter", a.diameter},
          {"inner_ball", a.inner_ball}, {"exact_ok", a.exact_ok()}, {"C1", jnum(a.C1)},
          {"a0", jnum(a.a0)},         {"eta_hat", jnum(a.eta_hat)}, {"C2", jnum(a.C2)},
          {"r2", jnum(a.r2)},         {"fitted_generations", a.fitted_generations}, {"samples", a.samples},
          {"witness", a.witness.empty() ? json(nullptr) : json(a.witness)}};
}

// ---------------------------------------------------------------------------
// CSV

inline std::string csv_header(const std::string& hash, const std::string& space_spec) {
  return std::string("# ") + kToolName + " " + kVersion + " config_hash=" + hash + " space=" + space_spec + "\n";
}

// Columns: kind,source,ratio,measure,ball_x,ball_y,ball_r,window_x,window_y,window_r.
// kind is "envelope" for the fitted envelope and "sample" for raw per-source samples.
// The comment line carries the envelope fit and the worst single-ball slope.
inline std::string decay_csv(const DecayFit& f, const std::string& hash, const std::string& space_spec,
                             double worst_eta = std::numeric_limits<double>::quiet_NaN()) {
  std::ostringstream os;
  os << csv_header(hash, space_spec);
  os << "# scan=" << f.scan << " eta=" << num(f.eta) << " C=" << num(f.C) << " r2=" << num(f.r2)
     << " worst_ball_eta=" << num(worst_eta) << "\n";
  os << "kind,source,ratio,measure,ball_x,ball_y,ball_r,window_x,window_y,window_r\n";
  for (std::size_t k = 0; k < f.ratio.size(); ++k) {
    const auto& b = k < f.witness_ball.size() ? f.witness_ball[k] : BallSpec{{}, 0.0};
    const auto& w = k < f.witness_window.size() ? f.witness_window[k] : BallSpec{{}, 0.0};
    os << "envelope,," << num(f.ratio[k]) << "," << num(f.measure[k]) << "," << num(b.center.x) << "," << num(b.center.y)
       << "," << num(b.radius) << "," << num(w.center.x) << "," << num(w.center.y) << "," << num(w.radius) << "\n";
  }
  for (const auto& s : f.raw)
    os << "sample," << s.source << "," << num(s.ratio) << "," << num(s.measure) << "," << num(s.ball.center.x) << ","
       << num(s.ball.center.y) << "," << num(s.ball.radius) << "," << num(s.window.center.x) << "," << num(s.window.center.y)
       << "," << num(s.window.radius) << "\n";
  return os.str();
}

// Columns: u,C (monotone-geodesic constant per u).
inline std::string monotone_csv(const MonotoneResult& m, const std::string& hash, const std::string& space_spec) {
  std::ostringstream os;
  os << csv_header(hash, space_spec) << "u,C\n";
  for (std::size_t k = 0; k < m.u.size(); ++k) os << num(m.u[k]) << "," << num(m.C[k]) << "\n";
  return os.str();
}

// Columns: N,norm,norm_excluded,d_size,r_size (N is the truncation: t_min or grid step).
struct GrowthRow {
  double N = 0.0;
  double norm = 0.0, norm_excluded = 0.0;
  std::size_t d_size = 0, r_size = 0;
};

inline std::string growth_csv(std::span<const GrowthRow> rows, const std::string& hash, const std::string& space_spec) {
  std::ostringstream os;
  os << csv_header(hash, space_spec) << "N,norm,norm_excluded,d_size,r_size\n";
  for (const auto& r : rows)
    os << num(r.N) << "," << num(r.norm) << "," << num(r.norm_excluded) << "," << r.d_size << "," << r.r_size << "\n";
  return os.str();
}

// ---------------------------------------------------------------------------
// Cloud serialization

// Columnar CSV: header names the columns, x[,y],weight[,t,speed]; '#' starts a comment line.
inline std::string cloud_csv(const WeightedCloud& c) {
  std::ostringstream os;
  os << "# label=" << c.label << " spacing=" << num(c.spacing) << " aliased=" << (c.aliased ? 1 : 0) << "\n";
  os << (c.dim == 1 ? "x" : "x,y") << ",weight" << (c.has_params() ? ",t,speed" : "") << "\n";
  for (std::size_t i = 0; i < c.size(); ++i) {
    os << num(c.points[i].x);
    if (c.dim == 2) os << "," << num(c.points[i].y);
    os << "," << num(c.weights[i]);
    if (c.has_params()) os << "," << num(c.params[i].t) << "," << num(c.params[i].speed);
    os << "\n";
  }
  return os.str();
}

namespace detail {

inline std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream is(line);
  while (std::getline(is, cur, sep)) {
    while (!cur.empty() && (cur.back() == '\r' || cur.back() == ' ')) cur.pop_back();
    while (!cur.empty() && cur.front() == ' ') cur.erase(cur.begin());
    out.push_back(cur);
  }
  return out;
}

inline double parse_double(const std::string& s, std::size_t line) {
  char* end = nullptr;
  double v = std::strtod(s.c_str(), &end);
  if (s.empty() || *end != '\0') throw ParameterError("cloud csv line " + std::to_string(line) + ": bad number '" + s + "'");
  return v;
}

}  // namespace detail

inline WeightedCloud parse_cloud_csv(std::istream& in, std::string label = "cloud") {
  WeightedCloud c;
  c.label = std::move(label);
  std::string line;
  std::vector<std::string> cols;
  std::size_t lineno = 0;
  bool has_spacing = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    if (line[0] == '#') {
      for (const auto& tok : detail::split(line.substr(1), ' ')) {
        auto eq = tok.find('=');
        if (eq == std::string::npos) continue;
        std::string k = tok.substr(0, eq), v = tok.substr(eq + 1);
        if (k == "label") c.label = v;
        if (k == "spacing") {
          c.spacing = std::strtod(v.c_str(), nullptr);
          has_spacing = true;
        }
        if (k == "aliased") c.aliased = v == "1";
      }
      continue;
    }
    auto f = detail::split(line, ',');
    if (cols.empty()) {
      cols = f;
      bool ok = (cols == std::vector<std::string>{"x", "weight"} || cols == std::vector<std::string>{"x", "y", "weight"} ||
                 cols == std::vector<std::string>{"x", "weight", "t", "speed"} ||
                 cols == std::vector<std::string>{"x", "y", "weight", "t", "speed"});
      if (!ok) throw ParameterError("cloud csv: header must be x[,y],weight[,t,speed]");
      c.dim = cols[1] == "y" ? 2 : 1;
      continue;
    }
    if (f.size() != cols.size()) throw ParameterError("cloud csv line " + std::to_string(lineno) + ": wrong column count");
    std::size_t q = 0;
    Point p;
    p.x = detail::parse_double(f[q++], lineno);
    if (c.dim == 2) p.y = detail::parse_double(f[q++], lineno);
    c.points.push_back(p);
    c.weights.push_back(detail::parse_double(f[q++], lineno));
    if (q < f.size()) c.params.push_back({detail::parse_double(f[q], lineno), detail::parse_double(f[q + 1], lineno)});
  }
  if (cols.empty()) throw ParameterError("cloud csv: missing header");
  normalize(c);
  if (!has_spacing) {
    // nominal spacing: largest nearest-neighbour distance
    PointIndex idx(c.points);
    for (std::size_t i = 0; i < c.size() && c.size() > 1; ++i) {
      auto nb = idx.knn(c.points[i], 2);
      for (std::size_t j : nb)
        if (j != i) c.spacing = std::max(c.spacing, dist(c.points[i], c.points[j]));
    }
  }
  return c;
}

inline WeightedCloud read_cloud_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParameterError("cannot open cloud file: " + path.string());
  return parse_cloud_csv(in, path.stem().string());
}

inline json cloud_json(const WeightedCloud& c) {
  json x = json::array(), y = json::array(), w = json::array(), t = json::array(), sp = json::array();
  for (std::size_t i = 0; i < c.size(); ++i) {
    x.push_back(c.points[i].x);
    if (c.dim == 2) y.push_back(c.points[i].y);
    w.push_back(c.weights[i]);
    if (c.has_params()) {
      t.push_back(c.params[i].t);
      sp.push_back(c.params[i].speed);
    }
  }
  json j = {{"dim", c.dim}, {"label", c.label}, {"spacing", c.spacing}, {"aliased", c.aliased}, {"x", x}, {"weight", w}};
  if (c.dim == 2) j["y"] = y;
  if (c.has_params()) {
    j["t"] = t;
    j["speed"] = sp;
  }
  return j;
}

inline WeightedCloud cloud_from_json(const json& j) {
  WeightedCloud c;
  c.dim = j.at("dim").get<int>();
  c.label = j.value("label", std::string("cloud"));
  c.spacing = j.value("spacing", 0.0);
  c.aliased = j.value("aliased", false);
  const auto& x = j.at("x");
  const auto& w = j.at("weight");
  if (x.size() != w.size()) throw ParameterError("cloud json: x and weight differ in length");
  for (std::size_t i = 0; i < x.size(); ++i) {
    c.points.push_back({x[i].get<double>(), c.dim == 2 ? j.at("y").at(i).get<double>() : 0.0});
    c.weights.push_back(w[i].get<double>());
    if (j.contains("t")) c.params.push_back({j["t"].at(i).get<double>(), j.at("speed").at(i).get<double>()});
  }
  normalize(c);
  return c;
}

// ---------------------------------------------------------------------------
// Discretization cache (HOMTYPE_CACHE)

namespace detail {

template <class T>
void put(std::ostream& os, const T& v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof v);
}
template <class T>
bool get(std::istream& is, T& v) {
  return bool(is.read(reinterpret_cast<char*>(&v), sizeof v));
}

inline constexpr std::uint64_t kCacheMagic = 0x31656863746d6f68ULL;  // "homtche1"

}  // namespace detail

inline std::string cache_key(const SpaceDef& s, const SamplerCfg& cfg) {
  json k = {{"version", kVersion}, {"space", to_json(s)}, {"sampler", to_json(cfg)}};
  return hex64(fnv1a(k.dump()));
}

inline void write_cloud_binary(const WeightedCloud& c, const std::filesystem::path& path) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary);
    if (!os) return;
    detail::put(os, detail::kCacheMagic);
    detail::put(os, std::int32_t(c.dim));
    detail::put(os, std::uint64_t(c.size()));
    detail::put(os, std::uint8_t(c.has_params()));
    detail::put(os, std::uint8_t(c.aliased));
    detail::put(os, c.spacing);
    detail::put(os, std::uint64_t(c.label.size()));
    os.write(c.label.data(), std::streamsize(c.label.size()));
    for (std::size_t i = 0; i < c.size(); ++i) {
      detail::put(os, c.points[i].x);
      detail::put(os, c.points[i].y);
      detail::put(os, c.weights[i]);
      if (c.has_params()) {
        detail::put(os, c.params[i].t);
        detail::put(os, c.params[i].speed);
      }
    }
    if (!os) return;
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
}

inline bool read_cloud_binary(const std::filesystem::path& path, WeightedCloud& c) {
  std::ifstream is(path, std::ios::binary);
  if (!is) return false;
  std::uint64_t magic = 0, n = 0, len = 0;
  std::int32_t dim = 0;
  std::uint8_t params = 0, aliased = 0;
  if (!detail::get(is, magic) || magic != detail::kCacheMagic) return false;
  if (!detail::get(is, dim) || !detail::get(is, n) || !detail::get(is, params) || !detail::get(is, aliased)) return false;
  WeightedCloud out;
  out.dim = dim;
  out.aliased = aliased != 0;
  if (!detail::get(is, out.spacing) || !detail::get(is, len) || len > 4096) return false;
  out.label.resize(len);
  if (!is.read(out.label.data(), std::streamsize(len))) return false;
  out.points.resize(n);
  out.weights.resize(n);
  if (params) out.params.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!detail::get(is, out.points[i].x) || !detail::get(is, out.points[i].y) || !detail::get(is, out.weights[i])) return false;
    if (params && (!detail::get(is, out.params[i].t) || !detail::get(is, out.params[i].speed))) return false;
  }
  c = std::move(out);
  return true;
}

// Builds the space cloud, reading and writing the cache directory named by HOMTYPE_CACHE when set.
inline WeightedCloud cached_space(const SpaceDef& s, const SamplerCfg& cfg) {
  const char* dir = std::getenv("HOMTYPE_CACHE");
  if (!dir || !*dir || !s.is_curve) return build_space(s, cfg);
  std::filesystem::path p = std::filesystem::path(dir) / (s.id + "-" + cache_key(s, cfg) + ".bin");
  WeightedCloud c;
  if (read_cloud_binary(p, c)) return c;
  c = build_space(s, cfg);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  write_cloud_binary(c, p);
  return c;
}

}  // namespace homtype
