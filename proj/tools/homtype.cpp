#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "homtype/io.hpp"

using namespace homtype;
namespace fs = std::filesystem;

namespace {

struct Options {
  std::string space;
  std::string cloud;
  std::uint64_t seed = 1;
  std::optional<double> eps_min, eps_max;
  std::optional<std::size_t> eps_count;
  double nu = 2.0;
  double delta = 0.5;
  int refine = 4;
  std::string out = "homtype-out";
  unsigned threads = 1;
  bool json = false;
  bool verify = false;
  std::string property;
};

std::string resolve_alias(const std::string& id) {
  if (id == "xt") return "tessera";
  if (id == "xt-truncated" || id == "xt'") return "tessera-truncated";
  return id;
}

// The space under study: a built-in (with its default sampler) or a cloud file.
struct Target {
  std::optional<SpaceDef> def;
  WeightedCloud cloud;
  Probes probes;
  json spec;
  std::string id;
};

WeightedCloud load_cloud_file(const std::string& path) {
  if (fs::path(path).extension() == ".json") {
    std::ifstream in(path);
    if (!in) throw ParameterError("cannot open cloud file: " + path);
    json j;
    try {
      j = json::parse(in);
    } catch (const json::exception& e) {
      throw ParameterError(std::string("cloud json: ") + e.what());
    }
    return cloud_from_json(j);
  }
  return read_cloud_csv(path);
}

Target resolve_target(const Options& o, bool build = true) {
  if (o.space.empty() == o.cloud.empty()) throw ParameterError("exactly one of --space and --cloud is required");
  Target t;
  if (!o.cloud.empty()) {
    t.cloud = load_cloud_file(o.cloud);
    t.id = t.cloud.label;
    json xs = cloud_json(t.cloud);
    t.spec = {{"id", t.id}, {"kind", "cloud"}, {"path", o.cloud}, {"points", t.cloud.size()}, {"content_hash", hex64(fnv1a(xs.dump()))}};
    return t;
  }
  t.def = find_space(resolve_alias(o.space));
  t.id = t.def->id;
  t.spec = to_json(*t.def);
  if (build) {
    t.cloud = cached_space(*t.def, t.def->sampler);
    t.probes = space_probes(*t.def);
  }
  return t;
}

ScanCfg scan_cfg(const Options& o) {
  ScanCfg cfg;
  cfg.seed = o.seed;
  cfg.threads = o.threads;
  if (o.eps_min || o.eps_max || o.eps_count) {
    double lo = o.eps_min.value_or(1e-4), hi = o.eps_max.value_or(0.3);
    std::size_t n = o.eps_count.value_or(12);
    if (!(lo > 0) || !(hi > lo) || !(hi < 1)) throw ParameterError("eps grid needs 0 < eps-min < eps-max < 1");
    if (n < 3) throw ParameterError("eps grid needs eps-count >= 3");
    cfg.theta = logspace(lo, hi, n);
  }
  return cfg;
}

void write_file(const fs::path& p, const std::string& text) {
  std::error_code ec;
  fs::create_directories(p.parent_path(), ec);
  std::ofstream os(p, std::ios::binary);
  if (!os) throw ParameterError("cannot write " + p.string());
  os << text;
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

int cmd_spaces(const Options& o) {
  json list = json::array();
  for (const auto& s : builtin_spaces()) list.push_back(to_json(s));
  if (o.json) {
    json cfg = {{"command", "spaces list"}};
    std::cout << dump(envelope(cfg, nullptr, list));
    return 0;
  }
  for (const auto& s : builtin_spaces()) std::cout << s.id << "\t" << s.description << "\n";
  std::cout << "aliases: xt -> tessera, xt-truncated -> tessera-truncated\n";
  return 0;
}

int cmd_scan(const Options& o) {
  Property p = parse_property(o.property);
  auto cfg = scan_cfg(o);
  auto t = resolve_target(o);
  json config = {{"command", "scan"}, {"property", to_string(p)}, {"space", t.spec}, {"scan", to_json(cfg)}};
  std::string hash = config_hash(config);
  auto res = scan_property(t.cloud, t.probes, cfg, p);
  json result = to_json(res.verdict, t.id, hash);
  std::string base = t.id + "-" + to_string(p);
  std::string spec_text = t.spec.dump();
  fs::path out(o.out);
  std::vector<std::string> files;
  if (p == Property::M) {
    write_file(out / (base + ".csv"), monotone_csv(res.m, hash, spec_text));
    files.push_back((out / (base + ".csv")).string());
  } else if (p != Property::HB) {
    result["fit"] = fit_summary(res.fit);
    write_file(out / (base + ".csv"), decay_csv(res.fit, hash, spec_text, res.verdict.worst_exponent));
    files.push_back((out / (base + ".csv")).string());
  }
  auto doc = envelope(config, t.spec, result);
  write_file(out / (base + ".json"), dump(doc));
  files.push_back((out / (base + ".json")).string());
  if (o.json) {
    std::cout << dump(doc);
  } else {
    const auto& v = res.verdict;
    std::cout << t.id << " " << to_string(p) << " " << to_string(v.verdict);
    if (std::isfinite(v.exponent)) std::cout << " eta=" << num(v.exponent);
    if (std::isfinite(v.worst_exponent)) std::cout << " worst_ball_eta=" << num(v.worst_exponent);
    if (std::isfinite(v.constant)) std::cout << " C=" << num(v.constant);
    if (std::isfinite(v.r2)) std::cout << " r2=" << num(v.r2);
    std::cout << "\n";
    if (!v.witness.empty()) std::cout << "witness: " << v.witness << "\n";
    if (!v.note.empty()) std::cout << "note: " << v.note << "\n";
    std::cout << "config_hash " << hash << "\n";
    for (const auto& f : files) std::cout << "wrote " << f << "\n";
  }
  return 0;
}

int cmd_report(const Options& o) {
  auto cfg = scan_cfg(o);
  auto t = resolve_target(o);
  json config = {{"command", "report"}, {"space", t.spec}, {"scan", to_json(cfg)}};
  std::string hash = config_hash(config);
  auto rep = diagram_report(t.cloud, t.probes, cfg);
  rep.space = t.id;
  auto doc = envelope(config, t.spec, to_json(rep, hash));
  fs::path file = fs::path(o.out) / (t.id + "-report.json");
  write_file(file, dump(doc));
  if (o.json) {
    std::cout << dump(doc);
  } else {
    std::cout << "space " << t.id << "  config_hash " << hash << "\n";
    std::cout << "property       verdict       exponent     constant\n";
    for (const auto& v : rep.rows) {
      char line[160];
      std::snprintf(line, sizeof line, "%-14s %-13s %-12s %-12s", to_string(v.property), to_string(v.verdict),
                    std::isfinite(v.exponent) ? num(std::round(v.exponent * 1e4) / 1e4).c_str() : "-",
                    std::isfinite(v.constant) ? num(std::round(v.constant * 1e4) / 1e4).c_str() : "-");
      std::cout << line << (v.empirical ? " (empirical)" : "") << "\n";
    }
    for (const auto& f : rep.flags) std::cout << "FLAG " << f << "\n";
    std::cout << "wrote " << file.string() << "\n";
  }
  return rep.flags.empty() ? 0 : int(ExitCode::inconsistent);
}

// Default Hardy ball: the unit ball for the perturbed circles, else the cloud point nearest to
// the bounding-box centre with radius diameter/8.
BallSpec default_hardy_ball(const WeightedCloud& c, const std::optional<SpaceDef>& def) {
  if (def && def->is_curve && def->spec.kind == CurveKind::PerturbedCircle) return {{0, 0}, 1.0};
  double x0 = c.points[0].x, x1 = x0, y0 = c.points[0].y, y1 = y0;
  for (const auto& p : c.points) {
    x0 = std::min(x0, p.x);
    x1 = std::max(x1, p.x);
    y0 = std::min(y0, p.y);
    y1 = std::max(y1, p.y);
  }
  Point mid{(x0 + x1) / 2, (y0 + y1) / 2};
  PointIndex idx(c.points);
  return {c.points[idx.nearest(mid).second], diameter(c) / 8};
}

// Refinement ladder: level k halves t_min (perturbed circles), the grid step or the arc step.
WeightedCloud hardy_cloud(const SpaceDef& s, int k, double& truncation) {
  if (!s.is_curve) {
    std::size_t m = std::size_t(16) << k;
    truncation = 1.0 / double(m);
    return uniform_grid(m, 1.0, s.id);
  }
  SamplerCfg cfg = s.sampler;
  if (s.spec.kind == CurveKind::PerturbedCircle) {
    cfg.h = 1e-2;
    cfg.h_straight = 1e-2;
    cfg.dphi_max = std::numbers::pi / 8;
    cfg.t_min = 2e-2 / std::ldexp(1.0, k);
    cfg.h_min = std::min(cfg.h_min, 1e-6);
    truncation = cfg.t_min;
  } else {
    double base = analytic_length(s.spec, cfg.t_min) / 400;
    cfg.h = base / std::ldexp(1.0, k);
    cfg.h_straight = 0;
    cfg.h_min = std::min(cfg.h_min, cfg.h);
    truncation = cfg.h;
  }
  return cached_space(s, cfg);
}

int cmd_hardy(const Options& o) {
  if (!(o.nu > 1) || !std::isfinite(o.nu)) throw ParameterError("--nu must lie in (1, inf)");
  if (o.refine < 1 || o.refine > 8) throw ParameterError("--refine must lie in [1, 8]");
  auto t = resolve_target(o, false);
  HardyOptions ho;
  ho.seed = o.seed;
  ho.threads = o.threads;
  json config = {{"command", "hardy"}, {"space", t.spec}, {"nu", o.nu}, {"refine", t.def ? o.refine : 1},
                 {"seed", o.seed},     {"kernel", to_string(ho.kernel)}, {"rel_tol", ho.rel_tol}, {"max_iter", ho.max_iter}};
  std::string hash = config_hash(config);
  std::vector<GrowthRow> rows;
  json estimates = json::array();
  int levels = t.def ? o.refine : 1;
  for (int k = 0; k < levels; ++k) {
    double trunc = 0;
    WeightedCloud c = t.def ? hardy_cloud(*t.def, k, trunc) : load_cloud_file(o.cloud);
    BallSpec ball = default_hardy_ball(c, t.def);
    auto e = hardy_norm(c, ball, o.nu, ho);
    e.truncation = trunc;
    rows.push_back({trunc, e.value, e.value_excluded, e.d_size, e.r_size});
    estimates.push_back(to_json(e, t.id, ball));
    if (!o.json)
      std::cout << "N=" << num(trunc) << " |D|=" << e.d_size << " |R|=" << e.r_size << " norm=" << num(e.value)
                << " norm_excluded=" << num(e.value_excluded) << " (" << e.method << ")\n";
  }
  bool increasing = true;
  for (std::size_t k = 1; k < rows.size(); ++k) increasing = increasing && rows[k].norm > rows[k - 1].norm;
  json result = {{"estimates", estimates}, {"strictly_increasing", increasing}};
  auto doc = envelope(config, t.spec, result);
  fs::path out(o.out);
  write_file(out / (t.id + "-hardy.json"), dump(doc));
  write_file(out / (t.id + "-hardy.csv"), growth_csv(rows, hash, t.spec.dump()));
  if (o.json) {
    std::cout << dump(doc);
  } else {
    std::cout << "strictly increasing: " << (increasing ? "yes" : "no") << "\nconfig_hash " << hash << "\n";
    std::cout << "wrote " << (out / (t.id + "-hardy.json")).string() << ", " << (out / (t.id + "-hardy.csv")).string()
              << "\n";
  }
  return 0;
}

int cmd_cubes(const Options& o) {
  if (!(o.delta > 0 && o.delta < 1)) throw ParameterError("--delta must lie in (0, 1)");
  auto t = resolve_target(o);
  json config = {{"command", "cubes"}, {"space", t.spec}, {"delta", o.delta}, {"verify", o.verify}};
  std::string hash = config_hash(config);
  auto tree = build_cubes(t.cloud, o.delta);
  json gens = json::array();
  for (const auto& g : tree.gens) gens.push_back({{"j", g.j}, {"side", g.side}, {"cubes", g.cubes.size()}});
  json result = {{"delta", tree.delta}, {"j_min", tree.j_min}, {"j_max", tree.j_max}, {"generations", gens},
                 {"C_disc", jnum(tree.C_disc)}, {"C1", jnum(tree.C1)}, {"a0", jnum(tree.a0)}};
  bool ok = true;
  if (o.verify) {
    auto rep = verify_cube_axioms(tree, t.cloud, boundary_t_grid(tree, t.cloud));
    result["axioms"] = to_json(rep);
    ok = rep.exact_ok();
  }
  auto doc = envelope(config, t.spec, result);
  fs::path file = fs::path(o.out) / (t.id + "-cubes.json");
  write_file(file, dump(doc));
  if (o.json) {
    std::cout << dump(doc);
  } else {
    std::cout << t.id << " delta=" << num(o.delta) << " generations j=" << tree.j_min << ".." << tree.j_max << "\n";
    for (const auto& g : tree.gens) std::cout << "  j=" << g.j << " cubes=" << g.cubes.size() << "\n";
    if (o.verify) {
      const auto& a = result["axioms"];
      std::cout << "partition " << (a["partition"].get<bool>() ? "ok" : "FAIL") << ", nesting "
                << (a["nesting"].get<bool>() ? "ok" : "FAIL") << ", diameter " << (a["diameter"].get<bool>() ? "ok" : "FAIL")
                << ", inner ball " << (a["inner_ball"].get<bool>() ? "ok" : "FAIL") << "\n";
      std::cout << "small boundary eta_hat=" << a["eta_hat"].dump() << "\n";
      std::cout << (ok ? "all exact axioms pass" : "exact axiom failure") << "\n";
    }
    std::cout << "config_hash " << hash << "\nwrote " << file.string() << "\n";
  }
  return ok ? 0 : int(ExitCode::inconsistent);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Empirical probes of homogeneous-type properties on discretized curves"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);
  Options o;

  auto common = [&](CLI::App* sub, bool scan_grid) {
    sub->add_option("--space", o.space, "built-in space id (see 'spaces list')");
    sub->add_option("--cloud", o.cloud, "cloud file (.csv: x[,y],weight[,t,speed]; .json)");
    sub->add_option("--seed", o.seed, "random seed")->capture_default_str();
    sub->add_option("--out", o.out, "output directory")->capture_default_str();
    sub->add_option("--threads", o.threads, "worker threads")->check(CLI::Range(1u, 256u))->capture_default_str();
    sub->add_flag("--json", o.json, "print the JSON document to stdout");
    if (scan_grid) {
      sub->add_option("--eps-min", o.eps_min, "smallest eps/r of the decay grid");
      sub->add_option("--eps-max", o.eps_max, "largest eps/r of the decay grid");
      sub->add_option("--eps-count", o.eps_count, "number of eps/r values");
    }
  };

  auto* spaces = app.add_subcommand("spaces", "built-in spaces");
  auto* list = spaces->add_subcommand("list", "list built-in spaces with their default configs");
  list->add_flag("--json", o.json, "machine-readable listing");
  spaces->require_subcommand(1);

  auto* scan = app.add_subcommand("scan", "scan one property: ld, rld, ad, rad, m, hb");
  scan->add_option("property", o.property, "property")->required();
  common(scan, true);

  auto* report = app.add_subcommand("report", "all properties and the implication check");
  common(report, true);

  auto* hardy = app.add_subcommand("hardy", "Hardy norm growth under refinement");
  common(hardy, false);
  hardy->add_option("--nu", o.nu, "exponent nu")->capture_default_str();
  hardy->add_option("--refine", o.refine, "number of refinement levels")->capture_default_str();

  auto* cubes = app.add_subcommand("cubes", "dyadic cube construction");
  common(cubes, false);
  cubes->add_option("--delta", o.delta, "scale ratio delta")->capture_default_str();
  cubes->add_flag("--verify", o.verify, "check the cube axioms");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : int(ExitCode::usage);
  }

  try {
    if (*list) return cmd_spaces(o);
    if (*scan) return cmd_scan(o);
    if (*report) return cmd_report(o);
    if (*hardy) return cmd_hardy(o);
    if (*cubes) return cmd_cubes(o);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return int(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return int(ExitCode::convergence);
  }
  return int(ExitCode::usage);
}
