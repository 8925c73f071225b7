#pragma once

// Report emission and the command drivers behind the CLI. Every JSON
// report embeds a schema version and the fully resolved config; CSV files
// use a header row, LF endings and 17 significant digits. Files are written
// to a temporary name and renamed into place.
//
// Exit codes: 0 all checks pass, 2 flagged mathematical inconsistency,
// 1 usage or parse error (raised as Error and mapped by the CLI).

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "torusdyn/config.hpp"
#include "torusdyn/dilatation_field.hpp"
#include "torusdyn/entropy_estimator.hpp"
#include "torusdyn/map_catalog.hpp"
#include "torusdyn/wandering_domains.hpp"

namespace torusdyn {

using Json = nlohmann::ordered_json;

inline constexpr const char* kReportSchema = "torusdyn.report/1";
inline constexpr const char* kFamilySchema = "torusdyn.family/1";

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitFlagged = 2;

// ---------------------------------------------------------------------------
// Serialization

inline Json point_json(const TorusPoint& p) { return Json::array({p.x(), p.y()}); }

inline Json map_json(const MapSpec& f) {
  Json j;
  j["kind"] = f.name();
  std::visit(
      [&](const auto& k) {
        using T = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<T, Translation>) {
          j["omega"] = {k.wx, k.wy};
        } else if constexpr (std::is_same_v<T, LinearAutomorphism>) {
          j["matrix"] = {k.m[0], k.m[1], k.m[2], k.m[3]};
        } else if constexpr (std::is_same_v<T, SkewProduct>) {
          j["omega"] = {k.w1, k.w2};
          j["amplitude"] = k.amplitude;
          j["frequency"] = k.frequency;
        } else if constexpr (std::is_same_v<T, StandardMap>) {
          j["k"] = k.k;
        } else {
          j["omega"] = {k.wx, k.wy};
          j["bump_center"] = point_json(k.center);
          j["bump_radius"] = k.radius;
          j["bump_strength"] = k.strength;
        }
      },
      f.kind());
  return j;
}

inline Json config_json(const RunConfig& c) {
  Json j;
  j["seed"] = c.seed;
  j["map"] = map_json(c.map);
  j["entropy"] = {{"n_range", {c.n_min, c.n_max}}, {"epsilon", c.epsilons}, {"grid", c.grid}, {"jitter", c.jitter}};
  j["bounds"] = {{"quadrature", c.quadrature}, {"slack_scale", c.slack_scale}};
  Json d;
  d["family"] = c.family ? Json(*c.family) : Json(nullptr);
  d["alpha"] = c.alpha;
  d["tol"] = c.tol;
  d["n_max"] = c.dilatation_n_max;
  d["samples_in_s"] = c.samples_in_s;
  d["sum_diam_n"] = c.sum_diam_n;
  d["null_epsilon"] = c.null_epsilon;
  d["density_scales"] = c.density_scales;
  d["probe"] = c.probe ? point_json(*c.probe) : Json(nullptr);
  d["holder_samples"] = c.holder_samples;
  j["domains"] = d;
  j["family"] = {{"omega", {c.family_build.wx, c.family_build.wy}},
                 {"count", c.family_build.count},
                 {"c", c.family_build.c},
                 {"rho", c.family_build.rho},
                 {"origin", point_json(c.family_build.origin)},
                 {"margin", c.family_build.margin}};
  j["field"] = {{"grid", c.field_grid}};
  return j;
}

inline Json family_json(const DomainCollection& c) {
  Json j;
  j["schema"] = kFamilySchema;
  j["alpha"] = c.alpha();
  j["truncation_note"] = c.truncation_note();
  j["boundary_samples"] = c.empty() ? kDefaultBoundarySamples : static_cast<int>(c.domains().front().boundary_samples.size());
  Json ds = Json::array();
  for (const auto& d : c.domains()) {
    ds.push_back({{"label", d.label},
                  {"center", point_json(d.center)},
                  {"inradius", d.inradius},
                  {"circumradius", d.circumradius},
                  {"diameter", d.diameter}});
  }
  j["domains"] = ds;
  Json perm = Json::array();
  for (const auto& [from, to] : c.permutation()) perm.push_back({from, to});
  j["permutation"] = perm;
  return j;
}

inline DomainCollection family_from_json(const nlohmann::json& j) {
  try {
    const int samples = j.value("boundary_samples", kDefaultBoundarySamples);
    std::vector<Domain> domains;
    for (const auto& d : j.at("domains")) {
      const auto& c = d.at("center");
      std::optional<double> ell;
      if (d.contains("diameter")) ell = d.at("diameter").get<double>();
      domains.push_back(make_domain(d.at("label").get<int>(), TorusPoint(c.at(0).get<double>(), c.at(1).get<double>()),
                                    d.at("inradius").get<double>(), d.at("circumradius").get<double>(), ell, samples));
    }
    std::map<int, int> perm;
    if (j.contains("permutation")) {
      for (const auto& e : j.at("permutation")) perm[e.at(0).get<int>()] = e.at(1).get<int>();
    }
    return DomainCollection(std::move(domains), std::move(perm), j.value("alpha", 1.0),
                            j.value("truncation_note", std::string("finite truncation")));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::Config, std::string("family file: ") + e.what());
  }
}

inline DomainCollection load_family(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Config, "cannot open family file '" + path.string() + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::Config, std::string("family file: ") + e.what());
  }
  return family_from_json(j);
}

// ---------------------------------------------------------------------------
// Output

inline std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v == 0.0 ? 0.0 : v);
  return buf;
}

/// Writes `content` to `path` through a temporary file and a rename.
inline void write_atomic(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::Config, "cannot write '" + tmp.string() + "'");
    out << content;
    if (!out) throw Error(ErrorKind::Config, "write failed for '" + tmp.string() + "'");
  }
  std::filesystem::rename(tmp, path);
}

inline std::string dump_json(const Json& j) { return j.dump(2) + "\n"; }

class CsvWriter {
 public:
  explicit CsvWriter(std::initializer_list<std::string> header) { row_strings(header); }

  template <typename... Ts>
  void row(const Ts&... cols) {
    bool first = true;
    ((append(cols, first)), ...);
    text_ += '\n';
  }

  const std::string& str() const { return text_; }

 private:
  void row_strings(std::initializer_list<std::string> cols) {
    bool first = true;
    for (const auto& c : cols) {
      if (!first) text_ += ',';
      text_ += c;
      first = false;
    }
    text_ += '\n';
  }
  void append(double v, bool& first) { sep(first); text_ += format_double(v); }
  void append(int v, bool& first) { sep(first); text_ += std::to_string(v); }
  void append(std::uint64_t v, bool& first) { sep(first); text_ += std::to_string(v); }
  void append(const std::string& v, bool& first) { sep(first); text_ += v; }
  void sep(bool& first) {
    if (!first) text_ += ',';
    first = false;
  }

  std::string text_;
};

struct OutputOptions {
  std::filesystem::path out_dir = ".";
  std::optional<std::string> format;  ///< "json" or "csv"; both when unset

  bool wants(const std::string& fmt) const { return !format || *format == fmt; }
};

struct CommandResult {
  int exit_code = kExitOk;
  std::vector<std::filesystem::path> written;
  std::vector<std::string> flags;
};

namespace detail {

inline void require_format(const OutputOptions& out, std::initializer_list<const char*> allowed) {
  if (!out.format) return;
  for (const char* a : allowed) {
    if (*out.format == a) return;
  }
  throw Error(ErrorKind::Config, "format '" + *out.format + "' is not supported by this command");
}

inline Json report_header(const std::string& command, const RunConfig& cfg) {
  Json j;
  j["schema"] = kReportSchema;
  j["command"] = command;
  j["config"] = config_json(cfg);
  return j;
}

inline void finish(CommandResult& res, const OutputOptions& out, const std::string& name, const std::string& text) {
  const auto path = out.out_dir / name;
  write_atomic(path, text);
  res.written.push_back(path);
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Commands

inline CommandResult cmd_entropy(const RunConfig& cfg, const OutputOptions& out) {
  detail::require_format(out, {"json", "csv"});
  CommandResult res;
  const auto n_values = cfg.n_values();
  const auto candidates = entropy_candidates(cfg.grid, cfg.jitter, cfg.seed);
  const OrbitTable orbits(cfg.map, candidates, cfg.n_max);
  const auto nodes = midpoint_grid(cfg.quadrature);
  const double dil = dilatation_bound(cfg.map, cfg.n_max, nodes);
  const double prz = przytycki_bound(cfg.map, cfg.n_max, nodes);
  const double slack = cfg.slack_scale * 2.0 / cfg.n_max * std::log(2.0);

  Json j = detail::report_header("entropy", cfg);
  j["estimator_note"] = "greedy separated sets are maximal, not maximum: counts are lower bounds of N(n,eps)";
  j["upper_bounds"] = {{"n", cfg.n_max}, {"dilatation_bound", dil}, {"przytycki_bound", prz}, {"slack", slack}};
  Json fits = Json::array();
  CsvWriter csv({"epsilon", "n", "count", "candidate_count", "seed"});
  for (const double eps : cfg.epsilons) {
    const auto fit = fit_entropy(orbits, eps, n_values, cfg.seed);
    Json records = Json::array();
    for (const auto& r : fit.reports) {
      records.push_back({{"n", r.n}, {"count", r.count}, {"candidate_count", r.candidate_count}, {"seed", r.seed}});
      csv.row(eps, r.n, r.count, r.candidate_count, r.seed);
    }
    fits.push_back({{"epsilon", eps}, {"slope", fit.slope}, {"intercept", fit.intercept}, {"records", records}});
    if (fit.slope > std::min(dil, prz) + slack) {
      res.flags.push_back("fitted slope exceeds the entropy upper bound at eps=" + format_double(eps));
    }
  }
  j["fits"] = fits;
  j["flags"] = res.flags;
  if (out.wants("json")) detail::finish(res, out, "entropy.json", dump_json(j));
  if (out.wants("csv")) detail::finish(res, out, "entropy_counts.csv", csv.str());
  res.exit_code = res.flags.empty() ? kExitOk : kExitFlagged;
  return res;
}

inline CommandResult cmd_bound_chain(const RunConfig& cfg, const OutputOptions& out) {
  detail::require_format(out, {"json", "csv"});
  CommandResult res;
  std::optional<DomainCollection> family;
  if (cfg.family) family = load_family(*cfg.family);

  BoundChainParams prm;
  prm.n_values = cfg.n_values();
  prm.epsilons = cfg.epsilons;
  prm.candidate_grid = cfg.grid;
  prm.jitter = cfg.jitter;
  prm.quadrature = cfg.quadrature;
  prm.seed = cfg.seed;
  prm.slack_scale = cfg.slack_scale;
  prm.alpha = cfg.alpha;
  prm.holder_samples = cfg.holder_samples;
  const auto chain = bound_chain(cfg.map, prm, family ? &*family : nullptr);

  Json j = detail::report_header("bound-chain", cfg);
  j["estimator_note"] = chain.estimator_note;
  j["epsilons"] = chain.epsilons;
  j["baseline_counts"] = chain.baseline_counts;
  j["candidate_count"] = chain.candidate_count;
  j["quadrature_nodes"] = chain.quadrature_nodes;
  if (chain.constants) {
    const auto& k = *chain.constants;
    j["constants"] = {{"beta", k.beta},         {"delta", k.delta},       {"delta_prime", k.delta_prime},
                      {"c1", k.lipschitz.c1},   {"c_mu", k.holder.c_mu},  {"c_theta", k.holder.c_theta},
                      {"safety_factor", k.safety_factor}, {"C", k.c},    {"C_prime", k.c_prime}};
  }
  Json records = Json::array();
  CsvWriter csv({"n", "epsilon", "count", "entropy_rate", "dilatation_bound", "przytycki_bound", "slack"});
  for (const auto& r : chain.records) {
    Json rec;
    rec["n"] = r.n;
    rec["counts"] = r.counts;
    rec["entropy_rate"] = r.entropy_rate;
    rec["dilatation_bound"] = r.dilatation_bound;
    rec["przytycki_bound"] = r.przytycki_bound;
    rec["slack"] = r.slack;
    if (r.xi) {
      rec["xi"] = *r.xi;
      rec["xi_rate"] = *r.xi_rate;
      rec["max_log_K_domain"] = *r.max_log_K_domain;
      rec["xi_route_bound"] = *r.xi_route_bound;
    }
    rec["flags"] = r.flags;
    records.push_back(rec);
    for (std::size_t e = 0; e < r.counts.size(); ++e) {
      csv.row(r.n, chain.epsilons[e], r.counts[e], r.entropy_rate[e], r.dilatation_bound, r.przytycki_bound, r.slack);
    }
    for (const auto& f : r.flags) res.flags.push_back("n=" + std::to_string(r.n) + ": " + f);
  }
  j["records"] = records;
  j["flagged"] = chain.flagged();
  if (out.wants("json")) detail::finish(res, out, "bound_chain.json", dump_json(j));
  if (out.wants("csv")) detail::finish(res, out, "bound_chain.csv", csv.str());
  res.exit_code = res.flags.empty() ? kExitOk : kExitFlagged;
  return res;
}

inline CommandResult cmd_check_domains(const RunConfig& cfg, const OutputOptions& out) {
  detail::require_format(out, {"json"});
  if (!cfg.family) throw Error(ErrorKind::Config, "check-domains needs 'domains.family'");
  CommandResult res;
  const auto family = load_family(*cfg.family);
  if (family.empty()) throw Error(ErrorKind::Config, "family file holds no domains");
  Json j = detail::report_header("check-domains", cfg);
  j["truncation_note"] = family.truncation_note();
  j["domain_count"] = family.size();

  const auto coll = verify_collection(family);
  Json overlaps = Json::array();
  for (const auto& p : coll.overlapping) overlaps.push_back({p.first, p.second});
  j["collection"] = {{"passed", coll.passed()},
                     {"overlapping_pairs", overlaps},
                     {"orbit_repeats", coll.orbit_repeats},
                     {"covering_radius", coll.covering_radius}};
  if (!coll.overlapping.empty()) res.flags.push_back("disjointness violated");
  if (!coll.orbit_repeats.empty()) res.flags.push_back("sigma-orbit repeats a label");

  const double beta = beta_of(family);
  j["beta"] = beta;

  const auto perm = verify_permutation(cfg.map, family, cfg.tol);
  Json failures = Json::array();
  for (const auto& f : perm.failures) failures.push_back({{"label", f.label}, {"reason", f.reason}, {"value", f.value}});
  j["permutation"] = {{"passed", perm.passed()}, {"tested", perm.tested}, {"tol", cfg.tol}, {"failures", failures}};
  if (!perm.passed()) res.flags.push_back("map does not permute the family");

  const auto nulls = null_sequence_check(family, cfg.null_epsilon);
  j["null_sequence"] = {{"passed", nulls.passed()},
                        {"epsilon", nulls.epsilon},
                        {"count_at_least_epsilon", nulls.count_at_least_epsilon},
                        {"area_sum", nulls.area_sum}};
  if (!nulls.passed()) res.flags.push_back("area budget exceeded");

  Json xi_table = Json::array();
  const int xi_top = std::min<int>(cfg.sum_diam_n, static_cast<int>(family.size()) - 1);
  for (int n = 1; n <= xi_top; ++n) {
    const double x = xi(family, cfg.alpha, n);
    xi_table.push_back({{"n", n}, {"xi", x}, {"xi_rate", x / n}});
  }
  j["xi"] = xi_table;

  // longest sigma-chain from the smallest label, capped at sum_diam_n
  const int start = family.domains().front().label;
  int chain_len = 0;
  for (auto cur = family.sigma(start); cur && chain_len < cfg.sum_diam_n && family.find(*cur); cur = family.sigma(*cur)) {
    ++chain_len;
  }
  const auto sd = sum_diam_check(cfg.map, family, cfg.alpha, chain_len, start, cfg.holder_samples, cfg.seed);
  j["sum_diam"] = {{"passed", sd.passed()},     {"start_label", sd.start_label}, {"n", sd.n},
                   {"lhs", sd.lhs},             {"rhs", sd.rhs},                 {"margin", sd.margin()},
                   {"C", sd.constants.c},       {"delta", sd.constants.delta},   {"observed_delta", sd.observed_delta},
                   {"diameter_sum", sd.diameter_sum}};
  if (!sd.passed()) res.flags.push_back("sum-of-diameters estimate violated");

  const auto bd = bounded_dilatation_diagnostic(cfg.map, family, cfg.dilatation_n_max, cfg.samples_in_s, cfg.seed);
  j["bounded_dilatation"] = {{"flagged", bd.flagged()}, {"max_K", bd.max_K},           {"beta_sq", bd.beta_sq},
                             {"n_max", bd.n_max},       {"samples_used", bd.samples_used}, {"tol", bd.tol}};
  if (bd.flagged()) res.flags.push_back("dilatation on S exceeds beta^2");

  // accumulation probe: configured, or just outside the first domain
  std::optional<TorusPoint> probe = cfg.probe;
  if (!probe) {
    const auto& d0 = family.domains().front();
    const TorusPoint candidate = d0.center + Vec2{d0.circumradius * 1.05 + 1e-4, 0.0};
    if (family.in_complement(candidate)) probe = candidate;
  }
  if (probe) {
    Json dens = Json::array();
    for (const auto& e : density_diagnostic(family, *probe, cfg.density_scales)) {
      dens.push_back({{"scale", e.scale}, {"satisfied", e.satisfied},
                      {"witness", e.witness ? Json(*e.witness) : Json(nullptr)}});
    }
    j["density"] = {{"probe", point_json(*probe)}, {"entries", dens}, {"note", "diagnostic only, never asserted"}};
  }

  j["flags"] = res.flags;
  if (out.wants("json")) detail::finish(res, out, "check_domains.json", dump_json(j));
  res.exit_code = res.flags.empty() ? kExitOk : kExitFlagged;
  return res;
}

inline CommandResult cmd_mu_field(const RunConfig& cfg, const OutputOptions& out) {
  detail::require_format(out, {"json", "csv"});
  CommandResult res;
  const auto rows = mu_field(cfg.map, cfg.field_grid);
  if (out.wants("csv")) {
    CsvWriter csv({"x", "y", "mu_re", "mu_im", "theta_arg", "K"});
    for (const auto& r : rows) csv.row(r.x, r.y, r.mu_re, r.mu_im, r.theta_arg, r.K);
    detail::finish(res, out, "mu_field.csv", csv.str());
  }
  if (out.wants("json")) {
    Json j = detail::report_header("mu-field", cfg);
    Json arr = Json::array();
    for (const auto& r : rows) arr.push_back({r.x, r.y, r.mu_re, r.mu_im, r.theta_arg, r.K});
    j["columns"] = {"x", "y", "mu_re", "mu_im", "theta_arg", "K"};
    j["rows"] = arr;
    detail::finish(res, out, "mu_field.json", dump_json(j));
  }
  return res;
}

inline CommandResult cmd_build_family(const RunConfig& cfg, const OutputOptions& out) {
  detail::require_format(out, {"json"});
  CommandResult res;
  const auto family = build_translation_family(cfg.family_build);
  const auto check = verify_collection(family);
  if (!check.passed()) res.flags.push_back("constructed family failed verification");
  detail::finish(res, out, "family.json", dump_json(family_json(family)));
  res.exit_code = res.flags.empty() ? kExitOk : kExitFlagged;
  return res;
}

}  // namespace torusdyn
