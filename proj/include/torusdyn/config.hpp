#pragma once

// Run configuration: a TOML-style key-value document (sections, scalars,
// strings, booleans and numeric arrays) or the equivalent JSON object.
// Both are flattened to dotted keys and resolved into a RunConfig.
//
//   seed = 0
//   [map]
//   kind = "linear"
//   matrix = [2, 1, 1, 1]
//   [entropy]
//   n_range = [2, 6]
//   epsilon = [0.2]

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "json.hpp"
#include "torusdyn/core.hpp"
#include "torusdyn/map_catalog.hpp"
#include "torusdyn/wandering_domains.hpp"

namespace torusdyn {

using ConfigValue = std::variant<double, bool, std::string, std::vector<double>>;

struct ConfigEntry {
  ConfigValue value;
  int line = 0;  ///< 0 when the source has no line information (JSON)
};

using KeyValueDoc = std::map<std::string, ConfigEntry>;

namespace detail {

[[noreturn]] inline void config_error(int line, const std::string& what) {
  throw Error(ErrorKind::Config, line > 0 ? "line " + std::to_string(line) + ": " + what : what);
}

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

inline double parse_number(std::string_view s, int line) {
  s = trim(s);
  double v = 0.0;
  const auto* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || ptr != end || s.empty()) config_error(line, "not a number: '" + std::string(s) + "'");
  return v;
}

/// Drops a trailing '#' comment that is not inside a string literal.
inline std::string_view strip_comment(std::string_view s) {
  bool in_string = false;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '"') in_string = !in_string;
    if (s[i] == '#' && !in_string) return s.substr(0, i);
  }
  return s;
}

inline ConfigValue parse_value(std::string_view raw, int line) {
  const auto s = trim(raw);
  if (s.empty()) config_error(line, "missing value");
  if (s.front() == '"') {
    if (s.size() < 2 || s.back() != '"') config_error(line, "unterminated string");
    return std::string(s.substr(1, s.size() - 2));
  }
  if (s == "true") return true;
  if (s == "false") return false;
  if (s.front() == '[') {
    if (s.back() != ']') config_error(line, "unterminated array");
    std::vector<double> out;
    auto body = trim(s.substr(1, s.size() - 2));
    while (!body.empty()) {
      const auto comma = body.find(',');
      out.push_back(parse_number(body.substr(0, comma), line));
      if (comma == std::string_view::npos) break;
      body = trim(body.substr(comma + 1));
    }
    return out;
  }
  return parse_number(s, line);
}

inline void flatten_json(const nlohmann::json& j, const std::string& prefix, KeyValueDoc& out) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    const std::string key = prefix.empty() ? it.key() : prefix + "." + it.key();
    const auto& v = it.value();
    if (v.is_object()) {
      flatten_json(v, key, out);
    } else if (v.is_boolean()) {
      out[key] = {v.get<bool>(), 0};
    } else if (v.is_number()) {
      out[key] = {v.get<double>(), 0};
    } else if (v.is_string()) {
      out[key] = {v.get<std::string>(), 0};
    } else if (v.is_array()) {
      std::vector<double> arr;
      for (const auto& e : v) {
        if (!e.is_number()) config_error(0, "array '" + key + "' must be numeric");
        arr.push_back(e.get<double>());
      }
      out[key] = {arr, 0};
    } else {
      config_error(0, "unsupported value for '" + key + "'");
    }
  }
}

}  // namespace detail

inline KeyValueDoc parse_key_value(std::string_view text) {
  KeyValueDoc doc;
  std::string section;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    const auto raw = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    const auto line = detail::trim(detail::strip_comment(raw));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') detail::config_error(line_no, "malformed section header");
      section = std::string(detail::trim(line.substr(1, line.size() - 2)));
      if (section.empty()) detail::config_error(line_no, "empty section name");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) detail::config_error(line_no, "expected 'key = value'");
    const auto key = std::string(detail::trim(line.substr(0, eq)));
    if (key.empty()) detail::config_error(line_no, "empty key");
    const std::string full = section.empty() ? key : section + "." + key;
    if (doc.count(full)) detail::config_error(line_no, "duplicate key '" + full + "'");
    doc[full] = {detail::parse_value(line.substr(eq + 1), line_no), line_no};
  }
  return doc;
}

inline KeyValueDoc parse_json_config(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorKind::Config, std::string("JSON config: ") + e.what());
  }
  if (!j.is_object()) throw Error(ErrorKind::Config, "JSON config must be an object");
  KeyValueDoc doc;
  detail::flatten_json(j, "", doc);
  return doc;
}

/// JSON when the first non-blank character is '{', key-value otherwise.
inline KeyValueDoc parse_config_text(std::string_view text) {
  const auto t = detail::trim(text);
  if (!t.empty() && t.front() == '{') return parse_json_config(text);
  return parse_key_value(text);
}

struct RunConfig {
  MapSpec map = MapSpec::translation(0.0, 0.0);

  // entropy / bound chain
  int n_min = 2;
  int n_max = 6;
  std::vector<double> epsilons{0.2};
  int grid = 200;
  double jitter = 0.25;
  int quadrature = 64;
  double slack_scale = 1.0;

  // domain diagnostics
  std::optional<std::string> family;
  double alpha = 1.0;
  double tol = 1e-9;
  int dilatation_n_max = 10;
  int samples_in_s = 2000;
  int sum_diam_n = 10;
  double null_epsilon = 0.01;
  std::vector<double> density_scales{0.1, 0.05};
  std::optional<TorusPoint> probe;
  int holder_samples = 10000;

  // build-family
  TranslationFamilyParams family_build{std::sqrt(2.0) - 1.0, std::sqrt(3.0) - 1.0, 200, 0.01, 0.98};

  // mu-field
  int field_grid = 32;

  std::uint64_t seed = 0;

  std::vector<int> n_values() const {
    std::vector<int> out;
    for (int n = n_min; n <= n_max; ++n) out.push_back(n);
    return out;
  }
};

namespace detail {

class KeyReader {
 public:
  explicit KeyReader(const KeyValueDoc& doc) : doc_(doc) {}

  const ConfigEntry* find(const std::string& key) {
    const auto it = doc_.find(key);
    if (it == doc_.end()) return nullptr;
    used_.insert(key);
    return &it->second;
  }

  std::optional<double> number(const std::string& key) {
    const auto* e = find(key);
    if (!e) return std::nullopt;
    if (const auto* d = std::get_if<double>(&e->value)) return *d;
    config_error(e->line, "'" + key + "' must be a number");
  }

  std::optional<int> integer(const std::string& key) {
    const auto* e = find(key);
    if (!e) return std::nullopt;
    const auto* d = std::get_if<double>(&e->value);
    if (!d || std::floor(*d) != *d || std::abs(*d) > 1e9) config_error(e->line, "'" + key + "' must be an integer");
    return static_cast<int>(*d);
  }

  std::optional<bool> boolean(const std::string& key) {
    const auto* e = find(key);
    if (!e) return std::nullopt;
    if (const auto* b = std::get_if<bool>(&e->value)) return *b;
    config_error(e->line, "'" + key + "' must be true or false");
  }

  std::optional<std::string> string(const std::string& key) {
    const auto* e = find(key);
    if (!e) return std::nullopt;
    if (const auto* s = std::get_if<std::string>(&e->value)) return *s;
    config_error(e->line, "'" + key + "' must be a string");
  }

  std::optional<std::vector<double>> array(const std::string& key, std::optional<std::size_t> size = std::nullopt) {
    const auto* e = find(key);
    if (!e) return std::nullopt;
    const auto* a = std::get_if<std::vector<double>>(&e->value);
    if (!a) config_error(e->line, "'" + key + "' must be an array");
    if (size && a->size() != *size) {
      config_error(e->line, "'" + key + "' must have " + std::to_string(*size) + " elements");
    }
    return *a;
  }

  int line_of(const std::string& key) const {
    const auto it = doc_.find(key);
    return it == doc_.end() ? 0 : it->second.line;
  }

  void reject_unused() const {
    for (const auto& [key, entry] : doc_) {
      if (!used_.count(key)) config_error(entry.line, "unknown key '" + key + "'");
    }
  }

 private:
  const KeyValueDoc& doc_;
  std::set<std::string> used_;
};

inline MapSpec read_map(KeyReader& r) {
  const auto kind = r.string("map.kind");
  if (!kind) config_error(0, "missing 'map.kind'");
  const int line = r.line_of("map.kind");
  const auto pair = [&](const std::string& key) {
    const auto v = r.array(key, 2);
    if (!v) config_error(line, "map kind '" + *kind + "' needs '" + key + "'");
    return *v;
  };
  const auto num = [&](const std::string& key, std::optional<double> fallback = std::nullopt) {
    const auto v = r.number(key);
    if (!v && !fallback) config_error(line, "map kind '" + *kind + "' needs '" + key + "'");
    return v.value_or(fallback.value_or(0.0));
  };
  try {
    if (*kind == "translation") {
      const auto w = pair("map.omega");
      return MapSpec::translation(w[0], w[1]);
    }
    if (*kind == "linear") {
      const auto m = r.array("map.matrix", 4);
      if (!m) config_error(line, "map kind 'linear' needs 'map.matrix'");
      for (const double v : *m) {
        if (std::floor(v) != v) config_error(r.line_of("map.matrix"), "'map.matrix' must hold integers");
      }
      return MapSpec::linear(static_cast<long>((*m)[0]), static_cast<long>((*m)[1]), static_cast<long>((*m)[2]),
                             static_cast<long>((*m)[3]));
    }
    if (*kind == "skew") {
      const auto w = pair("map.omega");
      const double freq = num("map.frequency", 1.0);
      if (std::floor(freq) != freq) config_error(r.line_of("map.frequency"), "'map.frequency' must be an integer");
      return MapSpec::skew(w[0], w[1], num("map.amplitude"), static_cast<int>(freq));
    }
    if (*kind == "standard_map") return MapSpec::standard_map(num("map.k"));
    if (*kind == "perturbed_translation") {
      const auto w = pair("map.omega");
      const auto c = pair("map.bump_center");
      return MapSpec::perturbed_translation(w[0], w[1], TorusPoint(c[0], c[1]), num("map.bump_radius"),
                                            num("map.bump_strength"));
    }
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::Config) throw;
    config_error(line, e.what());
  }
  config_error(line, "unknown map kind '" + *kind + "'");
}

}  // namespace detail

inline RunConfig resolve_config(const KeyValueDoc& doc) {
  detail::KeyReader r(doc);
  RunConfig cfg;
  cfg.map = detail::read_map(r);

  if (auto v = r.integer("seed")) {
    if (*v < 0) detail::config_error(r.line_of("seed"), "'seed' must be nonnegative");
    cfg.seed = static_cast<std::uint64_t>(*v);
  }

  if (auto v = r.array("entropy.n_range", 2)) {
    if (std::floor((*v)[0]) != (*v)[0] || std::floor((*v)[1]) != (*v)[1] || (*v)[0] < 1 || (*v)[1] < (*v)[0]) {
      detail::config_error(r.line_of("entropy.n_range"), "'entropy.n_range' must be integers 1 <= lo <= hi");
    }
    cfg.n_min = static_cast<int>((*v)[0]);
    cfg.n_max = static_cast<int>((*v)[1]);
  }
  if (auto v = r.array("entropy.epsilon")) {
    if (v->empty()) detail::config_error(r.line_of("entropy.epsilon"), "'entropy.epsilon' must not be empty");
    for (const double e : *v) {
      if (!(e > 0.0)) detail::config_error(r.line_of("entropy.epsilon"), "epsilon values must be positive");
    }
    cfg.epsilons = *v;
  }
  if (auto v = r.integer("entropy.grid")) cfg.grid = *v;
  if (cfg.grid < 1) detail::config_error(r.line_of("entropy.grid"), "'entropy.grid' must be >= 1");
  if (auto v = r.number("entropy.jitter")) cfg.jitter = *v;
  if (!(cfg.jitter >= 0.0 && cfg.jitter <= 0.5)) {
    detail::config_error(r.line_of("entropy.jitter"), "'entropy.jitter' must lie in [0, 0.5]");
  }

  if (auto v = r.integer("bounds.quadrature")) cfg.quadrature = *v;
  if (cfg.quadrature < 1) detail::config_error(r.line_of("bounds.quadrature"), "'bounds.quadrature' must be >= 1");
  if (auto v = r.number("bounds.slack_scale")) cfg.slack_scale = *v;

  cfg.family = r.string("domains.family");
  if (auto v = r.number("domains.alpha")) cfg.alpha = *v;
  if (!(cfg.alpha > 0.0 && cfg.alpha <= 1.0)) {
    detail::config_error(r.line_of("domains.alpha"), "'domains.alpha' must lie in (0, 1]");
  }
  if (auto v = r.number("domains.tol")) cfg.tol = *v;
  if (auto v = r.integer("domains.n_max")) cfg.dilatation_n_max = *v;
  if (cfg.dilatation_n_max < 1) detail::config_error(r.line_of("domains.n_max"), "'domains.n_max' must be >= 1");
  if (auto v = r.integer("domains.samples_in_s")) cfg.samples_in_s = *v;
  if (cfg.samples_in_s < 1) {
    detail::config_error(r.line_of("domains.samples_in_s"), "'domains.samples_in_s' must be >= 1");
  }
  if (auto v = r.integer("domains.sum_diam_n")) cfg.sum_diam_n = *v;
  if (cfg.sum_diam_n < 0) detail::config_error(r.line_of("domains.sum_diam_n"), "'domains.sum_diam_n' must be >= 0");
  if (auto v = r.number("domains.null_epsilon")) cfg.null_epsilon = *v;
  if (auto v = r.array("domains.density_scales")) cfg.density_scales = *v;
  if (auto v = r.array("domains.probe", 2)) cfg.probe = TorusPoint((*v)[0], (*v)[1]);
  if (auto v = r.integer("domains.holder_samples")) cfg.holder_samples = *v;
  if (cfg.holder_samples < 1) {
    detail::config_error(r.line_of("domains.holder_samples"), "'domains.holder_samples' must be >= 1");
  }

  if (auto v = r.array("family.omega", 2)) {
    cfg.family_build.wx = (*v)[0];
    cfg.family_build.wy = (*v)[1];
  }
  if (auto v = r.integer("family.count")) cfg.family_build.count = *v;
  if (cfg.family_build.count < 1) detail::config_error(r.line_of("family.count"), "'family.count' must be >= 1");
  if (auto v = r.number("family.c")) cfg.family_build.c = *v;
  if (auto v = r.number("family.rho")) cfg.family_build.rho = *v;
  if (auto v = r.array("family.origin", 2)) cfg.family_build.origin = TorusPoint((*v)[0], (*v)[1]);
  if (auto v = r.number("family.margin")) cfg.family_build.margin = *v;

  if (auto v = r.integer("field.grid")) cfg.field_grid = *v;
  if (cfg.field_grid < 1) detail::config_error(r.line_of("field.grid"), "'field.grid' must be >= 1");

  r.reject_unused();
  return cfg;
}

inline RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Config, "cannot open config '" + path.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  auto cfg = resolve_config(parse_config_text(ss.str()));
  // relative family paths are taken from the config's directory
  if (cfg.family && std::filesystem::path(*cfg.family).is_relative()) {
    cfg.family = (path.parent_path() / *cfg.family).lexically_normal().string();
  }
  return cfg;
}

}  // namespace torusdyn
