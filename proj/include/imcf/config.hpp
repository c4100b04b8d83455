#pragma once
// Line-oriented `dotted.key = value` configuration with `#` comments.

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "imcf/errors.hpp"
#include "imcf/flow.hpp"
#include "imcf/verify.hpp"

namespace imcf {

struct ConfigEntry {
  std::string key;
  std::string value;
  int line = 0;
};

/// Entries in file order. Later duplicates are rejected.
class ConfigMap {
 public:
  const std::vector<ConfigEntry>& entries() const { return entries_; }

  const ConfigEntry* find(const std::string& key) const {
    for (const auto& e : entries_)
      if (e.key == key) return &e;
    return nullptr;
  }
  bool has(const std::string& key) const { return find(key) != nullptr; }

  void set(const std::string& key, const std::string& value, int line = 0) {
    for (auto& e : entries_)
      if (e.key == key) {
        e.value = value;
        return;
      }
    entries_.push_back({key, value, line});
  }
  void erase(const std::string& key) {
    std::erase_if(entries_, [&](const ConfigEntry& e) { return e.key == key; });
  }
  void erase_prefix(const std::string& prefix) {
    std::erase_if(entries_, [&](const ConfigEntry& e) { return e.key.rfind(prefix, 0) == 0; });
  }

  std::string to_text() const {
    std::string out;
    for (const auto& e : entries_) out += e.key + " = " + e.value + "\n";
    return out;
  }

 private:
  std::vector<ConfigEntry> entries_;
};

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) out.push_back(trim(cur));
  if (!s.empty() && s.back() == sep) out.push_back({});
  return out;
}

inline bool valid_key(const std::string& k) {
  if (k.empty() || k.front() == '.' || k.back() == '.') return false;
  return std::all_of(k.begin(), k.end(), [](char c) { return std::isalnum((unsigned char)c) || c == '_' || c == '.'; });
}

}  // namespace detail

inline ConfigMap parse_config_text(const std::string& text) {
  ConfigMap m;
  std::istringstream in(text);
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const auto hash = raw.find('#');
    const std::string s = detail::trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (s.empty()) continue;
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw ConfigError("expected 'key = value'", line);
    const std::string key = detail::trim(s.substr(0, eq));
    const std::string value = detail::trim(s.substr(eq + 1));
    if (!detail::valid_key(key)) throw ConfigError("malformed key", line, key);
    if (value.empty()) throw ConfigError("missing value", line, key);
    if (m.has(key)) throw ConfigError("duplicate key", line, key);
    m.set(key, value, line);
  }
  return m;
}

inline ConfigMap load_config_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot read config file '" + path + "'");
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_config_text(ss.str());
}

// ---------------------------------------------------------------------------

enum class CheckId { growth_and_support, H_floor, asymptotics, evolution_residuals, A_bounded };

inline std::string to_string(CheckId c) {
  switch (c) {
    case CheckId::growth_and_support: return "growth_and_support";
    case CheckId::H_floor: return "H_floor";
    case CheckId::asymptotics: return "asymptotics";
    case CheckId::evolution_residuals: return "evolution_residuals";
    case CheckId::A_bounded: return "A_bounded";
  }
  return "?";
}
inline CheckId check_id_from_string(const std::string& s) {
  for (auto c : {CheckId::growth_and_support, CheckId::H_floor, CheckId::asymptotics, CheckId::evolution_residuals,
                 CheckId::A_bounded})
    if (to_string(c) == s) return c;
  throw ArgumentError("unknown check '" + s + "'");
}

struct RunConfig {
  // warp
  WarpPreset preset = WarpPreset::euclidean;
  WarpParams warp_params;
  // base
  BaseKind base_kind = BaseKind::point;
  int resolution = 0;
  int point_dim = 2;
  double point_rho = 1.0;
  // initial data
  std::optional<double> r0, h0;
  std::vector<std::pair<int, double>> modes;
  std::vector<double> phi_table;
  // flow and checks
  FlowConfig flow;
  std::vector<CheckId> checks;
  CheckParams check;
  AsymptoticMode mode = AsymptoticMode::expect_roundness;
  std::vector<Identity> identities{Identity::omega_eq, Identity::tw_eq};
  bool refine = true;
  std::string output_dir = "out";
  std::vector<std::pair<std::string, std::vector<std::string>>> sweep;

  WarpSpec warp() const {
    switch (preset) {
      case WarpPreset::euclidean: return WarpSpec::euclidean();
      case WarpPreset::hyperbolic: return WarpSpec::hyperbolic();
      case WarpPreset::schwarzschild3: return WarpSpec::schwarzschild3(warp_params.m, warp_params.h_anchor);
      case WarpPreset::saturating:
        return WarpSpec::saturating(warp_params.a, warp_params.b, warp_params.k, warp_params.h0);
      case WarpPreset::power: return WarpSpec::power(warp_params.p);
    }
    return WarpSpec::euclidean();
  }

  BasePtr base() const {
    switch (base_kind) {
      case BaseKind::point: return make_base(BaseManifold::point(point_dim, point_rho));
      case BaseKind::circle: return make_base(BaseManifold::circle(resolution));
      case BaseKind::axisphere: return make_base(BaseManifold::axisphere(resolution));
      case BaseKind::torus2: return make_base(BaseManifold::torus2(resolution));
    }
    return nullptr;
  }

  bool has_check(CheckId c) const { return std::find(checks.begin(), checks.end(), c) != checks.end(); }
};

inline int default_resolution(BaseKind k) {
  switch (k) {
    case BaseKind::point: return 1;
    case BaseKind::circle: return 128;
    case BaseKind::axisphere: return 200;
    case BaseKind::torus2: return 32;
  }
  return 1;
}

namespace detail {

class Reader {
 public:
  explicit Reader(const ConfigMap& m) : m_(m) {}

  const ConfigEntry* get(const std::string& key) {
    used_.push_back(key);
    return m_.find(key);
  }

  double number(const ConfigEntry& e) const { return parse_number(e.value, e); }

  double number_or(const std::string& key, double dflt) {
    const ConfigEntry* e = get(key);
    return e ? number(*e) : dflt;
  }
  std::optional<double> number_opt(const std::string& key) {
    const ConfigEntry* e = get(key);
    return e ? std::optional<double>(number(*e)) : std::nullopt;
  }
  int integer_or(const std::string& key, int dflt) {
    const ConfigEntry* e = get(key);
    if (!e) return dflt;
    const double v = number(*e);
    if (v != std::floor(v) || std::abs(v) > 1e9) throw ConfigError("expected an integer", e->line, e->key);
    return int(v);
  }
  bool boolean_or(const std::string& key, bool dflt) {
    const ConfigEntry* e = get(key);
    if (!e) return dflt;
    if (e->value == "true" || e->value == "1" || e->value == "yes") return true;
    if (e->value == "false" || e->value == "0" || e->value == "no") return false;
    throw ConfigError("expected a boolean", e->line, e->key);
  }
  std::string string_or(const std::string& key, const std::string& dflt) {
    const ConfigEntry* e = get(key);
    return e ? e->value : dflt;
  }

  /// Keys never consulted are typos; report the first.
  void reject_unknown() const {
    for (const auto& e : m_.entries()) {
      if (e.key.rfind("sweep.", 0) == 0) continue;
      if (std::find(used_.begin(), used_.end(), e.key) == used_.end()) throw ConfigError("unknown key", e.line, e.key);
    }
  }

  static double parse_number(const std::string& s, const ConfigEntry& e) {
    const char* b = s.c_str();
    char* end = nullptr;
    errno = 0;
    const double v = std::strtod(b, &end);
    if (end == b || *end != '\0' || errno == ERANGE || !std::isfinite(v))
      throw ConfigError("expected a finite number, got '" + s + "'", e.line, e.key);
    return v;
  }

 private:
  const ConfigMap& m_;
  std::vector<std::string> used_;
};

template <class F>
auto guarded(const ConfigEntry* e, const std::string& key, F&& f) {
  try {
    return f();
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& err) {
    throw ConfigError(err.what(), e ? e->line : 0, key);
  }
}

}  // namespace detail

/// Validates and resolves a parsed configuration. Throws ConfigError with the offending line and key.
inline RunConfig build_run_config(const ConfigMap& m) {
  detail::Reader rd(m);
  RunConfig c;

  {
    const ConfigEntry* e = rd.get("warp.preset");
    if (!e) throw ConfigError("required key missing", 0, "warp.preset");
    c.preset = detail::guarded(e, e->key, [&] { return warp_preset_from_string(e->value); });
  }
  c.warp_params.m = rd.number_or("warp.m", c.warp_params.m);
  c.warp_params.h_anchor = rd.number_or("warp.h_anchor", c.warp_params.h_anchor);
  c.warp_params.a = rd.number_or("warp.a", c.warp_params.a);
  c.warp_params.b = rd.number_or("warp.b", c.warp_params.b);
  c.warp_params.k = rd.number_or("warp.k", c.warp_params.k);
  c.warp_params.h0 = rd.number_or("warp.h0", c.warp_params.h0);
  c.warp_params.p = rd.number_or("warp.p", c.warp_params.p);
  const WarpSpec warp = detail::guarded(m.find("warp.preset"), "warp", [&] { return c.warp(); });

  {
    const ConfigEntry* e = rd.get("base.kind");
    if (!e) throw ConfigError("required key missing", 0, "base.kind");
    c.base_kind = detail::guarded(e, e->key, [&] { return base_kind_from_string(e->value); });
  }
  c.resolution = rd.integer_or("base.resolution", default_resolution(c.base_kind));
  c.point_dim = rd.integer_or("base.dim", 2);
  c.point_rho = rd.number_or("base.rho", 1.0);
  if (c.base_kind != BaseKind::point) {
    if (m.has("base.dim")) throw ConfigError("only the point base takes a dimension", m.find("base.dim")->line, "base.dim");
    if (m.has("base.rho")) throw ConfigError("rho is fixed by the base kind", m.find("base.rho")->line, "base.rho");
  }
  const BasePtr base = detail::guarded(m.find("base.kind"), "base", [&] { return c.base(); });
  if (warp.required_ambient_dim() && warp.required_ambient_dim() != base->ambient_dim())
    throw ConfigError("warp preset needs ambient dimension " + std::to_string(warp.required_ambient_dim()), 0, "base");

  c.r0 = rd.number_opt("initial.r0");
  c.h0 = rd.number_opt("initial.h0");
  const ConfigEntry* phi_e = rd.get("initial.phi");
  const int sources = int(c.r0.has_value()) + int(c.h0.has_value()) + int(phi_e != nullptr);
  if (sources != 1) throw ConfigError("give exactly one of initial.r0, initial.h0, initial.phi", 0, "initial");
  if (phi_e) {
    for (const auto& tok : detail::split(phi_e->value, ','))
      c.phi_table.push_back(detail::Reader::parse_number(tok, *phi_e));
    if (c.phi_table.size() != base->size())
      throw ConfigError("initial.phi needs " + std::to_string(base->size()) + " values", phi_e->line, phi_e->key);
  }
  if (const ConfigEntry* e = rd.get("initial.modes")) {
    if (phi_e) throw ConfigError("modes cannot be combined with initial.phi", e->line, e->key);
    if (c.base_kind == BaseKind::point) throw ConfigError("the point base carries no modes", e->line, e->key);
    for (const auto& tok : detail::split(e->value, ',')) {
      const auto parts = detail::split(tok, ':');
      if (parts.size() != 2) throw ConfigError("modes are 'l:amplitude' pairs", e->line, e->key);
      const double l = detail::Reader::parse_number(parts[0], *e);
      if (l != std::floor(l) || l < 0) throw ConfigError("mode index must be a nonnegative integer", e->line, e->key);
      c.modes.emplace_back(int(l), detail::Reader::parse_number(parts[1], *e));
    }
  }

  c.flow.t_end = rd.number_or("flow.t_end", c.flow.t_end);
  c.flow.integrator = detail::guarded(m.find("flow.integrator"), "flow.integrator",
                                      [&] { return integrator_from_string(rd.string_or("flow.integrator", "rk4")); });
  c.flow.safety = rd.number_or("flow.safety", c.flow.safety);
  c.flow.dt_max = rd.number_or("flow.dt_max", c.flow.dt_max);
  c.flow.record_every = rd.number_or("flow.record_every", c.flow.record_every);
  c.flow.snapshot_every = rd.number_or("flow.snapshot_every", c.flow.snapshot_every);
  c.flow.probe_dt = rd.number_or("flow.probe_dt", c.flow.probe_dt);
  c.flow.theta_min = rd.number_or("flow.theta_min", c.flow.theta_min);
  try {
    c.flow.validate();
  } catch (const ArgumentError& err) {
    // messages lead with the offending key
    const std::string what = err.what();
    const std::string key = what.substr(0, what.find(' '));
    const ConfigEntry* e = m.find(key);
    throw ConfigError(what.substr(what.find(' ') + 1), e ? e->line : 0, key);
  }

  if (const ConfigEntry* e = rd.get("checks")) {
    for (const auto& tok : detail::split(e->value, ','))
      c.checks.push_back(detail::guarded(e, e->key, [&] { return check_id_from_string(tok); }));
  }
  c.check.R1 = rd.number_opt("check.R1");
  c.check.R2 = rd.number_opt("check.R2");
  c.check.tol_growth = rd.number_opt("check.tol_growth");
  c.check.C = rd.number_or("check.C", c.check.C);
  c.check.alpha = rd.number_or("check.alpha", c.check.alpha);
  c.check.tol_r = rd.number_or("check.tol_r", c.check.tol_r);
  c.check.obstruction_floor = rd.number_or("check.obstruction_floor", c.check.obstruction_floor);
  c.check.residual_abs = rd.number_or("check.residual_abs", c.check.residual_abs);
  c.check.residual_ratio = rd.number_or("check.residual_ratio", c.check.residual_ratio);
  if (const ConfigEntry* e = rd.get("check.mode"))
    c.mode = detail::guarded(e, e->key, [&] { return asymptotic_mode_from_string(e->value); });
  if (const ConfigEntry* e = rd.get("check.identities")) {
    c.identities.clear();
    for (const auto& tok : detail::split(e->value, ','))
      c.identities.push_back(detail::guarded(e, e->key, [&] { return identity_from_string(tok); }));
  }
  c.refine = rd.boolean_or("check.refine", true);
  c.output_dir = rd.string_or("output_dir", c.output_dir);

  for (const auto& e : m.entries()) {
    if (e.key.rfind("sweep.", 0) != 0) continue;
    const std::string target = e.key.substr(6);
    if (target.rfind("sweep.", 0) == 0 || target == "output_dir") throw ConfigError("key cannot be swept", e.line, e.key);
    auto values = detail::split(e.value, ',');
    if (std::any_of(values.begin(), values.end(), [](const std::string& v) { return v.empty(); }))
      throw ConfigError("empty sweep value", e.line, e.key);
    c.sweep.emplace_back(target, std::move(values));
  }
  rd.reject_unknown();
  return c;
}

inline RunConfig load_run_config(const std::string& path) { return build_run_config(load_config_file(path)); }

/// Initial graph: r = r0 + sum a_l cos(l theta); on torus2 the mode is a_l (cos l x + cos l y) / 2.
inline GraphState initial_state(const RunConfig& c) {
  const BasePtr base = c.base();
  const WarpSpec warp = c.warp();
  if (!c.phi_table.empty()) return GraphState{base, warp, c.phi_table, 0.0};
  const double r0 = c.r0 ? *c.r0 : warp.r_of_h(*c.h0);
  ScalarField r(base->size(), r0);
  for (std::size_t j = 0; j < r.size(); ++j) {
    const Vec2 x = base->coord(j);
    for (const auto& [l, a] : c.modes) {
      if (base->kind() == BaseKind::torus2)
        r[j] += a * 0.5 * (std::cos(l * x[0]) + std::cos(l * x[1]));
      else if (base->kind() == BaseKind::axisphere && l == 1)
        r[j] += a * base->cos_theta(j);
      else
        r[j] += a * std::cos(l * x[0]);
    }
  }
  const Interval dom = warp.r_domain();
  for (std::size_t j = 0; j < r.size(); ++j)
    if (!dom.contains_open(r[j])) throw ConfigError("initial radius outside the warp domain at node " + std::to_string(j), 0, "initial");
  return state_from_radius(base, warp, r, 0.0);
}

/// Cartesian product of the sweep axes, first axis slowest. Each element is a full configuration.
inline std::vector<ConfigMap> expand_sweep(const ConfigMap& m) {
  const RunConfig c = build_run_config(m);
  ConfigMap base = m;
  base.erase_prefix("sweep.");
  std::vector<ConfigMap> out{base};
  for (const auto& [key, values] : c.sweep) {
    std::vector<ConfigMap> next;
    for (const auto& cfg : out)
      for (const auto& v : values) {
        ConfigMap x = cfg;
        x.set(key, v);
        next.push_back(std::move(x));
      }
    out = std::move(next);
  }
  for (const auto& x : out) build_run_config(x);
  return out;
}

}  // namespace imcf
