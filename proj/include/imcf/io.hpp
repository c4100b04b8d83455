#pragma once
// Run directories: trace.csv, snapshots/*.csv, meta.json, report.json.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "imcf/config.hpp"
#include "imcf/flow.hpp"

namespace imcf {

inline constexpr const char* kVersion = "1.0.0";

namespace fs = std::filesystem;

inline std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline const std::vector<std::string>& trace_columns() {
  static const std::vector<std::string> cols{"t",         "dt",           "min_H",        "max_H",
                                             "min_omega", "max_omega",    "max_grad_phi", "max_hess_phi",
                                             "max_A",     "osc_rescaled_h", "min_h",      "max_h",
                                             "min_Hh",    "max_Hh"};
  return cols;
}

namespace detail {

inline std::vector<double*> row_fields(DiagnosticsRow& r) {
  return {&r.t,     &r.dt,    &r.min_H,        &r.max_H,        &r.min_omega,      &r.max_omega, &r.max_grad_phi,
          &r.max_hess_phi, &r.max_A, &r.osc_rescaled_h, &r.min_h, &r.max_h, &r.min_Hh, &r.max_Hh};
}

inline void write_text(const fs::path& p, const std::string& s) {
  std::ofstream f(p, std::ios::binary);
  if (!f) throw Error("cannot write " + p.string());
  f << s;
}

inline std::string read_text(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  if (!f) throw ConfigError("cannot read " + p.string());
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

inline double parse_cell(const std::string& s, const fs::path& p, int line) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str() || *end != '\0') throw ConfigError("bad number '" + s + "' in " + p.string(), line);
  return v;
}

}  // namespace detail

inline std::string trace_csv(const std::vector<DiagnosticsRow>& rows) {
  std::string out;
  const auto& cols = trace_columns();
  for (std::size_t i = 0; i < cols.size(); ++i) out += (i ? "," : "") + cols[i];
  out += "\n";
  for (DiagnosticsRow r : rows) {
    const auto f = detail::row_fields(r);
    for (std::size_t i = 0; i < f.size(); ++i) out += (i ? "," : "") + fmt17(*f[i]);
    out += "\n";
  }
  return out;
}

inline std::vector<DiagnosticsRow> read_trace_csv(const fs::path& p) {
  std::istringstream in(detail::read_text(p));
  std::string line;
  std::getline(in, line);
  if (detail::split(line, ',') != trace_columns()) throw ConfigError("unexpected trace.csv header in " + p.string(), 1);
  std::vector<DiagnosticsRow> rows;
  int ln = 1;
  while (std::getline(in, line)) {
    ++ln;
    if (line.empty()) continue;
    const auto cells = detail::split(line, ',');
    DiagnosticsRow r;
    auto f = detail::row_fields(r);
    if (cells.size() != f.size()) throw ConfigError("wrong column count in " + p.string(), ln);
    for (std::size_t i = 0; i < f.size(); ++i) *f[i] = detail::parse_cell(cells[i], p, ln);
    rows.push_back(r);
  }
  return rows;
}

/// node, x1, x2, r, phi, Theta, H, omega
inline std::string snapshot_csv(const Snapshot& s) {
  std::string out = "node,x1,x2,r,phi,Theta,H,omega\n";
  const auto& g = s.geometry;
  for (std::size_t j = 0; j < g.size(); ++j) {
    const Vec2 x = s.state.base->coord(j);
    out += std::to_string(j) + "," + fmt17(x[0]) + "," + fmt17(x[1]) + "," + fmt17(g.r[j]) + "," + fmt17(s.state.phi[j]) +
           "," + fmt17(g.theta[j]) + "," + fmt17(g.H[j]) + "," + fmt17(g.omega[j]) + "\n";
  }
  return out;
}

inline ScalarField read_snapshot_phi(const fs::path& p, std::size_t n) {
  std::istringstream in(detail::read_text(p));
  std::string line;
  std::getline(in, line);
  const auto head = detail::split(line, ',');
  if (head.size() < 5 || head[4] != "phi") throw ConfigError("unexpected snapshot header in " + p.string(), 1);
  ScalarField phi;
  int ln = 1;
  while (std::getline(in, line)) {
    ++ln;
    if (line.empty()) continue;
    const auto cells = detail::split(line, ',');
    if (cells.size() != head.size()) throw ConfigError("wrong column count in " + p.string(), ln);
    phi.push_back(detail::parse_cell(cells[4], p, ln));
  }
  if (phi.size() != n) throw ConfigError("snapshot " + p.string() + " does not match the base size");
  return phi;
}

inline std::string snapshot_name(std::size_t index, double t) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "t=%.10f_%04zu.csv", t, index);
  return buf;
}

inline json terminal_json(const FlowTrace& tr) {
  if (!tr.event) return {{"status", "completed"}, {"t", tr.t_final()}};
  return {{"status", "event"},
          {"kind", to_string(tr.event->kind)},
          {"t", tr.event->t},
          {"node", tr.event->node},
          {"value", std::isfinite(tr.event->value) ? json(tr.event->value) : json(nullptr)}};
}

inline json meta_json(const FlowTrace& tr, const ConfigMap& cfg, const std::vector<std::string>& snapshot_files) {
  json config = json::object();
  for (const auto& e : cfg.entries()) config[e.key] = e.value;
  json snaps = json::array();
  for (std::size_t i = 0; i < tr.snapshots.size(); ++i)
    snaps.push_back({{"t", tr.snapshots[i].t}, {"file", "snapshots/" + snapshot_files[i]}});
  return {{"config", config},
          {"versions", {{"imcf", kVersion}, {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                                                                 std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                                                                 std::to_string(NLOHMANN_JSON_VERSION_PATCH)}}},
          {"base", {{"kind", tr.base->name()}, {"resolution", tr.base->resolution()}, {"dim", tr.base->dim()}}},
          {"warp", tr.warp.name()},
          {"terminal", terminal_json(tr)},
          {"snapshots", snaps}};
}

/// Writes trace.csv, snapshots/ and meta.json into `dir` (created if needed).
inline void write_run_dir(const fs::path& dir, const FlowTrace& tr, const ConfigMap& cfg) {
  fs::create_directories(dir / "snapshots");
  for (const auto& old : fs::directory_iterator(dir / "snapshots")) fs::remove(old.path());
  detail::write_text(dir / "trace.csv", trace_csv(tr.rows));
  std::vector<std::string> names;
  for (std::size_t i = 0; i < tr.snapshots.size(); ++i) {
    names.push_back(snapshot_name(i, tr.snapshots[i].t));
    detail::write_text(dir / "snapshots" / names.back(), snapshot_csv(tr.snapshots[i]));
  }
  detail::write_text(dir / "meta.json", meta_json(tr, cfg, names).dump(2) + "\n");
}

struct LoadedRun {
  ConfigMap config_map;
  RunConfig config;
  FlowTrace trace;
};

/// Rebuilds a trace from a run directory; snapshot geometry is recomputed from the stored phi.
inline LoadedRun load_run_dir(const fs::path& dir) {
  if (!fs::exists(dir / "meta.json") || !fs::exists(dir / "trace.csv"))
    throw ConfigError("no run found in '" + dir.string() + "' (need meta.json and trace.csv)");
  json meta;
  try {
    meta = json::parse(detail::read_text(dir / "meta.json"));
  } catch (const json::exception& e) {
    throw ConfigError(std::string("meta.json: ") + e.what());
  }
  LoadedRun out;
  for (const auto& [k, v] : meta.at("config").items()) out.config_map.set(k, v.get<std::string>());
  out.config = build_run_config(out.config_map);
  FlowTrace& tr = out.trace;
  tr.base = out.config.base();
  tr.warp = out.config.warp();
  tr.config = out.config.flow;
  tr.rows = read_trace_csv(dir / "trace.csv");
  for (const auto& s : meta.at("snapshots")) {
    const double t = s.at("t").get<double>();
    GraphState st{tr.base, tr.warp, read_snapshot_phi(dir / s.at("file").get<std::string>(), tr.base->size()), t};
    GeometrySnapshot g = snapshot(st);
    tr.snapshots.push_back({t, std::move(st), std::move(g)});
  }
  const json& term = meta.at("terminal");
  if (term.at("status") == "event") {
    FlowEvent e;
    e.kind = event_kind_from_string(term.at("kind").get<std::string>());
    e.t = term.at("t").get<double>();
    e.node = term.at("node").get<std::size_t>();
    e.value = term.at("value").is_null() ? std::numeric_limits<double>::quiet_NaN() : term.at("value").get<double>();
    tr.event = e;
  }
  return out;
}

}  // namespace imcf
