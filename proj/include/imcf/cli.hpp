#pragma once
// Subcommands run, check, sweep, presets and fixture seeding.

#include <algorithm>
#include <atomic>
#include <iostream>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "imcf/config.hpp"
#include "imcf/io.hpp"
#include "imcf/verify.hpp"

namespace imcf::cli {

enum ExitCode : int { kOk = 0, kCheckFailed = 1, kFlowEvent = 2, kConfigError = 3 };

inline std::vector<CheckReport> run_checks(const RunConfig& c, const FlowTrace& tr, const FlowTrace* refined) {
  std::vector<CheckReport> out;
  if (tr.rows.empty()) return out;
  for (CheckId id : c.checks) {
    switch (id) {
      case CheckId::growth_and_support: out.push_back(check_growth_and_support(tr, c.check)); break;
      case CheckId::H_floor: out.push_back(check_H_floor(tr, c.check)); break;
      case CheckId::asymptotics: out.push_back(check_asymptotics(tr, c.mode, c.check)); break;
      case CheckId::evolution_residuals: out.push_back(evolution_residuals(tr, c.identities, refined, c.check)); break;
      case CheckId::A_bounded: out.push_back(check_A_bounded(tr, c.check)); break;
    }
  }
  return out;
}

inline bool any_failed(const std::vector<CheckReport>& reps) {
  return std::any_of(reps.begin(), reps.end(), [](const CheckReport& r) { return r.applicable && !r.pass; });
}

inline json report_json(const FlowTrace& tr, const std::vector<CheckReport>& reps) {
  json checks = json::array();
  for (const auto& r : reps) checks.push_back(to_json(r));
  return {{"terminal", terminal_json(tr)}, {"all_pass", !any_failed(reps)}, {"checks", checks}};
}

/// Doubles the resolution and quarters the probe spacing.
inline ConfigMap refined_config(const ConfigMap& m, const RunConfig& c) {
  ConfigMap r = m;
  r.set("base.resolution", std::to_string(2 * c.resolution));
  r.set("flow.probe_dt", fmt17(c.flow.probe_dt / 4));
  r.erase("checks");
  return r;
}

inline bool wants_refinement(const RunConfig& c) {
  return c.refine && c.has_check(CheckId::evolution_residuals) && c.base_kind != BaseKind::point && c.flow.probe_dt > 0;
}

struct RunOutcome {
  int exit_code = kOk;
  FlowTrace trace;
  std::vector<CheckReport> reports;
};

/// Integrates, writes the run directory and report.json, returns the exit code.
inline RunOutcome execute_run(const ConfigMap& m, const fs::path& out) {
  const RunConfig c = build_run_config(m);
  RunOutcome o;
  o.trace = run(initial_state(c), c.flow);
  write_run_dir(out, o.trace, m);
  std::optional<FlowTrace> refined;
  if (wants_refinement(c)) {
    const ConfigMap rm = refined_config(m, c);
    const RunConfig rc = build_run_config(rm);
    refined = run(initial_state(rc), rc.flow);
    write_run_dir(out / "refined", *refined, rm);
  }
  o.reports = run_checks(c, o.trace, refined ? &*refined : nullptr);
  detail::write_text(out / "report.json", report_json(o.trace, o.reports).dump(2) + "\n");
  o.exit_code = o.trace.event ? kFlowEvent : any_failed(o.reports) ? kCheckFailed : kOk;
  return o;
}

inline int cmd_check(const fs::path& dir, const std::optional<std::string>& config_path, std::ostream& os) {
  LoadedRun lr = load_run_dir(dir);
  if (config_path) {
    const RunConfig override_cfg = load_run_config(*config_path);
    lr.config.checks = override_cfg.checks;
    lr.config.check = override_cfg.check;
    lr.config.mode = override_cfg.mode;
    lr.config.identities = override_cfg.identities;
  }
  std::optional<LoadedRun> refined;
  if (fs::exists(dir / "refined" / "meta.json")) refined = load_run_dir(dir / "refined");
  const auto reps = run_checks(lr.config, lr.trace, refined ? &refined->trace : nullptr);
  detail::write_text(dir / "report.json", report_json(lr.trace, reps).dump(2) + "\n");
  for (const auto& r : reps)
    os << (r.applicable ? (r.pass ? "PASS " : "FAIL ") : "N/A  ") << r.check_id << " margin=" << fmt17(r.margin) << "\n";
  return any_failed(reps) ? kCheckFailed : kOk;
}

inline void print_summary(const RunOutcome& o, const fs::path& out, std::ostream& os) {
  os << "run " << out.string() << ": ";
  if (o.trace.event)
    os << "event " << to_string(o.trace.event->kind) << " at t=" << fmt17(o.trace.event->t) << " node " << o.trace.event->node;
  else
    os << "completed t=" << fmt17(o.trace.t_final());
  os << ", " << o.trace.rows.size() << " rows, " << o.trace.snapshots.size() << " snapshots\n";
  for (const auto& r : o.reports)
    os << "  " << (r.applicable ? (r.pass ? "PASS " : "FAIL ") : "N/A  ") << r.check_id << " margin=" << fmt17(r.margin)
       << "\n";
}

inline int cmd_sweep(const ConfigMap& m, const fs::path& out, int jobs, std::ostream& os) {
  const RunConfig base_cfg = build_run_config(m);
  const auto runs = expand_sweep(m);
  std::vector<int> codes(runs.size(), kOk);
  std::vector<std::string> lines(runs.size());
  std::atomic<std::size_t> next{0};
  std::mutex err_mu;
  std::string first_error;
  auto worker = [&] {
    for (std::size_t i = next++; i < runs.size(); i = next++) {
      char name[32];
      std::snprintf(name, sizeof name, "run_%04zu", i);
      try {
        const RunOutcome o = execute_run(runs[i], out / name);
        codes[i] = o.exit_code;
        std::string line = name;
        for (const auto& [key, values] : base_cfg.sweep) line += "," + runs[i].find(key)->value;
        line += "," + std::string(o.trace.event ? "event" : "completed");
        line += "," + std::string(o.trace.event ? to_string(o.trace.event->kind) : "");
        line += "," + fmt17(o.trace.t_final());
        line += "," + std::string(any_failed(o.reports) ? "false" : "true");
        line += "," + std::to_string(o.exit_code);
        lines[i] = line;
      } catch (const std::exception& e) {
        std::lock_guard<std::mutex> lk(err_mu);
        if (first_error.empty()) first_error = std::string(name) + ": " + e.what();
        codes[i] = kConfigError;
        lines[i] = std::string(name) + ",error";
      }
    }
  };
  fs::create_directories(out);
  std::vector<std::thread> pool;
  const int n = std::max(1, std::min<int>(jobs, int(runs.size())));
  for (int k = 0; k < n; ++k) pool.emplace_back(worker);
  for (auto& t : pool) t.join();

  std::string csv = "run";
  for (const auto& [key, values] : base_cfg.sweep) csv += "," + key;
  csv += ",terminal,event_kind,t_final,checks_pass,exit_code\n";
  for (const auto& l : lines) csv += l + "\n";
  detail::write_text(out / "sweep.csv", csv);
  os << "sweep: " << runs.size() << " runs in " << out.string() << "\n";
  if (!first_error.empty()) {
    std::cerr << "error: " << first_error << "\n";
    return kConfigError;
  }
  return *std::max_element(codes.begin(), codes.end());
}

inline void print_presets(std::ostream& os) {
  os << "warp presets (config key warp.preset, parameters warp.<name>):\n"
        "  euclidean       h = r                       domain r > 0        c1_weak; c1_strict fails (h''=0); c5_bounded\n"
        "  hyperbolic      h = sinh r                  domain r > 0        c1_weak, c1_strict; c5_bounded fails (h' unbounded)\n"
        "  schwarzschild3  h' = sqrt(1 - 2m/h)         m > 0, h_anchor > 2m (default 3m), n = 3 only\n"
        "                                              c1_weak, c1_strict (hh''-h'^2+rho = 3m/h for rho=1), c5_bounded\n"
        "  saturating      h' = a - b (1+r)^(-k)       a > b > 0, k > 0, h0 = h(0) >= 0\n"
        "                                              c1_weak, c1_strict where hh''-h'^2+rho >= 0, c5_bounded for alpha <= k\n"
        "  power           h = r^p                     p >= 1\n"
        "                                              c1_weak; c1_strict for p > 1 where hh''-h'^2+rho >= 0; c5_bounded only for p = 1\n"
        "bases (base.kind): point (base.dim, base.rho), circle, axisphere, torus2 (base.resolution)\n";
}

inline ConfigMap fixture(std::initializer_list<std::pair<const char*, std::string>> kv) {
  ConfigMap m;
  for (const auto& [k, v] : kv) m.set(k, v);
  return m;
}

/// Configurations consumed by the acceptance suite, keyed by file stem.
inline std::vector<std::pair<std::string, ConfigMap>> acceptance_fixtures() {
  std::vector<std::pair<std::string, ConfigMap>> out;
  for (const auto& [name, warp] : std::vector<std::pair<std::string, std::vector<std::pair<const char*, std::string>>>>{
           {"euclidean", {{"warp.preset", "euclidean"}}},
           {"hyperbolic", {{"warp.preset", "hyperbolic"}}},
           {"schwarzschild3", {{"warp.preset", "schwarzschild3"}, {"warp.m", "0.5"}}},
           {"saturating", {{"warp.preset", "saturating"}, {"warp.a", "2"}, {"warp.b", "1"}, {"warp.k", "1"}}}}) {
    ConfigMap m;
    for (const auto& [k, v] : warp) m.set(k, v);
    m.set("base.kind", "point");
    m.set("base.dim", "2");
    m.set("initial.h0", "2");
    m.set("flow.t_end", "5");
    m.set("flow.integrator", "rk4");
    m.set("flow.dt_max", "1e-3");
    m.set("flow.record_every", "0.25");
    m.set("flow.snapshot_every", "1");
    m.set("checks", "growth_and_support");
    m.set("check.R1", "2");
    m.set("check.R2", "2");
    m.set("check.tol_growth", "1e-8");
    out.emplace_back("c1_point_" + name, m);
  }
  out.emplace_back("c2_axisphere_growth",
                   fixture({{"warp.preset", "euclidean"}, {"base.kind", "axisphere"}, {"base.resolution", "200"},
                            {"initial.r0", "1"}, {"initial.modes", "1:0.3"}, {"flow.t_end", "6"}, {"flow.dt_max", "1e-2"},
                            {"flow.record_every", "0.1"}, {"flow.snapshot_every", "1"},
                            {"checks", "growth_and_support, A_bounded"}, {"check.R1", "0.7"}, {"check.R2", "1.3"},
                            {"check.tol_growth", "1e-2"}}));
  out.emplace_back("c3_schwarzschild_point",
                   fixture({{"warp.preset", "schwarzschild3"}, {"warp.m", "0.5"}, {"base.kind", "point"},
                            {"base.dim", "2"}, {"base.rho", "1"}, {"initial.h0", "2"}, {"flow.t_end", "3"},
                            {"flow.dt_max", "1e-3"}, {"flow.record_every", "0.1"}, {"checks", "H_floor"}}));
  out.emplace_back("c3_schwarzschild_axisphere",
                   fixture({{"warp.preset", "schwarzschild3"}, {"warp.m", "0.5"}, {"base.kind", "axisphere"},
                            {"base.resolution", "200"}, {"initial.h0", "2"}, {"initial.modes", "1:0.1"},
                            {"flow.t_end", "3"}, {"flow.dt_max", "1e-2"}, {"flow.record_every", "0.1"},
                            {"checks", "H_floor"}}));
  for (const auto& [name, preset] : std::vector<std::pair<std::string, std::vector<std::pair<const char*, std::string>>>>{
           {"euclidean", {{"warp.preset", "euclidean"}}},
           {"saturating", {{"warp.preset", "saturating"}, {"warp.a", "2"}, {"warp.b", "1"}, {"warp.k", "1"}}}}) {
    ConfigMap m;
    for (const auto& [k, v] : preset) m.set(k, v);
    for (const auto& [k, v] : std::vector<std::pair<const char*, std::string>>{
             {"base.kind", "axisphere"}, {"base.resolution", "200"}, {"initial.r0", "1"}, {"initial.modes", "1:0.3"},
             {"flow.t_end", "8"}, {"flow.dt_max", "1e-2"}, {"flow.record_every", "0.1"}, {"flow.snapshot_every", "0.5"},
             {"checks", "asymptotics"}, {"check.mode", "expect_roundness"}, {"check.tol_r", "1e-3"}})
      m.set(k, v);
    out.emplace_back("c4_roundness_" + name, m);
  }
  out.emplace_back("c5_obstruction_hyperbolic",
                   fixture({{"warp.preset", "hyperbolic"}, {"base.kind", "axisphere"}, {"base.resolution", "200"},
                            {"initial.r0", "2"}, {"initial.modes", "1:0.3"}, {"flow.t_end", "8"}, {"flow.dt_max", "1e-2"},
                            {"flow.record_every", "0.1"}, {"flow.snapshot_every", "1"}, {"checks", "asymptotics"},
                            {"check.mode", "expect_obstruction"}, {"check.obstruction_floor", "1e-2"}}));
  out.emplace_back("c5_contrast_euclidean",
                   fixture({{"warp.preset", "euclidean"}, {"base.kind", "axisphere"}, {"base.resolution", "200"},
                            {"initial.r0", "2"}, {"initial.modes", "1:0.3"}, {"flow.t_end", "8"}, {"flow.dt_max", "1e-2"},
                            {"flow.record_every", "0.1"}, {"flow.snapshot_every", "0.5"}, {"checks", "asymptotics"},
                            {"check.mode", "expect_roundness"}, {"check.tol_r", "1e-3"}}));
  out.emplace_back("c7_residuals_axisphere",
                   fixture({{"warp.preset", "euclidean"}, {"base.kind", "axisphere"}, {"base.resolution", "200"},
                            {"initial.r0", "1"}, {"initial.modes", "1:0.3"}, {"flow.t_end", "1"}, {"flow.dt_max", "1e-2"},
                            {"flow.record_every", "0.1"}, {"flow.snapshot_every", "0.5"}, {"flow.probe_dt", "1e-3"},
                            {"checks", "evolution_residuals"}, {"check.identities", "omega_eq, tw_eq"}}));
  out.emplace_back("c7_residuals_point",
                   fixture({{"warp.preset", "hyperbolic"}, {"base.kind", "point"}, {"base.dim", "2"},
                            {"initial.h0", "1"}, {"flow.t_end", "1"}, {"flow.dt_max", "1e-3"},
                            {"flow.record_every", "0.1"}, {"flow.snapshot_every", "0.5"}, {"flow.probe_dt", "1e-3"},
                            {"checks", "evolution_residuals"}, {"check.identities", "omega_eq, tw_eq"}}));
  out.emplace_back("c9_determinism",
                   fixture({{"warp.preset", "schwarzschild3"}, {"warp.m", "0.5"}, {"base.kind", "axisphere"},
                            {"base.resolution", "48"}, {"initial.h0", "2"}, {"initial.modes", "1:0.1, 2:0.05"},
                            {"flow.t_end", "1"}, {"flow.dt_max", "1e-2"}, {"flow.record_every", "0.1"},
                            {"flow.snapshot_every", "0.5"}, {"flow.probe_dt", "1e-3"},
                            {"checks", "growth_and_support, H_floor, evolution_residuals, A_bounded"}}));
  return out;
}

inline int seed_fixtures(const fs::path& dir, std::ostream& os) {
  fs::create_directories(dir);
  for (const auto& [name, m] : acceptance_fixtures()) {
    detail::write_text(dir / (name + ".cfg"), m.to_text());
    os << "wrote " << (dir / (name + ".cfg")).string() << "\n";
  }
  return kOk;
}

/// Entry point shared by the executable and the tests.
inline int main(int argc, char** argv, std::ostream& os = std::cout, std::ostream& es = std::cerr) {
  CLI::App app{"Inverse mean curvature flow of starshaped graphs in warped products"};
  app.set_version_flag("--version", kVersion);
  bool seed = false;
  std::string seed_dir = "tests/fixtures";
  app.add_flag("--seed-fixtures", seed, "Regenerate the acceptance fixture configs");
  app.add_option("--fixtures-dir", seed_dir, "Target directory for --seed-fixtures");
  app.require_subcommand(0, 1);

  std::string config, out;
  int jobs = int(std::max(1u, std::thread::hardware_concurrency()));

  auto* run_cmd = app.add_subcommand("run", "Integrate one configuration and run its checks");
  run_cmd->add_option("--config", config, "Config file")->required();
  run_cmd->add_option("--out", out, "Output directory (overrides output_dir)");

  auto* check_cmd = app.add_subcommand("check", "Re-run checks on an existing run directory");
  check_cmd->add_option("--out", out, "Run directory")->required();
  auto* check_cfg = check_cmd->add_option("--config", config, "Config whose checks replace the stored ones");

  auto* sweep_cmd = app.add_subcommand("sweep", "Expand sweep.<key> axes into concurrent runs");
  sweep_cmd->add_option("--config", config, "Config file")->required();
  sweep_cmd->add_option("--out", out, "Output directory (overrides output_dir)");
  sweep_cmd->add_option("--jobs", jobs, "Concurrent runs")->check(CLI::PositiveNumber);

  auto* presets_cmd = app.add_subcommand("presets", "List warp presets and bases");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e, os, es);
    return rc == 0 ? kOk : kConfigError;
  }

  try {
    if (seed) return seed_fixtures(seed_dir, os);
    if (*presets_cmd) {
      print_presets(os);
      return kOk;
    }
    if (*run_cmd) {
      const ConfigMap m = load_config_file(config);
      const RunConfig c = build_run_config(m);
      const fs::path dir = out.empty() ? fs::path(c.output_dir) : fs::path(out);
      const RunOutcome o = execute_run(m, dir);
      print_summary(o, dir, os);
      return o.exit_code;
    }
    if (*check_cmd) return cmd_check(out, *check_cfg ? std::optional<std::string>(config) : std::nullopt, os);
    if (*sweep_cmd) {
      const ConfigMap m = load_config_file(config);
      const RunConfig c = build_run_config(m);
      return cmd_sweep(m, out.empty() ? fs::path(c.output_dir) : fs::path(out), jobs, os);
    }
    es << app.help();
    return kConfigError;
  } catch (const ConfigError& e) {
    es << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const Error& e) {
    es << "error: " << e.what() << "\n";
    return kConfigError;
  }
}

}  // namespace imcf::cli
