#pragma once
// Explicit time integration of d phi / dt = 1 / F with a parabolic step restriction.

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "imcf/errors.hpp"
#include "imcf/geometry.hpp"

namespace imcf {

enum class Integrator { euler, rk4 };

inline std::string to_string(Integrator i) { return i == Integrator::euler ? "euler" : "rk4"; }
inline Integrator integrator_from_string(const std::string& s) {
  if (s == "euler") return Integrator::euler;
  if (s == "rk4") return Integrator::rk4;
  throw ArgumentError("unknown integrator '" + s + "'");
}

struct FlowConfig {
  double t_end = 1.0;
  Integrator integrator = Integrator::rk4;
  double safety = 0.25;
  double dt_max = 1e-2;
  double record_every = 0.05;   // diagnostics cadence
  double snapshot_every = 1.0;  // 0 disables periodic snapshots
  double probe_dt = 0.0;        // > 0 adds snapshots at T +- probe_dt, T +- 2 probe_dt around each snapshot time
  double theta_min = 1e-3;

  void validate() const {
    if (!(t_end > 0)) throw ArgumentError("flow.t_end must be positive");
    if (!(safety > 0 && safety <= 1)) throw ArgumentError("flow.safety must lie in (0, 1]");
    if (!(dt_max > 0)) throw ArgumentError("flow.dt_max must be positive");
    if (!(record_every > 0)) throw ArgumentError("flow.record_every must be positive");
    if (!(snapshot_every >= 0)) throw ArgumentError("flow.snapshot_every must be nonnegative");
    if (!(probe_dt >= 0)) throw ArgumentError("flow.probe_dt must be nonnegative");
    if (probe_dt > 0 && !(snapshot_every > 4 * probe_dt)) throw ArgumentError("flow.probe_dt too large for snapshot_every");
    if (!(theta_min > 0 && theta_min < 1)) throw ArgumentError("flow.theta_min must lie in (0, 1)");
  }
};

enum class EventKind { loss_of_mean_convexity, angle_degeneracy, numeric, domain };

inline std::string to_string(EventKind k) {
  switch (k) {
    case EventKind::loss_of_mean_convexity: return "loss_of_mean_convexity";
    case EventKind::angle_degeneracy: return "angle_degeneracy";
    case EventKind::numeric: return "numeric";
    case EventKind::domain: return "domain";
  }
  return "?";
}
inline EventKind event_kind_from_string(const std::string& s) {
  for (auto k : {EventKind::loss_of_mean_convexity, EventKind::angle_degeneracy, EventKind::numeric, EventKind::domain})
    if (to_string(k) == s) return k;
  throw ArgumentError("unknown event kind '" + s + "'");
}

struct FlowEvent {
  EventKind kind = EventKind::numeric;
  double t = 0;
  std::size_t node = 0;
  double value = 0;  // min F, min Theta, or the offending phi
};

/// One row of trace.csv.
struct DiagnosticsRow {
  double t = 0, dt = 0;
  double min_H = 0, max_H = 0;
  double min_omega = 0, max_omega = 0;
  double max_grad_phi = 0, max_hess_phi = 0;
  double max_A = 0;
  double osc_rescaled_h = 0;
  double min_h = 0, max_h = 0;
  double min_Hh = 0, max_Hh = 0;
};

struct Snapshot {
  double t = 0;
  GraphState state;
  GeometrySnapshot geometry;
};

struct FlowTrace {
  BasePtr base;
  WarpSpec warp = WarpSpec::euclidean();
  FlowConfig config;
  std::vector<DiagnosticsRow> rows;
  std::vector<Snapshot> snapshots;
  std::optional<FlowEvent> event;

  bool completed() const { return !event.has_value(); }
  double t_final() const { return rows.empty() ? 0.0 : rows.back().t; }
  std::vector<double> times() const {
    std::vector<double> t;
    t.reserve(rows.size());
    for (const auto& r : rows) t.push_back(r.t);
    return t;
  }
};

inline DiagnosticsRow diagnostics(const GraphState& s, const GeometrySnapshot& g, double dt) {
  DiagnosticsRow d;
  d.t = s.t;
  d.dt = dt;
  const std::size_t n = g.size();
  const double inf = std::numeric_limits<double>::infinity();
  d.min_H = d.min_omega = d.min_h = d.min_Hh = inf;
  d.max_H = d.max_omega = d.max_h = d.max_Hh = -inf;
  for (std::size_t j = 0; j < n; ++j) {
    d.min_H = std::min(d.min_H, g.H[j]);
    d.max_H = std::max(d.max_H, g.H[j]);
    d.min_omega = std::min(d.min_omega, g.omega[j]);
    d.max_omega = std::max(d.max_omega, g.omega[j]);
    d.min_h = std::min(d.min_h, g.h[j]);
    d.max_h = std::max(d.max_h, g.h[j]);
    const double Hh = g.H[j] * g.h[j];
    d.min_Hh = std::min(d.min_Hh, Hh);
    d.max_Hh = std::max(d.max_Hh, Hh);
    d.max_grad_phi = std::max(d.max_grad_phi, std::sqrt(g.grad2[j]));
    const Sym2& T = g.dphi.hess[j];
    d.max_hess_phi = std::max({d.max_hess_phi, std::abs(T.xx), std::abs(T.xy), std::abs(T.yy)});
    d.max_A = std::max(d.max_A, std::sqrt(g.A2[j]));
  }
  const double scale = std::exp(-s.t / double(s.base->dim()));
  d.osc_rescaled_h = (d.max_h - d.min_h) * scale;
  return d;
}

namespace detail {

struct SpeedEval {
  ScalarField speed;       // 1 / F
  double min_F = 0;
  std::size_t min_F_node = 0;
  double min_theta = 1;
  std::size_t min_theta_node = 0;
  double max_coeff = 0;  // largest eigenvalue of Theta^2 sigma_tilde / F^2
};

inline SpeedEval evaluate_speed(const GraphState& s) {
  const BaseManifold& base = *s.base;
  base.require_shape(s.phi);
  const std::size_t n = s.size();
  const auto ws = warp_samples(s);
  const Derivatives d = base.covariant_derivatives(s.phi);
  SpeedEval e;
  e.speed.resize(n);
  e.min_F = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < n; ++j) {
    const NodeGeometry q = node_geometry(ws[j], d.grad[j], d.hess[j], base.sigma_inv(j), base.frame_dims(),
                                         base.extra_dims(), base.ricci_coefficient());
    if (!std::isfinite(q.F)) throw StateError("non-finite speed", j);
    if (q.F < e.min_F) {
      e.min_F = q.F;
      e.min_F_node = j;
    }
    if (q.theta < e.min_theta) {
      e.min_theta = q.theta;
      e.min_theta_node = j;
    }
    e.speed[j] = 1.0 / q.F;
    // sigma_tilde has eigenvalues 1 and Theta^2 relative to sigma
    const double th2 = q.theta * q.theta;
    const double top = base.dim() >= 2 ? 1.0 : th2;
    e.max_coeff = std::max(e.max_coeff, th2 * top / (q.F * q.F));
  }
  return e;
}

}  // namespace detail

/// Right-hand side 1/F of the potential equation. Throws MeanConvexityLoss when min F <= 0.
inline ScalarField rhs(const GraphState& s) {
  detail::SpeedEval e = detail::evaluate_speed(s);
  if (!(e.min_F > 0)) throw MeanConvexityLoss(e.min_F_node, e.min_F);
  return std::move(e.speed);
}

inline double stable_dt_from_coeff(const BaseManifold& base, const FlowConfig& cfg, double max_coeff) {
  if (base.kind() == BaseKind::point || !(max_coeff > 0)) return cfg.dt_max;
  const double dx = base.spacing();
  return std::min(cfg.dt_max, cfg.safety * dx * dx / (2.0 * base.dim() * max_coeff));
}

/// Parabolic step: safety * dx^2 / (2 d max eig(Theta^2 sigma_tilde / F^2)), capped by dt_max.
inline double stable_dt(const GraphState& s, const FlowConfig& cfg) {
  const detail::SpeedEval e = detail::evaluate_speed(s);
  if (!(e.min_F > 0)) throw MeanConvexityLoss(e.min_F_node, e.min_F);
  return stable_dt_from_coeff(*s.base, cfg, e.max_coeff);
}

namespace detail {

// Sorted times the integrator must land on exactly, tagged by what happens there.
struct Landing {
  double t;
  bool record;
  bool snapshot;
};

inline std::vector<Landing> landing_schedule(const FlowConfig& c) {
  std::vector<Landing> out;
  const double tol = 1e-12 * std::max(1.0, c.t_end);
  auto add = [&](double t, bool rec, bool snap) {
    if (t <= 0 || t > c.t_end + tol) return;
    out.push_back({std::min(t, c.t_end), rec, snap});
  };
  const auto n_rec = std::size_t(std::floor(c.t_end / c.record_every + 1e-9));
  for (std::size_t k = 1; k <= n_rec; ++k) add(double(k) * c.record_every, true, false);
  add(c.t_end, true, c.snapshot_every > 0);
  if (c.snapshot_every > 0) {
    const auto n_snap = std::size_t(std::floor(c.t_end / c.snapshot_every + 1e-9));
    for (std::size_t k = 0; k <= n_snap; ++k) {
      const double T = double(k) * c.snapshot_every;
      add(T, false, true);
      if (c.probe_dt > 0)
        for (int o : {-2, -1, 1, 2}) add(T + o * c.probe_dt, false, true);
    }
  }
  std::sort(out.begin(), out.end(), [](const Landing& a, const Landing& b) { return a.t < b.t; });
  std::vector<Landing> merged;
  for (const auto& l : out) {
    if (!merged.empty() && std::abs(merged.back().t - l.t) <= tol) {
      merged.back().record |= l.record;
      merged.back().snapshot |= l.snapshot;
    } else {
      merged.push_back(l);
    }
  }
  return merged;
}

}  // namespace detail

/// Integrates from `initial` to config.t_end or to the first event.
inline FlowTrace run(const GraphState& initial, const FlowConfig& cfg) {
  cfg.validate();
  if (!initial.base) throw ArgumentError("initial state has no base");
  initial.base->require_shape(initial.phi);

  FlowTrace trace;
  trace.base = initial.base;
  trace.warp = initial.warp;
  trace.config = cfg;

  GraphState state = initial;
  state.t = 0;

  auto record = [&](const GraphState& s, double dt, bool row, bool snap) {
    GeometrySnapshot g = snapshot(s);
    if (row) trace.rows.push_back(diagnostics(s, g, dt));
    if (snap) trace.snapshots.push_back({s.t, s, std::move(g)});
  };

  auto classify = [](const StateError& e) {
    const std::string w = e.what();
    return w.find("warp domain") != std::string::npos ? EventKind::domain : EventKind::numeric;
  };

  // preconditions at t = 0 are reported as events, not thrown
  detail::SpeedEval e0;
  try {
    e0 = detail::evaluate_speed(state);
  } catch (const StateError& e) {
    trace.event = FlowEvent{classify(e), 0.0, e.node(), initial.phi[e.node()]};
    return trace;
  }
  record(state, 0.0, true, true);
  if (!(e0.min_F > 0)) {
    trace.event = FlowEvent{EventKind::loss_of_mean_convexity, 0.0, e0.min_F_node, e0.min_F};
    return trace;
  }
  if (e0.min_theta < cfg.theta_min) {
    trace.event = FlowEvent{EventKind::angle_degeneracy, 0.0, e0.min_theta_node, e0.min_theta};
    return trace;
  }

  const auto schedule = detail::landing_schedule(cfg);
  std::size_t next = 0;
  detail::SpeedEval current = std::move(e0);
  const std::size_t n = state.size();
  ScalarField tmp(n);

  auto axpy = [&](const ScalarField& base_phi, double a, const ScalarField& k, ScalarField& out) {
    for (std::size_t j = 0; j < n; ++j) out[j] = base_phi[j] + a * k[j];
  };
  auto stage = [&](const ScalarField& phi, double t) {
    GraphState s{state.base, state.warp, phi, t};
    detail::SpeedEval e = detail::evaluate_speed(s);
    if (!(e.min_F > 0)) throw MeanConvexityLoss(e.min_F_node, e.min_F);
    return std::move(e.speed);
  };

  while (next < schedule.size()) {
    const double target = schedule[next].t;
    double dt = stable_dt_from_coeff(*state.base, cfg, current.max_coeff);
    bool lands = false;
    if (state.t + dt >= target - 1e-12 * std::max(1.0, target)) {
      dt = target - state.t;
      lands = true;
    }
    const double t_new = lands ? target : state.t + dt;

    ScalarField phi_new(n);
    try {
      const ScalarField& k1 = current.speed;
      if (cfg.integrator == Integrator::euler) {
        axpy(state.phi, dt, k1, phi_new);
      } else {
        axpy(state.phi, 0.5 * dt, k1, tmp);
        const ScalarField k2 = stage(tmp, state.t + 0.5 * dt);
        axpy(state.phi, 0.5 * dt, k2, tmp);
        const ScalarField k3 = stage(tmp, state.t + 0.5 * dt);
        axpy(state.phi, dt, k3, tmp);
        const ScalarField k4 = stage(tmp, t_new);
        for (std::size_t j = 0; j < n; ++j)
          phi_new[j] = state.phi[j] + dt / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
      }
      GraphState next_state{state.base, state.warp, phi_new, t_new};
      current = detail::evaluate_speed(next_state);
      if (!(current.min_F > 0)) throw MeanConvexityLoss(current.min_F_node, current.min_F);
      if (current.min_theta < cfg.theta_min) {
        trace.event = FlowEvent{EventKind::angle_degeneracy, t_new, current.min_theta_node, current.min_theta};
      }
      if (trace.event) break;
      state = std::move(next_state);
    } catch (const MeanConvexityLoss& e) {
      trace.event = FlowEvent{EventKind::loss_of_mean_convexity, t_new, e.node(), e.F()};
      break;
    } catch (const StateError& e) {
      trace.event = FlowEvent{classify(e), t_new, e.node(), phi_new.empty() ? 0.0 : phi_new[e.node()]};
      break;
    }

    if (lands) {
      const auto& l = schedule[next];
      record(state, dt, l.record, l.snapshot);
      ++next;
    }
  }

  // keep the last valid state for re-verification of the event
  if (trace.event && (trace.snapshots.empty() || trace.snapshots.back().t != state.t)) record(state, 0.0, false, true);
  return trace;
}

}  // namespace imcf
