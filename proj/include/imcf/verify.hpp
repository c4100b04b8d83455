#pragma once
// Pass/fail checks over a FlowTrace. Every check is a pure function of its inputs.

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "imcf/flow.hpp"

namespace imcf {

using json = nlohmann::json;

struct CheckReport {
  std::string check_id;
  json hypothesis;  // condition flags for the run, see hypothesis_status()
  bool applicable = true;
  bool pass = false;
  double margin = 0;     // worst signed slack
  double tolerance = 0;  // pass <=> margin >= -tolerance
  json details = json::object();
  std::vector<std::string> notes;

  void settle() { pass = applicable && margin >= -tolerance; }
};

inline json to_json(const CheckReport& r) {
  json j;
  j["check_id"] = r.check_id;
  j["hypothesis_status"] = r.hypothesis;
  j["applicable"] = r.applicable;
  j["pass"] = r.pass;
  j["margin"] = std::isfinite(r.margin) ? json(r.margin) : json(nullptr);
  j["tolerance"] = r.tolerance;
  j["details"] = r.details;
  j["notes"] = r.notes;
  return j;
}

inline json to_json(const ConditionReport& c) {
  json w = json::array();
  for (const auto& x : c.witnesses)
    w.push_back({{"flag", x.flag}, {"inequality", x.inequality}, {"r", x.r}, {"value", x.value}});
  return {{"c1_weak", c.c1_weak},
          {"c1_strict", c.c1_strict},
          {"c5_bounded", c.c5_bounded},
          {"interval", {c.interval.lo, c.interval.hi}},
          {"rho", c.rho},
          {"C", c.C},
          {"alpha", c.alpha},
          {"witnesses", w}};
}

/// Parameters shared by the checks; unset radii default to the initial data.
struct CheckParams {
  std::optional<double> R1, R2;
  std::optional<double> tol_growth;
  double C = 10.0;
  double alpha = 1.0;
  double tol_r = 1e-3;
  double obstruction_floor = 1e-2;
  double residual_abs = 1e-10;
  double residual_ratio = 2.0;
};

namespace detail {

inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

inline double time_tol(double t) { return 1e-12 * std::max(1.0, std::abs(t)); }

inline double horizon(const FlowTrace& tr) { return tr.rows.empty() ? 0.0 : tr.rows.back().t; }

inline std::vector<std::string> dimension_notes(const BaseManifold& b) {
  if (b.ambient_dim() < 3) return {"circle base: ambient dimension n = 2 lies outside the range n >= 3"};
  return {};
}

}  // namespace detail

/// R1 = min omega(0) and R2 = max h(0) unless overridden.
inline std::pair<double, double> resolve_radii(const FlowTrace& tr, const CheckParams& p) {
  if (tr.rows.empty()) throw ArgumentError("trace has no diagnostics rows");
  const auto& r0 = tr.rows.front();
  return {p.R1.value_or(r0.min_omega), p.R2.value_or(r0.max_h)};
}

/// Radial interval swept by a run that starts in h in [R1, R2] and grows no faster than e^(t/d).
inline Interval sweep_interval(const WarpSpec& w, int d, double R1, double R2, double T) {
  const double lo = w.r_of_h(R1);
  double hi = w.r_of_h(R2 * std::exp(std::max(T, 1e-9) / d));
  if (!(hi > lo)) hi = std::nextafter(lo, detail::kInf);
  return {lo, hi};
}

inline ConditionReport hypothesis_status(const FlowTrace& tr, const CheckParams& p) {
  const auto [R1, R2] = resolve_radii(tr, p);
  const Interval iv = sweep_interval(tr.warp, tr.base->dim(), R1, R2, detail::horizon(tr));
  return check_conditions(tr.warp, iv, tr.base->rho(), p.C, p.alpha);
}

// ---------------------------------------------------------------------------

inline CheckReport check_growth_and_support(const FlowTrace& tr, const CheckParams& p) {
  CheckReport rep;
  rep.check_id = "growth_and_support";
  const auto [R1, R2] = resolve_radii(tr, p);
  const ConditionReport cond = hypothesis_status(tr, p);
  rep.hypothesis = to_json(cond);
  rep.notes = detail::dimension_notes(*tr.base);
  rep.tolerance = p.tol_growth.value_or(tr.base->kind() == BaseKind::point ? 1e-8 : 1e-2);
  const double d = tr.base->dim();
  const auto& first = tr.rows.front();

  bool omega_lower = cond.c1_strict;
  if (!cond.c1_strict) rep.notes.push_back("omega lower bound not asserted: c1_strict fails");
  if (omega_lower && R1 > first.min_omega * (1 + 1e-12)) {
    omega_lower = false;
    rep.notes.push_back("omega lower bound not asserted: R1 exceeds min omega(0)");
  }
  if (R1 > first.min_h * (1 + 1e-12) || R2 < first.max_h * (1 - 1e-12))
    rep.notes.push_back("initial heights not contained in [R1, R2]");
  if (tr.event) rep.notes.push_back("trace ends at a flow event; bounds asserted up to t = " + std::to_string(tr.event->t));

  double worst = detail::kInf;
  json w;
  auto see = [&](double slack, const char* which, const DiagnosticsRow& row, double value, double bound) {
    if (slack < worst) {
      worst = slack;
      w = {{"bound", which}, {"t", row.t}, {"value", value}, {"bound_value", bound}};
    }
  };
  for (const auto& row : tr.rows) {
    const double g = std::exp(row.t / d);
    const double lo = R1 * g, hi = R2 * g;
    see((row.min_h - lo) / lo, "h >= R1 e^(t/d)", row, row.min_h, lo);
    see((hi - row.max_h) / hi, "h <= R2 e^(t/d)", row, row.max_h, hi);
    see((hi - row.max_omega) / hi, "omega <= R2 e^(t/d)", row, row.max_omega, hi);
    if (omega_lower) see((row.min_omega - lo) / lo, "omega >= R1 e^(t/d)", row, row.min_omega, lo);
  }
  rep.margin = worst;
  rep.details = {{"R1", R1}, {"R2", R2}, {"worst", w}, {"omega_lower_asserted", omega_lower}, {"rows", tr.rows.size()}};
  rep.settle();
  return rep;
}

/// e^(-1/d) sqrt(h0 d) (R1/R2) min(sqrt(t/2), 1).
inline double h_floor(int d, double R1, double R2, double h0, double t) {
  return std::exp(-1.0 / d) * std::sqrt(h0 * d) * (R1 / R2) * std::min(std::sqrt(t / 2), 1.0);
}

inline CheckReport check_H_floor(const FlowTrace& tr, const CheckParams& p) {
  CheckReport rep;
  rep.check_id = "H_floor";
  rep.tolerance = 0;
  const auto [R1, R2] = resolve_radii(tr, p);
  const ConditionReport cond = hypothesis_status(tr, p);
  rep.hypothesis = to_json(cond);
  rep.notes = detail::dimension_notes(*tr.base);
  const int d = tr.base->dim();
  double C1 = detail::kInf, C2 = -detail::kInf;
  for (const auto& row : tr.rows) {
    C1 = std::min(C1, row.min_Hh);
    C2 = std::max(C2, row.max_Hh);
  }
  rep.details = {{"R1", R1}, {"R2", R2}, {"C1_observed_min_Hh", C1}, {"C2_observed_max_Hh", C2}};
  if (!cond.c1_strict) {
    rep.applicable = false;
    rep.notes.push_back("inapplicable: c1_strict fails on the swept interval");
    rep.margin = detail::kNaN;
    rep.settle();
    return rep;
  }
  const double h0 = infimum_h0(tr.warp, cond.interval);
  rep.details["h0"] = h0;
  double worst = detail::kInf;
  json w;
  for (const auto& row : tr.rows) {
    if (!(row.t > 0)) continue;
    const double f = h_floor(d, R1, R2, h0, row.t);
    const double slack = f > 0 ? (row.min_H - f) / f : row.min_H;
    if (slack < worst) {
      worst = slack;
      w = {{"t", row.t}, {"min_H", row.min_H}, {"floor", f}};
    }
  }
  if (w.is_null()) {
    rep.applicable = false;
    rep.notes.push_back("inapplicable: no record time t > 0");
    rep.margin = detail::kNaN;
  } else {
    rep.margin = worst;
    rep.details["worst"] = w;
  }
  rep.settle();
  return rep;
}

// ---------------------------------------------------------------------------
// Asymptotics

enum class AsymptoticMode { expect_roundness, expect_obstruction };

inline std::string to_string(AsymptoticMode m) {
  return m == AsymptoticMode::expect_roundness ? "expect_roundness" : "expect_obstruction";
}
inline AsymptoticMode asymptotic_mode_from_string(const std::string& s) {
  if (s == "expect_roundness") return AsymptoticMode::expect_roundness;
  if (s == "expect_obstruction") return AsymptoticMode::expect_obstruction;
  throw ArgumentError("unknown asymptotic mode '" + s + "'");
}

/// Normalized umbilicity defect max |h^i_j - (h'/h) delta| h / h' over the nodes of a snapshot.
/// Only the `frame` stored directions enter; the isotropic extras are umbilic by construction.
inline double shape_deviation(const GeometrySnapshot& g, int frame) {
  double out = 0;
  for (std::size_t j = 0; j < g.size(); ++j) {
    const double l = g.dh[j] / g.h[j];
    const Mat2& S = g.shape[j];
    const double a = S.a00 - l, b = frame >= 2 ? S.a11 - l : 0.0;
    const double n2 = a * a + 2 * S.a01 * S.a10 + b * b;
    out = std::max(out, std::sqrt(std::max(n2, 0.0)) / l);
  }
  return out;
}

struct RateFit {
  double rate = 0;  // q ~ exp(-rate t)
  bool exact = false;  // identically zero over the window
  std::size_t samples = 0;
};

/// Least-squares fit of log q against t.
inline RateFit fit_decay(const std::vector<double>& t, const std::vector<double>& q) {
  RateFit f;
  double st = 0, sy = 0, stt = 0, sty = 0;
  std::size_t n = 0;
  bool all_zero = true;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (q[i] > 0) all_zero = false;
  }
  if (all_zero) {
    f.exact = true;
    f.rate = detail::kInf;
    f.samples = t.size();
    return f;
  }
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (!(q[i] > 0)) continue;
    const double y = std::log(q[i]);
    st += t[i];
    sy += y;
    stt += t[i] * t[i];
    sty += t[i] * y;
    ++n;
  }
  f.samples = n;
  if (n < 2) throw ArgumentError("trace too short for a decay fit");
  const double den = double(n) * stt - st * st;
  if (!(den > 0)) throw ArgumentError("trace too short for a decay fit");
  f.rate = -(double(n) * sty - st * sy) / den;
  return f;
}

inline json to_json(const RateFit& f) {
  return {{"rate", f.exact ? json("exact") : json(f.rate)}, {"samples", f.samples}};
}

inline CheckReport check_asymptotics(const FlowTrace& tr, AsymptoticMode mode, const CheckParams& p) {
  CheckReport rep;
  rep.check_id = "asymptotics";
  rep.tolerance = 0;
  rep.hypothesis = to_json(hypothesis_status(tr, p));
  rep.notes = detail::dimension_notes(*tr.base);
  rep.details["mode"] = to_string(mode);
  const double T = detail::horizon(tr);
  if (!tr.completed()) {
    rep.applicable = false;
    rep.notes.push_back("inapplicable: trace ended at a flow event");
    rep.margin = detail::kNaN;
    rep.settle();
    return rep;
  }
  if (T < 8 - detail::time_tol(8)) throw ArgumentError("asymptotics needs a trace reaching t >= 8");
  const double osc_T = tr.rows.back().osc_rescaled_h;
  rep.details["terminal_osc"] = osc_T;

  if (mode == AsymptoticMode::expect_obstruction) {
    rep.details["obstruction_floor"] = p.obstruction_floor;
    rep.margin = (osc_T - p.obstruction_floor) / p.obstruction_floor;
    rep.settle();
    return rep;
  }

  const double t0 = T / 2;
  std::vector<double> tt, grad, hess, osc;
  for (const auto& row : tr.rows)
    if (row.t >= t0 - detail::time_tol(t0)) {
      tt.push_back(row.t);
      grad.push_back(row.max_grad_phi);
      hess.push_back(row.max_hess_phi);
      osc.push_back(row.osc_rescaled_h);
    }
  std::vector<double> ts, dev;
  for (const auto& s : tr.snapshots)
    if (s.t >= t0 - detail::time_tol(t0)) {
      ts.push_back(s.t);
      dev.push_back(shape_deviation(s.geometry, tr.base->frame_dims()));
    }
  const RateFit f_grad = fit_decay(tt, grad), f_hess = fit_decay(tt, hess), f_osc = fit_decay(tt, osc);
  const RateFit f_dev = fit_decay(ts, dev);

  double C2 = -detail::kInf;
  for (const auto& row : tr.rows) C2 = std::max(C2, row.max_Hh);
  const double rho0 = tr.base->ricci_coefficient();
  const double beta = rho0 / (C2 * C2);

  rep.details["window"] = {t0, T};
  rep.details["rates"] = {{"max_grad_phi", to_json(f_grad)},
                          {"max_hess_phi", to_json(f_hess)},
                          {"osc_rescaled_h", to_json(f_osc)},
                          {"shape_deviation", to_json(f_dev)}};
  rep.details["beta_predicted"] = beta;
  rep.details["C2_observed_max_Hh"] = C2;
  rep.details["tol_r"] = p.tol_r;

  double m = (p.tol_r - osc_T) / p.tol_r;
  for (const RateFit* f : {&f_grad, &f_hess, &f_osc, &f_dev})
    if (!f->exact) m = std::min(m, f->rate);
  rep.margin = m;
  rep.settle();
  return rep;
}

// ---------------------------------------------------------------------------
// Evolution identities

enum class Identity { omega_eq, u_eq, tw_eq, H_eq };

inline std::string to_string(Identity i) {
  switch (i) {
    case Identity::omega_eq: return "omega_eq";
    case Identity::u_eq: return "u_eq";
    case Identity::tw_eq: return "tw_eq";
    case Identity::H_eq: return "H_eq";
  }
  return "?";
}
inline Identity identity_from_string(const std::string& s) {
  for (auto i : {Identity::omega_eq, Identity::u_eq, Identity::tw_eq, Identity::H_eq})
    if (to_string(i) == s) return i;
  throw ArgumentError("unknown identity '" + s + "'");
}

inline bool identity_supported(BaseKind k, Identity i) {
  return i == Identity::tw_eq || k != BaseKind::torus2;
}

/// G^k = F phi^k - Theta^2 sigma^ki phi_ij phi^j + Theta^4 phi^k (phi^i phi^j phi_ij), the vector with
/// dF / d phi_k = -2 Theta^2 G^k.
inline Vec2 drift_G(const NodeGeometry& q, const Sym2& hess, const Sym2& sigma_inv) {
  const Vec2& up = q.grad_up;
  const Vec2 Tp{hess.xx * up[0] + hess.xy * up[1], hess.xy * up[0] + hess.yy * up[1]};  // phi_ij phi^j
  const Vec2 sTp{sigma_inv.xx * Tp[0] + sigma_inv.xy * Tp[1], sigma_inv.xy * Tp[0] + sigma_inv.yy * Tp[1]};
  const double ppT = up[0] * Tp[0] + up[1] * Tp[1];
  const double th2 = q.theta * q.theta;
  return {q.F * up[0] - th2 * sTp[0] + th2 * th2 * up[0] * ppT, q.F * up[1] - th2 * sTp[1] + th2 * th2 * up[1] * ppT};
}

/// Operators of the induced metric on an axisymmetric or one-dimensional graph.
struct SurfaceOps {
  const BaseManifold& base;
  ScalarField phi, h;

  // g = h^2 (W^2 d theta^2 + s^2 d psi^2), W^2 = 1 + phi_theta^2
  ScalarField laplacian(const ScalarField& f) const {
    const std::size_t n = f.size();
    ScalarField out(n, 0.0);
    if (base.kind() == BaseKind::point) return out;
    const double dx = base.spacing();
    const Derivatives dphi = base.covariant_derivatives(phi);
    if (base.kind() == BaseKind::axisphere) {
      auto flux = [&](std::size_t face) {  // between cells face-1 and face
        if (face == 0 || face == n) return 0.0;
        const double pt = (phi[face] - phi[face - 1]) / dx;
        const double W = std::sqrt(1 + pt * pt);
        return base.face_sin(face) * (f[face] - f[face - 1]) / dx / W;
      };
      for (std::size_t j = 0; j < n; ++j) {
        const double pt = dphi.grad[j][0];
        const double W = std::sqrt(1 + pt * pt);
        out[j] = (flux(j + 1) - flux(j)) / dx / (h[j] * h[j] * base.sin_theta(j) * W);
      }
    } else if (base.kind() == BaseKind::circle) {
      auto flux = [&](std::size_t a, std::size_t b) {
        const double pt = (phi[b] - phi[a]) / dx;
        const double W = std::sqrt(1 + pt * pt);
        return (f[b] - f[a]) / dx / (0.5 * (h[a] + h[b]) * W);
      };
      for (std::size_t j = 0; j < n; ++j) {
        const std::size_t jp = (j + 1) % n, jm = (j + n - 1) % n;
        const double pt = dphi.grad[j][0];
        const double W = std::sqrt(1 + pt * pt);
        out[j] = (flux(j, jp) - flux(jm, j)) / dx / (h[j] * W);
      }
    } else {
      throw UnsupportedError("induced Laplacian needs a point, circle, or axisphere base");
    }
    return out;
  }

  /// g(grad f, grad k) = f_theta k_theta / (h^2 W^2).
  ScalarField inner(const ScalarField& f, const ScalarField& k) const {
    const std::size_t n = f.size();
    ScalarField out(n, 0.0);
    if (base.kind() == BaseKind::point) return out;
    const ScalarField ft = base.partial(f, 0), kt = base.partial(k, 0), pt = base.partial(phi, 0);
    for (std::size_t j = 0; j < n; ++j) out[j] = ft[j] * kt[j] / (h[j] * h[j] * (1 + pt[j] * pt[j]));
    return out;
  }
};

/// Right-hand side of the chosen identity at one snapshot.
inline ScalarField identity_rhs(Identity which, const GraphState& s, const GeometrySnapshot& g) {
  const BaseManifold& base = *s.base;
  const std::size_t n = g.size();
  const double d = base.dim();
  const double kappa = base.ricci_coefficient();
  ScalarField out(n);
  if (which == Identity::tw_eq) {
    ScalarField tw(n);
    for (std::size_t j = 0; j < n; ++j) tw[j] = 0.5 * g.grad2[j];
    const Derivatives dtw = base.covariant_derivatives(tw);
    const auto ws = warp_samples(s);
    for (std::size_t j = 0; j < n; ++j) {
      const Sym2& si = base.sigma_inv(j);
      const NodeGeometry q = node_geometry(ws[j], g.dphi.grad[j], g.dphi.hess[j], si, base.frame_dims(),
                                           base.extra_dims(), kappa);
      const Sym2& st = q.sigma_tilde;
      const Sym2& T = g.dphi.hess[j];
      const Sym2& W = dtw.hess[j];
      const double st_W = st.xx * W.xx + 2 * st.xy * W.xy + st.yy * W.yy;
      const Vec2 G = drift_G(q, T, si);
      const double GD = G[0] * dtw.grad[j][0] + G[1] * dtw.grad[j][1];
      // tr(sigma_tilde T sigma^-1 T)
      const Mat2 A = detail::mul(st, T), B = detail::mul(si, T);
      const double trq = A.a00 * B.a00 + A.a01 * B.a10 + A.a10 * B.a01 + A.a11 * B.a11;
      const double th2 = q.theta * q.theta;
      out[j] = th2 / (q.F * q.F) * (st_W + 2 * GD - trq - kappa * q.grad2 - d * g.h[j] * g.ddh[j] * q.grad2);
    }
    return out;
  }

  if (!identity_supported(base.kind(), which)) throw UnsupportedError(to_string(which) + " not supported on " + base.name());
  const SurfaceOps ops{base, s.phi, g.h};
  switch (which) {
    case Identity::omega_eq: {
      const ScalarField lap = ops.laplacian(g.omega);
      for (std::size_t j = 0; j < n; ++j) {
        const double H2 = g.H[j] * g.H[j], h2 = g.h[j] * g.h[j], th2 = g.theta[j] * g.theta[j];
        const double K = (1 - th2) * (d - 1) * (g.h[j] * g.ddh[j] - g.dh[j] * g.dh[j]) + th2 * kappa * g.grad2[j];
        out[j] = lap[j] / H2 + g.A2[j] / H2 * g.omega[j] + g.omega[j] * K / (H2 * h2);
      }
      break;
    }
    case Identity::u_eq: {
      if (!g.u_available()) throw StateError("u unavailable where H <= 0", 0);
      ScalarField u(n);
      for (std::size_t j = 0; j < n; ++j) u[j] = *g.u[j];
      const ScalarField lap = ops.laplacian(u), uu = ops.inner(u, u), Hu = ops.inner(g.H, u);
      for (std::size_t j = 0; j < n; ++j) {
        const double H = g.H[j], H2 = H * H;
        out[j] = lap[j] / H2 - 2 * uu[j] / (u[j] * H2) - 2 * Hu[j] / (H2 * H) -
                 d * g.ddh[j] / g.h[j] * u[j] * u[j] * u[j] * g.omega[j] * g.omega[j];
      }
      break;
    }
    case Identity::H_eq: {
      const ScalarField lap = ops.laplacian(g.H), HH = ops.inner(g.H, g.H);
      for (std::size_t j = 0; j < n; ++j) {
        const double H = g.H[j];
        out[j] = lap[j] / (H * H) - 2 * HH[j] / (H * H * H) - (g.A2[j] + g.ric_vv[j]) / H;
      }
      break;
    }
    case Identity::tw_eq: break;
  }
  return out;
}

/// The evolving quantity of an identity, read off a snapshot.
inline ScalarField identity_field(Identity which, const GeometrySnapshot& g) {
  const std::size_t n = g.size();
  ScalarField out(n);
  for (std::size_t j = 0; j < n; ++j) {
    switch (which) {
      case Identity::omega_eq: out[j] = g.omega[j]; break;
      case Identity::u_eq:
        if (!g.u[j]) throw StateError("u unavailable where H <= 0", j);
        out[j] = *g.u[j];
        break;
      case Identity::tw_eq: out[j] = 0.5 * g.grad2[j]; break;
      case Identity::H_eq: out[j] = g.H[j]; break;
    }
  }
  return out;
}

/// Snapshots sit at fixed x in N while the identities for omega, u, H follow the normal
/// velocity 1/H. The two time derivatives differ by the tangential part of (1/(H Theta)) d_r,
/// which acts on f as (Theta^2 / F) <D phi, D f>_sigma. The potential equation is already
/// written at fixed x, so tw_eq carries no such term.
inline ScalarField transport_term(Identity which, const GraphState& s, const GeometrySnapshot& g) {
  const std::size_t n = g.size();
  ScalarField out(n, 0.0);
  if (which == Identity::tw_eq || s.base->kind() == BaseKind::point) return out;
  const Derivatives df = s.base->covariant_derivatives(identity_field(which, g));
  for (std::size_t j = 0; j < n; ++j) {
    const Sym2& si = s.base->sigma_inv(j);
    const Vec2& p = g.dphi.grad[j];
    const Vec2& q = df.grad[j];
    const double pq = si.xx * p[0] * q[0] + si.xy * (p[0] * q[1] + p[1] * q[0]) + si.yy * p[1] * q[1];
    out[j] = g.theta[j] * g.theta[j] / g.F[j] * pq;
  }
  return out;
}

struct ResidualSample {
  double t = 0;
  std::size_t node = 0;
  double residual = 0;
};

/// Max |d/dt f - RHS| over centers carrying four probe snapshots at T +- delta, T +- 2 delta.
inline std::optional<ResidualSample> max_residual(const FlowTrace& tr, Identity which) {
  const double delta = tr.config.probe_dt;
  if (!(delta > 0)) return std::nullopt;
  auto find = [&](double t) -> const Snapshot* {
    for (const auto& s : tr.snapshots)
      if (std::abs(s.t - t) <= detail::time_tol(t)) return &s;
    return nullptr;
  };
  std::optional<ResidualSample> worst;
  for (const auto& c : tr.snapshots) {
    if (!(c.t > 0)) continue;
    const double k = c.t / tr.config.snapshot_every;
    if (std::abs(k - std::round(k)) > 1e-9) continue;
    const Snapshot *m2 = find(c.t - 2 * delta), *m1 = find(c.t - delta), *p1 = find(c.t + delta),
                   *p2 = find(c.t + 2 * delta);
    if (!m2 || !m1 || !p1 || !p2) continue;
    const ScalarField fm2 = identity_field(which, m2->geometry), fm1 = identity_field(which, m1->geometry);
    const ScalarField fp1 = identity_field(which, p1->geometry), fp2 = identity_field(which, p2->geometry);
    const ScalarField rhs_c = identity_rhs(which, c.state, c.geometry);
    const ScalarField drift = transport_term(which, c.state, c.geometry);
    for (std::size_t j = 0; j < rhs_c.size(); ++j) {
      const double lhs = (fm2[j] - 8 * fm1[j] + 8 * fp1[j] - fp2[j]) / (12 * delta) - drift[j];
      const double r = std::abs(lhs - rhs_c[j]);
      if (!worst || r > worst->residual) worst = ResidualSample{c.t, j, r};
    }
  }
  return worst;
}

/// Point bases are held to an absolute bound; grid bases to the refinement contract against `refined`.
inline CheckReport evolution_residuals(const FlowTrace& tr, const std::vector<Identity>& which,
                                       const FlowTrace* refined, const CheckParams& p) {
  CheckReport rep;
  rep.check_id = "evolution_residuals";
  rep.tolerance = 0;
  rep.hypothesis = to_json(hypothesis_status(tr, p));
  rep.notes = detail::dimension_notes(*tr.base);
  const bool point = tr.base->kind() == BaseKind::point;
  json per = json::object();
  double margin = detail::kInf;
  bool any = false;
  for (Identity id : which) {
    json e;
    if (!identity_supported(tr.base->kind(), id)) {
      e["status"] = "unsupported on " + tr.base->name();
      per[to_string(id)] = e;
      continue;
    }
    const auto coarse = max_residual(tr, id);
    if (!coarse) {
      e["status"] = "no probe snapshots";
      per[to_string(id)] = e;
      continue;
    }
    e["residual"] = coarse->residual;
    e["worst"] = {{"t", coarse->t}, {"node", coarse->node}};
    if (point) {
      e["bound"] = p.residual_abs;
      margin = std::min(margin, (p.residual_abs - coarse->residual) / p.residual_abs);
      any = true;
    } else if (refined) {
      const auto fine = max_residual(*refined, id);
      if (!fine) {
        e["status"] = "refined trace has no probe snapshots";
      } else {
        const double ratio = fine->residual > 0 ? coarse->residual / fine->residual : detail::kInf;
        e["refined_residual"] = fine->residual;
        e["ratio"] = ratio;
        e["required_ratio"] = p.residual_ratio;
        margin = std::min(margin, ratio / p.residual_ratio - 1);
        any = true;
      }
    } else {
      e["status"] = "refinement trace missing";
    }
    per[to_string(id)] = e;
  }
  rep.details["identities"] = per;
  rep.details["probe_dt"] = tr.config.probe_dt;
  if (refined) rep.details["refined"] = {{"resolution", refined->base->resolution()}, {"probe_dt", refined->config.probe_dt}};
  if (!any) {
    rep.applicable = false;
    rep.notes.push_back("inapplicable: no identity could be evaluated");
    rep.margin = detail::kNaN;
  } else {
    rep.margin = margin;
  }
  rep.settle();
  return rep;
}

// ---------------------------------------------------------------------------

/// Last-quartile max |A| <= 2 x the median over the whole trace.
inline CheckReport check_A_bounded(const FlowTrace& tr, const CheckParams& p) {
  CheckReport rep;
  rep.check_id = "A_bounded";
  rep.tolerance = 0;
  rep.hypothesis = to_json(hypothesis_status(tr, p));
  rep.notes = detail::dimension_notes(*tr.base);
  std::vector<double> a;
  double sup = 0, t_sup = 0;
  for (const auto& row : tr.rows) {
    a.push_back(row.max_A);
    if (!(row.max_A <= sup)) {
      sup = row.max_A;
      t_sup = row.t;
    }
  }
  const std::size_t n = a.size();
  std::vector<double> sorted = a;
  std::sort(sorted.begin(), sorted.end());
  const double median = n % 2 ? sorted[n / 2] : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
  const std::size_t q0 = n - std::max<std::size_t>(1, n / 4);
  double last = 0;
  for (std::size_t i = q0; i < n; ++i) last = std::max(last, a[i]);
  const bool finite = std::all_of(a.begin(), a.end(), [](double x) { return std::isfinite(x); });
  rep.details = {{"sup", sup}, {"t_sup", t_sup}, {"median", median}, {"last_quartile_max", last}};
  rep.margin = finite && median > 0 ? (2 * median - last) / (2 * median) : (finite ? 0.0 : -detail::kInf);
  if (tr.event) rep.notes.push_back("trace ends at a flow event");
  rep.settle();
  return rep;
}

}  // namespace imcf
