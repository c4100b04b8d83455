#pragma once
// Pointwise geometry of a starshaped graph {(x, r(x))} in N x_h R+, written in
// terms of the potential phi = Phi(r) and its covariant derivatives on N.

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include "imcf/errors.hpp"
#include "imcf/manifold.hpp"
#include "imcf/warp.hpp"

namespace imcf {

struct GraphState {
  BasePtr base;
  WarpSpec warp;
  ScalarField phi;
  double t = 0;

  std::size_t size() const { return phi.size(); }
};

/// Graph state from a radius field r(x).
inline GraphState state_from_radius(BasePtr base, WarpSpec warp, const ScalarField& r, double t = 0) {
  base->require_shape(r);
  ScalarField phi(r.size());
  for (std::size_t j = 0; j < r.size(); ++j) phi[j] = warp.phi(r[j]);
  return GraphState{std::move(base), std::move(warp), std::move(phi), t};
}

/// Quantities at one node.
struct NodeGeometry {
  double theta = 1;  // angle function
  double grad2 = 0;  // |D phi|^2_sigma
  double F = 0;      // H h Theta
  double H = 0;
  double omega = 0;
  double A2 = 0;
  double Kh = 0;
  double ric_vv = 0;
  double ric_rr = 0;
  Mat2 shape;       // h^i_j
  Vec2 grad_up{};   // phi^i
  Sym2 sigma_tilde; // sigma^ij - Theta^2 phi^i phi^j
};

namespace detail {

inline Mat2 mul(const Sym2& a, const Sym2& b) {
  return {a.xx * b.xx + a.xy * b.xy, a.xx * b.xy + a.xy * b.yy, a.xy * b.xx + a.yy * b.xy, a.xy * b.xy + a.yy * b.yy};
}

}  // namespace detail

/// The node kernel shared by the snapshot and the flow right-hand side.
/// `frame` stored components, `extra` isotropic directions with vanishing derivatives,
/// `kappa` the Ricci coefficient Ric_N = kappa sigma.
inline NodeGeometry node_geometry(const WarpSample& w, const Vec2& grad, const Sym2& hess, const Sym2& sigma_inv,
                                  int frame, int extra, double kappa) {
  NodeGeometry g;
  const double d = double(frame + extra);
  const Vec2 up{sigma_inv.xx * grad[0] + sigma_inv.xy * grad[1], sigma_inv.xy * grad[0] + sigma_inv.yy * grad[1]};
  const double p2 = grad[0] * up[0] + grad[1] * up[1];
  const double th2 = 1.0 / (1.0 + p2);
  const double th = std::sqrt(th2);
  const Sym2 st{sigma_inv.xx - th2 * up[0] * up[0], sigma_inv.xy - th2 * up[0] * up[1],
                sigma_inv.yy - th2 * up[1] * up[1]};
  const Mat2 M = detail::mul(st, hess);  // sigma_tilde^ik phi_kj

  g.theta = th;
  g.grad2 = p2;
  g.grad_up = up;
  g.sigma_tilde = st;
  g.F = th2 * (d * w.dh - M.trace());
  g.H = g.F / (w.h * th);
  g.omega = w.h * th;

  const double c = -th / w.h;
  const double d0 = frame >= 1 ? w.dh : 0.0, d1 = frame >= 2 ? w.dh : 0.0;
  g.shape = {c * (M.a00 - d0), c * M.a01, c * M.a10, c * (M.a11 - d1)};
  const double iso = th * w.dh / w.h;
  g.A2 = g.shape.a00 * g.shape.a00 + g.shape.a01 * g.shape.a10 + g.shape.a10 * g.shape.a01 +
         g.shape.a11 * g.shape.a11 + double(extra) * iso * iso;

  g.ric_rr = -d * w.ddh / w.h;
  // Ric(v,v) with v = Theta d_r - Theta Dr / h^2
  g.ric_vv = -d * th2 * w.ddh / w.h + th2 / (w.h * w.h) * (kappa - (w.h * w.ddh + (d - 1) * w.dh * w.dh)) * p2;
  g.Kh = (d - 1) * (w.h * w.ddh - w.dh * w.dh) + (p2 > 0 ? kappa : 0.0);
  return g;
}

struct GeometrySnapshot {
  ScalarField r, h, dh, ddh;
  ScalarField theta, F, H, omega;
  std::vector<std::optional<double>> u;  // empty where H <= 0
  MixedTensorField shape;
  ScalarField A2, Kh, ric_vv, ric_rr;
  ScalarField grad2;
  Derivatives dphi;

  std::size_t size() const { return r.size(); }
  bool u_available() const {
    return std::all_of(u.begin(), u.end(), [](const auto& v) { return v.has_value(); });
  }
};

inline std::vector<WarpSample> warp_samples(const GraphState& s) {
  std::vector<WarpSample> out(s.size());
  for (std::size_t j = 0; j < s.size(); ++j) {
    if (!std::isfinite(s.phi[j])) throw StateError("non-finite phi", j);
    try {
      out[j] = s.warp.at_phi(s.phi[j]);
    } catch (const DomainError& e) {
      throw StateError(std::string("r outside warp domain: ") + e.what(), j);
    }
  }
  return out;
}

inline GeometrySnapshot snapshot(const GraphState& s) {
  const BaseManifold& base = *s.base;
  base.require_shape(s.phi);
  const std::size_t n = s.size();
  const auto ws = warp_samples(s);
  GeometrySnapshot g;
  g.dphi = base.covariant_derivatives(s.phi);
  g.r.resize(n);
  g.h.resize(n);
  g.dh.resize(n);
  g.ddh.resize(n);
  g.theta.resize(n);
  g.F.resize(n);
  g.H.resize(n);
  g.omega.resize(n);
  g.u.resize(n);
  g.shape.resize(n);
  g.A2.resize(n);
  g.Kh.resize(n);
  g.ric_vv.resize(n);
  g.ric_rr.resize(n);
  g.grad2.resize(n);
  for (std::size_t j = 0; j < n; ++j) {
    const NodeGeometry q = node_geometry(ws[j], g.dphi.grad[j], g.dphi.hess[j], base.sigma_inv(j), base.frame_dims(),
                                         base.extra_dims(), base.ricci_coefficient());
    g.r[j] = ws[j].r;
    g.h[j] = ws[j].h;
    g.dh[j] = ws[j].dh;
    g.ddh[j] = ws[j].ddh;
    g.theta[j] = q.theta;
    g.F[j] = q.F;
    g.H[j] = q.H;
    g.omega[j] = q.omega;
    if (q.H > 0) g.u[j] = 1.0 / (q.H * q.omega);
    g.shape[j] = q.shape;
    g.A2[j] = q.A2;
    g.Kh[j] = q.Kh;
    g.ric_vv[j] = q.ric_vv;
    g.ric_rr[j] = q.ric_rr;
    g.grad2[j] = q.grad2;
  }
  return g;
}

/// Mixed second fundamental form h^i_j and |A|^2.
inline std::pair<MixedTensorField, ScalarField> shape_operator(const GraphState& s) {
  GeometrySnapshot g = snapshot(s);
  return {std::move(g.shape), std::move(g.A2)};
}

/// g_ij = h^2 (sigma_ij + phi_i phi_j) and g^ij = h^-2 (sigma^ij - Theta^2 phi^i phi^j).
inline std::pair<SymTensorField, SymTensorField> induced_metric(const GraphState& s) {
  const BaseManifold& base = *s.base;
  base.require_shape(s.phi);
  const auto ws = warp_samples(s);
  const Derivatives d = base.covariant_derivatives(s.phi);
  SymTensorField g(s.size()), gi(s.size());
  for (std::size_t j = 0; j < s.size(); ++j) {
    const double h2 = ws[j].h * ws[j].h;
    const Vec2& p = d.grad[j];
    const Sym2& sl = base.sigma(j);
    const Sym2& si = base.sigma_inv(j);
    const Vec2 up{si.xx * p[0] + si.xy * p[1], si.xy * p[0] + si.yy * p[1]};
    const double th2 = 1.0 / (1.0 + p[0] * up[0] + p[1] * up[1]);
    g[j] = {h2 * (sl.xx + p[0] * p[0]), h2 * (sl.xy + p[0] * p[1]), h2 * (sl.yy + p[1] * p[1])};
    gi[j] = {(si.xx - th2 * up[0] * up[0]) / h2, (si.xy - th2 * up[0] * up[1]) / h2, (si.yy - th2 * up[1] * up[1]) / h2};
  }
  return {std::move(g), std::move(gi)};
}

/// Ric(v, v) and Ric(d_r, d_r) of the ambient warped product along the graph.
inline std::pair<ScalarField, ScalarField> ambient_ricci(const GraphState& s) {
  GeometrySnapshot g = snapshot(s);
  return {std::move(g.ric_vv), std::move(g.ric_rr)};
}

/// Mean curvature of the embedded surface of revolution (axisphere) or plane curve (circle)
/// generated by r(theta) in flat R^n, from its first and second fundamental forms.
/// Valid only for the euclidean warp.
inline ScalarField embedding_oracle_H(const GraphState& s) {
  if (s.warp.preset() != WarpPreset::euclidean) throw UnsupportedError("embedding oracle needs the euclidean warp");
  const BaseManifold& base = *s.base;
  if (base.kind() != BaseKind::axisphere && base.kind() != BaseKind::circle)
    throw UnsupportedError("embedding oracle needs an axisphere or circle base");
  const std::size_t n = s.size();
  ScalarField r(n);
  for (std::size_t j = 0; j < n; ++j) r[j] = s.warp.r_of_phi(s.phi[j]);
  const double dt = base.spacing();
  const bool periodic = base.kind() == BaseKind::circle;
  auto at = [&](std::ptrdiff_t j) {
    const std::ptrdiff_t N = std::ptrdiff_t(n);
    if (periodic) return r[std::size_t((j % N + N) % N)];
    // profile is even across both poles
    if (j < 0) return r[std::size_t(-j - 1)];
    if (j >= N) return r[std::size_t(2 * N - 1 - j)];
    return r[std::size_t(j)];
  };
  ScalarField H(n);
  for (std::size_t j = 0; j < n; ++j) {
    const std::ptrdiff_t q = std::ptrdiff_t(j);
    const double rr = r[j];
    const double r1 = (at(q + 1) - at(q - 1)) / (2 * dt);
    const double r2 = (at(q + 1) - 2 * rr + at(q - 1)) / (dt * dt);
    const double th = base.coord(j)[0];
    if (periodic) {
      // P = r (cos, sin)
      const double c = std::cos(th), sn = std::sin(th);
      const double Px = r1 * c - rr * sn, Py = r1 * sn + rr * c;
      const double Pxx = r2 * c - 2 * r1 * sn - rr * c, Pyy = r2 * sn + 2 * r1 * c - rr * sn;
      const double E = Px * Px + Py * Py;
      const double len = std::sqrt(E);
      const double Nx = Py / len, Ny = -Px / len;  // outward
      const double L = -(Pxx * Nx + Pyy * Ny);
      H[j] = L / E;
    } else {
      // meridian P = (x, z) = r (sin, cos), rotated about the z axis
      const double sn = base.sin_theta(j), c = base.cos_theta(j);
      const double x1 = r1 * sn + rr * c, z1 = r1 * c - rr * sn;
      const double x2 = r2 * sn + 2 * r1 * c - rr * sn, z2 = r2 * c - 2 * r1 * sn - rr * c;
      const double E = x1 * x1 + z1 * z1;
      const double len = std::sqrt(E);
      const double Nx = -z1 / len, Nz = x1 / len;  // outward
      const double L = -(x2 * Nx + z2 * Nz);
      const double x = rr * sn;
      const double G = x * x;
      const double Nrot = x * Nx;  // -<P_psipsi, N> with P_psipsi = -x e_x
      H[j] = L / E + Nrot / G;
    }
  }
  return H;
}

}  // namespace imcf
