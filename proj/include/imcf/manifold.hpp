#pragma once
// Closed bases (N, sigma) with exactly known metric, Christoffel symbols and curvature:
// a single point (slices only), the circle, the axisymmetric round S^2, and the flat 2-torus.
// All derivative stencils are second-order centered differences.

#include <array>
#include <cmath>
#include <cstddef>
#include <memory>
#include <numbers>
#include <string>
#include <vector>

#include "imcf/errors.hpp"

namespace imcf {

using ScalarField = std::vector<double>;
using Vec2 = std::array<double, 2>;

/// Symmetric 2x2 in coordinate components.
struct Sym2 {
  double xx = 0, xy = 0, yy = 0;
};

/// General 2x2, row = upper index, column = lower index.
struct Mat2 {
  double a00 = 0, a01 = 0, a10 = 0, a11 = 0;
  double trace() const { return a00 + a11; }
};

using CovectorField = std::vector<Vec2>;
using SymTensorField = std::vector<Sym2>;
using MixedTensorField = std::vector<Mat2>;

enum class BaseKind { point, circle, axisphere, torus2 };

inline std::string to_string(BaseKind k) {
  switch (k) {
    case BaseKind::point: return "point";
    case BaseKind::circle: return "circle";
    case BaseKind::axisphere: return "axisphere";
    case BaseKind::torus2: return "torus2";
  }
  return "?";
}

inline BaseKind base_kind_from_string(const std::string& s) {
  for (auto k : {BaseKind::point, BaseKind::circle, BaseKind::axisphere, BaseKind::torus2})
    if (to_string(k) == s) return k;
  throw ArgumentError("unknown base kind '" + s + "'");
}

struct Derivatives {
  CovectorField grad;
  SymTensorField hess;
};

class BaseManifold {
 public:
  /// A single node standing in for an arbitrary closed N of dimension `dim`
  /// with Ric_N = (dim - 1) rho sigma. Only slices live here.
  static BaseManifold point(int dim, double rho) {
    if (dim < 1) throw ArgumentError("point base needs dim >= 1");
    BaseManifold b(BaseKind::point, dim, 1);
    b.rho_ = rho;
    b.kappa_ = double(dim - 1) * rho;
    b.frame_dims_ = std::min(dim, 2);
    b.coords_.assign(1, Vec2{0, 0});
    b.sigma_.assign(1, Sym2{1, 0, b.frame_dims_ == 2 ? 1.0 : 0.0});
    b.sigma_inv_ = b.sigma_;
    b.weights_.assign(1, 1.0);
    return b;
  }

  static BaseManifold circle(int M) {
    if (M < 4) throw ArgumentError("circle base needs at least 4 nodes");
    BaseManifold b(BaseKind::circle, 1, M);
    b.spacing_ = 2 * std::numbers::pi / M;
    b.frame_dims_ = 1;
    b.coords_.resize(std::size_t(M));
    for (int j = 0; j < M; ++j) b.coords_[std::size_t(j)] = {b.spacing_ * j, 0};
    b.sigma_.assign(std::size_t(M), Sym2{1, 0, 0});
    b.sigma_inv_ = b.sigma_;
    b.weights_.assign(std::size_t(M), b.spacing_);
    return b;
  }

  /// Cell-centered colatitude grid theta_j = (j + 1/2) pi / M, axisymmetric fields.
  static BaseManifold axisphere(int M) {
    if (M < 4) throw ArgumentError("axisphere base needs at least 4 nodes");
    BaseManifold b(BaseKind::axisphere, 2, M);
    const double h = std::numbers::pi / M;
    b.spacing_ = h;
    b.rho_ = 1.0;
    b.kappa_ = 1.0;
    b.frame_dims_ = 2;
    const std::size_t n = std::size_t(M);
    b.coords_.resize(n);
    b.sin_.resize(n);
    b.cos_.resize(n);
    b.sigma_.resize(n);
    b.sigma_inv_.resize(n);
    b.weights_.resize(n);
    b.face_sin_.assign(n + 1, 0.0);
    // mirror-symmetric tables so that theta -> pi - theta symmetry is exact in floating point
    for (std::size_t j = 0; j < (n + 1) / 2; ++j) {
      const double th = (double(j) + 0.5) * h;
      const std::size_t mj = n - 1 - j;
      const double s = std::sin(th), c = std::cos(th);
      b.sin_[j] = s;
      b.sin_[mj] = s;
      b.cos_[j] = c;
      b.cos_[mj] = mj == j ? 0.0 : -c;
    }
    for (std::size_t j = 1; j < n; ++j) {
      const std::size_t k = std::min(j, n - j);
      b.face_sin_[j] = std::sin(double(k) * h);
    }
    for (std::size_t j = 0; j < n; ++j) {
      const double th = j < (n + 1) / 2 ? (double(j) + 0.5) * h : std::numbers::pi - (double(n - 1 - j) + 0.5) * h;
      b.coords_[j] = {th, 0};
      const double s2 = b.sin_[j] * b.sin_[j];
      b.sigma_[j] = {1, 0, s2};
      b.sigma_inv_[j] = {1, 0, 1 / s2};
      // exact cell areas 2 pi (cos theta_{j-1/2} - cos theta_{j+1/2}) = 4 pi sin(theta_j) sin(h/2)
      b.weights_[j] = 4 * std::numbers::pi * b.sin_[j] * std::sin(0.5 * h);
    }
    return b;
  }

  /// Periodic M x M grid on [0, 2 pi)^2 with the flat metric; node id = iy * M + ix.
  static BaseManifold torus2(int M) {
    if (M < 4) throw ArgumentError("torus2 base needs at least 4 nodes per side");
    BaseManifold b(BaseKind::torus2, 2, M);
    b.spacing_ = 2 * std::numbers::pi / M;
    b.frame_dims_ = 2;
    const std::size_t n = std::size_t(M) * std::size_t(M);
    b.coords_.resize(n);
    for (int iy = 0; iy < M; ++iy)
      for (int ix = 0; ix < M; ++ix) b.coords_[std::size_t(iy * M + ix)] = {b.spacing_ * ix, b.spacing_ * iy};
    b.sigma_.assign(n, Sym2{1, 0, 1});
    b.sigma_inv_ = b.sigma_;
    b.weights_.assign(n, b.spacing_ * b.spacing_);
    return b;
  }

  BaseKind kind() const { return kind_; }
  std::string name() const { return to_string(kind_); }
  /// Dimension of N (n - 1).
  int dim() const { return dim_; }
  int ambient_dim() const { return dim_ + 1; }
  /// Ric_N >= (n - 2) rho sigma.
  double rho() const { return rho_; }
  /// Ric_N = kappa sigma exactly.
  double ricci_coefficient() const { return kappa_; }
  /// Sectional curvature of N (constant for every supported kind with dim >= 2).
  double sectional_curvature() const { return kind_ == BaseKind::axisphere ? 1.0 : 0.0; }
  int resolution() const { return M_; }
  std::size_t size() const { return coords_.size(); }
  /// Smallest grid spacing; 0 for the point base.
  double spacing() const { return spacing_; }
  /// Number of stored frame components (<= 2); the remaining dim() - frame_dims() directions
  /// only exist on the point base, where every field is constant.
  int frame_dims() const { return frame_dims_; }
  int extra_dims() const { return dim_ - frame_dims_; }

  const Vec2& coord(std::size_t node) const { return coords_[node]; }
  const Sym2& sigma(std::size_t node) const { return sigma_[node]; }
  const Sym2& sigma_inv(std::size_t node) const { return sigma_inv_[node]; }
  double weight(std::size_t node) const { return weights_[node]; }

  // axisphere tables
  double sin_theta(std::size_t j) const { return sin_[j]; }
  double cos_theta(std::size_t j) const { return cos_[j]; }
  double face_sin(std::size_t j) const { return face_sin_[j]; }

  /// Index of the node mirrored by theta -> pi - theta on the axisphere (identity elsewhere).
  std::size_t mirror(std::size_t j) const { return kind_ == BaseKind::axisphere ? size() - 1 - j : j; }

  void require_shape(const ScalarField& f) const {
    if (f.size() != size())
      throw ArgumentError("field has " + std::to_string(f.size()) + " values, base " + name() + " has " +
                          std::to_string(size()) + " nodes");
  }

  /// Covariant gradient and Hessian (coordinate components) of a scalar field.
  Derivatives covariant_derivatives(const ScalarField& f) const {
    require_shape(f);
    const std::size_t n = size();
    Derivatives d{CovectorField(n, Vec2{0, 0}), SymTensorField(n)};
    const double h = spacing_;
    switch (kind_) {
      case BaseKind::point: break;
      case BaseKind::circle:
        for (std::size_t j = 0; j < n; ++j) {
          const double fp = f[(j + 1) % n], fm = f[(j + n - 1) % n];
          d.grad[j] = {(fp - fm) / (2 * h), 0};
          d.hess[j] = {(fp + fm - 2 * f[j]) / (h * h), 0, 0};
        }
        break;
      case BaseKind::axisphere:
        for (std::size_t j = 0; j < n; ++j) {
          const double fp = j + 1 < n ? f[j + 1] : f[j];
          const double fm = j > 0 ? f[j - 1] : f[j];
          const double ft = (fp - fm) / (2 * h);
          d.grad[j] = {ft, 0};
          // Hess_psipsi = sin cos f_theta from Gamma^theta_psipsi = -sin cos
          d.hess[j] = {(fp + fm - 2 * f[j]) / (h * h), 0, sin_[j] * cos_[j] * ft};
        }
        break;
      case BaseKind::torus2: {
        const std::size_t M = std::size_t(M_);
        for (std::size_t iy = 0; iy < M; ++iy) {
          const std::size_t yp = (iy + 1) % M, ym = (iy + M - 1) % M;
          for (std::size_t ix = 0; ix < M; ++ix) {
            const std::size_t xp = (ix + 1) % M, xm = (ix + M - 1) % M;
            const double c = f[iy * M + ix];
            const double e = f[iy * M + xp], w = f[iy * M + xm];
            const double nn = f[yp * M + ix], s = f[ym * M + ix];
            const double ne = f[yp * M + xp], nw = f[yp * M + xm], se = f[ym * M + xp], sw = f[ym * M + xm];
            d.grad[iy * M + ix] = {(e - w) / (2 * h), (nn - s) / (2 * h)};
            d.hess[iy * M + ix] = {(e + w - 2 * c) / (h * h), (ne - nw - se + sw) / (4 * h * h),
                                   (nn + s - 2 * c) / (h * h)};
          }
        }
        break;
      }
    }
    return d;
  }

  /// First-derivative stencil along `axis`; `odd` selects odd reflection at the axisphere poles.
  ScalarField partial(const ScalarField& f, int axis, bool odd = false) const {
    require_shape(f);
    const std::size_t n = size();
    ScalarField out(n, 0.0);
    const double h = spacing_;
    switch (kind_) {
      case BaseKind::point: break;
      case BaseKind::circle:
        if (axis == 0)
          for (std::size_t j = 0; j < n; ++j) out[j] = (f[(j + 1) % n] - f[(j + n - 1) % n]) / (2 * h);
        break;
      case BaseKind::axisphere:
        if (axis == 0)
          for (std::size_t j = 0; j < n; ++j) {
            const double fp = j + 1 < n ? f[j + 1] : (odd ? -f[j] : f[j]);
            const double fm = j > 0 ? f[j - 1] : (odd ? -f[j] : f[j]);
            out[j] = (fp - fm) / (2 * h);
          }
        break;
      case BaseKind::torus2: {
        const std::size_t M = std::size_t(M_);
        for (std::size_t iy = 0; iy < M; ++iy)
          for (std::size_t ix = 0; ix < M; ++ix) {
            if (axis == 0)
              out[iy * M + ix] = (f[iy * M + (ix + 1) % M] - f[iy * M + (ix + M - 1) % M]) / (2 * h);
            else
              out[iy * M + ix] = (f[((iy + 1) % M) * M + ix] - f[((iy + M - 1) % M) * M + ix]) / (2 * h);
          }
        break;
      }
    }
    return out;
  }

  /// Integral of f against d sigma.
  double integrate(const ScalarField& f) const {
    require_shape(f);
    double sum = 0;
    for (std::size_t j = 0; j < f.size(); ++j) sum += weights_[j] * f[j];
    return sum;
  }

  /// max |phi_ijk - phi_ikj - R_kjip phi^p| with third derivatives from nested first-derivative stencils.
  double commuting_residual(const ScalarField& f) const {
    require_shape(f);
    if (kind_ == BaseKind::point) throw UnsupportedError("commuting_residual: point base has no derivatives");
    const int d = frame_dims_;
    const std::size_t n = size();

    // Christoffel symbols Gamma^l_ab per node (only the axisphere has nonzero ones)
    auto gamma = [&](std::size_t j, int l, int a, int b) -> double {
      if (kind_ != BaseKind::axisphere) return 0.0;
      if (l == 0 && a == 1 && b == 1) return -sin_[j] * cos_[j];
      if (l == 1 && ((a == 0 && b == 1) || (a == 1 && b == 0))) return cos_[j] / sin_[j];
      return 0.0;
    };
    auto has_axis = [&](int k) { return kind_ == BaseKind::axisphere ? k == 0 : k < d; };

    // covector w_i = D_i f
    std::array<ScalarField, 2> w;
    for (int i = 0; i < 2; ++i) w[std::size_t(i)] = has_axis(i) ? partial(f, i) : ScalarField(n, 0.0);

    // T_ij = D_j w_i - Gamma^l_ji w_l
    std::array<std::array<ScalarField, 2>, 2> T;
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) {
        // w_theta is odd across the poles
        ScalarField dw = has_axis(j) ? partial(w[std::size_t(i)], j, kind_ == BaseKind::axisphere && i == 0)
                                     : ScalarField(n, 0.0);
        for (std::size_t q = 0; q < n; ++q)
          for (int l = 0; l < d; ++l) dw[q] -= gamma(q, l, j, i) * w[std::size_t(l)][q];
        T[std::size_t(i)][std::size_t(j)] = std::move(dw);
      }

    // D_k T_ij
    std::array<std::array<std::array<ScalarField, 2>, 2>, 2> dT;
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j)
        for (int k = 0; k < d; ++k)
          dT[std::size_t(i)][std::size_t(j)][std::size_t(k)] =
              has_axis(k) ? partial(T[std::size_t(i)][std::size_t(j)], k) : ScalarField(n, 0.0);

    const double K = sectional_curvature();
    double worst = 0;
    for (std::size_t q = 0; q < n; ++q) {
      const Sym2& s = sigma_[q];
      const Sym2& si = sigma_inv_[q];
      auto sig = [&](int a, int b) { return a != b ? s.xy : (a == 0 ? s.xx : s.yy); };
      const double up[2] = {si.xx * w[0][q] + si.xy * w[1][q], si.xy * w[0][q] + si.yy * w[1][q]};
      auto third = [&](int i, int j, int k) {
        // phi_ijk = D_k T_ij - Gamma^l_ki T_lj - Gamma^l_kj T_il
        double v = dT[std::size_t(i)][std::size_t(j)][std::size_t(k)][q];
        for (int l = 0; l < d; ++l)
          v -= gamma(q, l, k, i) * T[std::size_t(l)][std::size_t(j)][q] + gamma(q, l, k, j) * T[std::size_t(i)][std::size_t(l)][q];
        return v;
      };
      for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
          for (int k = 0; k < d; ++k) {
            // R_kjip = <R(d_k, d_j) d_i, d_p> with R(X,Y)Z = nabla_Y nabla_X Z - nabla_X nabla_Y Z + nabla_[X,Y] Z
            double curv = 0;
            for (int p = 0; p < d; ++p)
              curv += -K * (sig(j, i) * sig(k, p) - sig(k, i) * sig(j, p)) * up[p];
            worst = std::max(worst, std::abs(third(i, j, k) - third(i, k, j) - curv));
          }
    }
    return worst;
  }

 private:
  BaseManifold(BaseKind k, int dim, int M) : kind_(k), dim_(dim), M_(M) {}

  BaseKind kind_;
  int dim_;
  int M_;
  int frame_dims_ = 0;
  double rho_ = 0;
  double kappa_ = 0;
  double spacing_ = 0;
  std::vector<Vec2> coords_;
  std::vector<Sym2> sigma_, sigma_inv_;
  std::vector<double> weights_;
  std::vector<double> sin_, cos_, face_sin_;
};

using BasePtr = std::shared_ptr<const BaseManifold>;

inline BasePtr make_base(BaseManifold b) { return std::make_shared<const BaseManifold>(std::move(b)); }

inline Derivatives covariant_derivatives(const BaseManifold& base, const ScalarField& f) {
  return base.covariant_derivatives(f);
}
inline double commuting_residual(const BaseManifold& base, const ScalarField& f) { return base.commuting_residual(f); }
inline double integrate(const BaseManifold& base, const ScalarField& f) { return base.integrate(f); }

}  // namespace imcf
