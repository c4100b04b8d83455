#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "imcf/manifold.hpp"

using namespace imcf;
using std::numbers::pi;

namespace {

ScalarField sample(const BaseManifold& b, double (*f)(double, double)) {
  ScalarField out(b.size());
  for (std::size_t j = 0; j < b.size(); ++j) out[j] = f(b.coord(j)[0], b.coord(j)[1]);
  return out;
}

double laplace_trace(const BaseManifold& b, const Derivatives& d, std::size_t j) {
  const Sym2& si = b.sigma_inv(j);
  const Sym2& H = d.hess[j];
  return si.xx * H.xx + 2 * si.xy * H.xy + si.yy * H.yy;
}

double max_hess_error_cos2(int M) {
  const auto b = BaseManifold::axisphere(M);
  const auto d = b.covariant_derivatives(sample(b, [](double t, double) { return std::cos(2 * t); }));
  double err = 0;
  for (std::size_t j = 0; j < b.size(); ++j) {
    const double t = b.coord(j)[0];
    // f = cos 2t: Hess_tt = -4 cos 2t, Hess_pp = sin t cos t f_t = -2 sin t cos t sin 2t
    err = std::max(err, std::abs(d.hess[j].xx + 4 * std::cos(2 * t)));
    err = std::max(err, std::abs(d.hess[j].yy + 2 * std::sin(t) * std::cos(t) * std::sin(2 * t)));
  }
  return err;
}

}  // namespace

TEST(Quadrature, VolumesOfEachKind) {
  const auto c = BaseManifold::circle(64);
  EXPECT_NEAR(c.integrate(ScalarField(c.size(), 1.0)), 2 * pi, 1e-12);
  const auto s = BaseManifold::axisphere(50);
  EXPECT_NEAR(s.integrate(ScalarField(s.size(), 1.0)) / (4 * pi), 1.0, 1e-6);
  const auto t = BaseManifold::torus2(24);
  EXPECT_NEAR(t.integrate(ScalarField(t.size(), 1.0)) / (4 * pi * pi), 1.0, 1e-6);
}

TEST(Quadrature, CosSquaredOverSphereConvergesAtSecondOrder) {
  auto err = [](int M) {
    const auto s = BaseManifold::axisphere(M);
    const auto f = sample(s, [](double t, double) { return std::cos(t) * std::cos(t); });
    return std::abs(s.integrate(f) / (4 * pi / 3) - 1.0);
  };
  EXPECT_LT(err(400), 1e-4);
  EXPECT_NEAR(err(200) / err(400), 4.0, 0.8);
}

TEST(Derivatives, AxisphereCosThetaHasLaplacianMinusTwoCos) {
  for (int M : {100, 200}) {
    const auto b = BaseManifold::axisphere(M);
    const auto d = b.covariant_derivatives(sample(b, [](double t, double) { return std::cos(t); }));
    const double h = b.spacing();
    for (std::size_t j = 0; j < b.size(); ++j)
      EXPECT_NEAR(laplace_trace(b, d, j), -2 * std::cos(b.coord(j)[0]), 2 * h * h) << "M=" << M << " j=" << j;
  }
}

TEST(Derivatives, CircleCosine) {
  const auto b = BaseManifold::circle(128);
  const auto d = b.covariant_derivatives(sample(b, [](double t, double) { return std::cos(t); }));
  const double h = b.spacing();
  for (std::size_t j = 0; j < b.size(); ++j) {
    EXPECT_NEAR(d.hess[j].xx, -std::cos(b.coord(j)[0]), h * h);
    EXPECT_NEAR(d.grad[j][0], -std::sin(b.coord(j)[0]), h * h);
  }
}

TEST(Derivatives, HessianSecondOrderUnderRefinement) {
  const double ratio = max_hess_error_cos2(100) / max_hess_error_cos2(200);
  EXPECT_NEAR(ratio, 4.0, 0.8);
}

TEST(Derivatives, ConstantsAreExact) {
  for (const auto& b : {BaseManifold::circle(16), BaseManifold::axisphere(16), BaseManifold::torus2(8)}) {
    const auto d = b.covariant_derivatives(ScalarField(b.size(), 3.25));
    for (std::size_t j = 0; j < b.size(); ++j) {
      EXPECT_EQ(d.grad[j][0], 0.0);
      EXPECT_EQ(d.grad[j][1], 0.0);
      EXPECT_EQ(d.hess[j].xx, 0.0);
      EXPECT_EQ(d.hess[j].xy, 0.0);
      EXPECT_EQ(d.hess[j].yy, 0.0);
    }
  }
}

TEST(Derivatives, CommensurateHarmonicsOnPeriodicGrids) {
  // for f = cos(k x) the centered stencils return the exact discrete symbols
  const int M = 32, k = 3;
  const auto b = BaseManifold::circle(M);
  const double h = b.spacing();
  ScalarField f(b.size());
  for (std::size_t j = 0; j < b.size(); ++j) f[j] = std::cos(k * b.coord(j)[0]);
  const auto d = b.covariant_derivatives(f);
  const double grad_symbol = std::sin(k * h) / h, hess_symbol = 2 * (std::cos(k * h) - 1) / (h * h);
  for (std::size_t j = 0; j < b.size(); ++j) {
    EXPECT_NEAR(d.grad[j][0], -grad_symbol * std::sin(k * b.coord(j)[0]), 1e-12);
    EXPECT_NEAR(d.hess[j].xx, hess_symbol * f[j], 1e-11);
  }
}

TEST(Derivatives, PeriodicShiftCommutesBitExactly) {
  const int M = 24;
  const auto t = BaseManifold::torus2(M);
  ScalarField f(t.size()), g(t.size());
  for (std::size_t j = 0; j < t.size(); ++j) {
    const auto x = t.coord(j);
    f[j] = std::exp(std::sin(x[0]) * std::cos(2 * x[1])) + 0.1 * std::sin(3 * x[1]);
  }
  const std::size_t m = std::size_t(M);
  for (std::size_t iy = 0; iy < m; ++iy)
    for (std::size_t ix = 0; ix < m; ++ix) g[iy * m + (ix + 1) % m] = f[iy * m + ix];
  const auto df = t.covariant_derivatives(f), dg = t.covariant_derivatives(g);
  for (std::size_t iy = 0; iy < m; ++iy)
    for (std::size_t ix = 0; ix < m; ++ix) {
      const std::size_t a = iy * m + ix, b = iy * m + (ix + 1) % m;
      EXPECT_EQ(df.grad[a][0], dg.grad[b][0]);
      EXPECT_EQ(df.grad[a][1], dg.grad[b][1]);
      EXPECT_EQ(df.hess[a].xx, dg.hess[b].xx);
      EXPECT_EQ(df.hess[a].xy, dg.hess[b].xy);
      EXPECT_EQ(df.hess[a].yy, dg.hess[b].yy);
    }

  const auto c = BaseManifold::circle(M);
  ScalarField p(c.size()), q(c.size());
  for (std::size_t j = 0; j < c.size(); ++j) p[j] = std::exp(std::cos(c.coord(j)[0]));
  for (std::size_t j = 0; j < c.size(); ++j) q[(j + 1) % c.size()] = p[j];
  const auto dp = c.covariant_derivatives(p), dq = c.covariant_derivatives(q);
  for (std::size_t j = 0; j < c.size(); ++j) {
    EXPECT_EQ(dp.grad[j][0], dq.grad[(j + 1) % c.size()][0]);
    EXPECT_EQ(dp.hess[j].xx, dq.hess[(j + 1) % c.size()].xx);
  }
}

TEST(Derivatives, PoleGradientVanishesAtSecondOrder) {
  auto first = [](int M) {
    const auto b = BaseManifold::axisphere(M);
    const auto d = b.covariant_derivatives(sample(b, [](double t, double) { return std::cos(t) + std::cos(2 * t); }));
    return std::abs(d.grad[0][0]) + std::abs(d.grad[b.size() - 1][0]);
  };
  // f_theta ~ theta near the pole, so at the first cell center it is O(dtheta); the reflection error is O(dtheta^2)
  const double a = first(100), b = first(200);
  EXPECT_NEAR(a / b, 2.0, 0.2);
  const auto s = BaseManifold::axisphere(100);
  const auto d = s.covariant_derivatives(sample(s, [](double t, double) { return std::cos(t) + std::cos(2 * t); }));
  const double exact = std::sin(s.coord(0)[0]) + 2 * std::sin(2 * s.coord(0)[0]);
  EXPECT_NEAR(-d.grad[0][0], exact, 3 * s.spacing() * s.spacing() * 10);
}

TEST(Derivatives, MirrorSymmetryIsExact) {
  const auto b = BaseManifold::axisphere(101);
  const auto f = sample(b, [](double t, double) { return std::cos(2 * t) + 0.3 * std::cos(4 * t); });
  ScalarField g(b.size());
  for (std::size_t j = 0; j < b.size(); ++j) g[j] = 0.5 * (f[j] + f[b.mirror(j)]);
  const auto d = b.covariant_derivatives(g);
  for (std::size_t j = 0; j < b.size(); ++j) {
    const std::size_t k = b.mirror(j);
    EXPECT_EQ(d.grad[j][0], -d.grad[k][0]);
    EXPECT_EQ(d.hess[j].xx, d.hess[k].xx);
    EXPECT_EQ(d.hess[j].yy, d.hess[k].yy);
  }
}

TEST(Derivatives, ShapeMismatchIsAnArgumentError) {
  const auto b = BaseManifold::axisphere(16);
  EXPECT_THROW(b.covariant_derivatives(ScalarField(15, 0.0)), ArgumentError);
  EXPECT_THROW(b.integrate(ScalarField(17, 0.0)), ArgumentError);
}

TEST(CommutingResidual, FlatBases) {
  const auto c = BaseManifold::circle(64);
  EXPECT_EQ(c.commuting_residual(sample(c, [](double t, double) { return std::exp(std::sin(t)); })), 0.0);
  const auto t = BaseManifold::torus2(32);
  EXPECT_LT(t.commuting_residual(sample(t, [](double x, double y) { return std::cos(x) * std::cos(y); })), 1e-10);
}

TEST(CommutingResidual, SphereConvergesAtSecondOrder) {
  auto res = [](int M) {
    const auto b = BaseManifold::axisphere(M);
    return b.commuting_residual(sample(b, [](double t, double) { return std::cos(t); }));
  };
  const double r1 = res(100), r2 = res(200), r3 = res(400);
  EXPECT_GT(r1, 0.0);
  EXPECT_NEAR(r1 / r2, 4.0, 0.8);
  EXPECT_NEAR(r2 / r3, 4.0, 0.8);
}

TEST(CommutingResidual, PointBaseUnsupported) {
  const auto p = BaseManifold::point(2, 1.0);
  EXPECT_THROW(p.commuting_residual(ScalarField(1, 0.0)), UnsupportedError);
}

TEST(BaseManifold, CurvatureData) {
  EXPECT_EQ(BaseManifold::axisphere(8).rho(), 1.0);
  EXPECT_EQ(BaseManifold::axisphere(8).ricci_coefficient(), 1.0);
  EXPECT_EQ(BaseManifold::circle(8).rho(), 0.0);
  EXPECT_EQ(BaseManifold::torus2(8).ricci_coefficient(), 0.0);
  const auto p = BaseManifold::point(4, 0.5);
  EXPECT_EQ(p.dim(), 4);
  EXPECT_EQ(p.ambient_dim(), 5);
  EXPECT_EQ(p.ricci_coefficient(), 1.5);
  EXPECT_EQ(p.frame_dims() + p.extra_dims(), 4);
}

TEST(BaseManifold, KindNamesRoundTrip) {
  for (auto k : {BaseKind::point, BaseKind::circle, BaseKind::axisphere, BaseKind::torus2})
    EXPECT_EQ(base_kind_from_string(to_string(k)), k);
  EXPECT_THROW(base_kind_from_string("klein"), ArgumentError);
}

TEST(BaseManifold, InvalidResolution) {
  EXPECT_THROW(BaseManifold::axisphere(2), ArgumentError);
  EXPECT_THROW(BaseManifold::point(0, 1), ArgumentError);
}
