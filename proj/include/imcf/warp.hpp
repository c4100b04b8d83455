#pragma once
// Warping factors h(r) for N x_h R+, the radial potential Phi with Phi' = 1/h,
// and sampled checks of the structural hypotheses on h.

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/minima.hpp>

#include "imcf/errors.hpp"

namespace imcf {

enum class WarpPreset { euclidean, hyperbolic, schwarzschild3, saturating, power };

inline std::string to_string(WarpPreset p) {
  switch (p) {
    case WarpPreset::euclidean: return "euclidean";
    case WarpPreset::hyperbolic: return "hyperbolic";
    case WarpPreset::schwarzschild3: return "schwarzschild3";
    case WarpPreset::saturating: return "saturating";
    case WarpPreset::power: return "power";
  }
  return "?";
}

inline WarpPreset warp_preset_from_string(const std::string& s) {
  for (auto p : {WarpPreset::euclidean, WarpPreset::hyperbolic, WarpPreset::schwarzschild3, WarpPreset::saturating,
                 WarpPreset::power})
    if (to_string(p) == s) return p;
  throw ArgumentError("unknown warp preset '" + s + "'");
}

/// Closed interval [lo, hi] for sampling, or open interval (lo, hi) for domains.
struct Interval {
  double lo = 0;
  double hi = 0;
  bool contains_open(double x) const { return x > lo && x < hi; }
};

/// h, h', h'' at one radius.
struct WarpValues {
  double h = 0;
  double dh = 0;
  double ddh = 0;
};

/// Everything the flow needs at a node, recovered from the potential value.
struct WarpSample {
  double r = 0;
  double h = 0;
  double dh = 0;
  double ddh = 0;
};

struct WarpParams {
  double m = 0.5;         // schwarzschild3 mass
  double h_anchor = 0.0;  // schwarzschild3: h(r = 0); 0 selects 3m
  double a = 2.0;         // saturating: h' = a - b (1 + r)^-k
  double b = 1.0;
  double k = 1.0;
  double h0 = 0.0;  // saturating: h(0)
  double p = 1.0;   // power: h = r^p
};

namespace detail {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// Quintic Hermite basis on t in [0,1]; values and first derivatives.
inline void quintic_basis(double t, double (&b)[6], double (&db)[6]) {
  const double t2 = t * t, t3 = t2 * t, t4 = t3 * t, t5 = t4 * t;
  b[0] = 1 - 10 * t3 + 15 * t4 - 6 * t5;
  b[1] = t - 6 * t3 + 8 * t4 - 3 * t5;
  b[2] = 0.5 * t2 - 1.5 * t3 + 1.5 * t4 - 0.5 * t5;
  b[3] = 0.5 * t3 - t4 + 0.5 * t5;
  b[4] = -4 * t3 + 7 * t4 - 3 * t5;
  b[5] = 10 * t3 - 15 * t4 + 6 * t5;
  db[0] = -30 * t2 + 60 * t3 - 30 * t4;
  db[1] = 1 - 18 * t2 + 32 * t3 - 15 * t4;
  db[2] = t - 4.5 * t2 + 6 * t3 - 2.5 * t4;
  db[3] = 1.5 * t2 - 4 * t3 + 2.5 * t4;
  db[4] = -12 * t2 + 28 * t3 - 15 * t4;
  db[5] = 30 * t2 - 60 * t3 + 30 * t4;
}

// Monotone increasing function y(s) tabulated on a uniform s-grid with y, y', y''
// at the nodes; quintic Hermite between nodes, Newton/bisection for the inverse.
class QuinticTable {
 public:
  QuinticTable(double s0, double ds, std::vector<double> y, std::vector<double> dy, std::vector<double> ddy)
      : s0_(s0), ds_(ds), y_(std::move(y)), dy_(std::move(dy)), ddy_(std::move(ddy)) {}

  double s_min() const { return s0_; }
  double s_max() const { return s0_ + ds_ * double(y_.size() - 1); }
  double y_min() const { return y_.front(); }
  double y_max() const { return y_.back(); }

  double value(double s) const {
    auto [i, t] = locate(s);
    double b[6], db[6];
    quintic_basis(t, b, db);
    return eval(i, b);
  }

  double inverse(double target) const {
    if (!(target >= y_.front() && target <= y_.back())) throw DomainError("potential value outside tabulated range");
    auto it = std::upper_bound(y_.begin(), y_.end(), target);
    std::size_t i = it == y_.begin() ? 0 : std::size_t(it - y_.begin()) - 1;
    if (i >= y_.size() - 1) i = y_.size() - 2;
    double lo = 0, hi = 1;
    double t = (target - y_[i]) / (y_[i + 1] - y_[i]);
    for (int iter = 0; iter < 60; ++iter) {
      double b[6], db[6];
      quintic_basis(t, b, db);
      const double f = eval(i, b) - target;
      if (f > 0) hi = t; else lo = t;
      const double df = eval(i, db);
      double next = df > 0 ? t - f / df : 0.5 * (lo + hi);
      if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
      if (std::abs(next - t) <= 1e-16) { t = next; break; }
      t = next;
    }
    return s0_ + ds_ * (double(i) + t);
  }

 private:
  std::pair<std::size_t, double> locate(double s) const {
    if (!(s >= s_min() && s <= s_max())) throw DomainError("radius outside tabulated range");
    double u = (s - s0_) / ds_;
    std::size_t i = std::min<std::size_t>(std::size_t(u), y_.size() - 2);
    return {i, u - double(i)};
  }
  double eval(std::size_t i, const double (&b)[6]) const {
    return y_[i] * b[0] + ds_ * dy_[i] * b[1] + ds_ * ds_ * ddy_[i] * b[2] + ds_ * ds_ * ddy_[i + 1] * b[3] +
           ds_ * dy_[i + 1] * b[4] + y_[i + 1] * b[5];
  }

  double s0_, ds_;
  std::vector<double> y_, dy_, ddy_;
};

// h(r) for n = 3 Schwarzschild: the closed-form r(h) = G(h) - G(h_anchor) with
// G(h) = sqrt(h (h - 2m)) + 2m ln(sqrt h + sqrt(h - 2m)) inverts dh/dr = sqrt(1 - 2m/h).
// A monotone table in geometric (h - 2m) spacing gives the starting guess,
// Newton on the closed form polishes to rounding.
class SchwarzschildTable {
 public:
  SchwarzschildTable(double m, double h_anchor) : m_(m), G_anchor_(G(h_anchor)) {
    const std::size_t n = 4096;
    const double lo = std::log(1e-12 * m), hi = std::log(1e12 * m + 2 * m);
    r_.resize(n);
    h_.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double x = std::exp(lo + (hi - lo) * double(i) / double(n - 1));
      h_[i] = 2 * m + x;
      r_[i] = G(h_[i]) - G_anchor_;
    }
  }

  double m() const { return m_; }
  double r_horizon() const { return G(2 * m_) - G_anchor_; }
  double G(double h) const {
    const double d = std::max(h - 2 * m_, 0.0);
    return std::sqrt(h * d) + 2 * m_ * std::log(std::sqrt(h) + std::sqrt(d));
  }
  double r_of_h(double h) const { return G(h) - G_anchor_; }
  double dh(double h) const { return std::sqrt(std::max(1.0 - 2 * m_ / h, 0.0)); }

  double h_of_r(double r) const {
    double h;
    if (r <= r_.front()) {
      h = h_.front();
    } else if (r >= r_.back()) {
      h = h_.back() + (r - r_.back());
    } else {
      auto it = std::upper_bound(r_.begin(), r_.end(), r);
      std::size_t i = std::size_t(it - r_.begin()) - 1;
      // cubic Hermite in r using dh/dr at the nodes
      const double dr = r_[i + 1] - r_[i];
      const double t = (r - r_[i]) / dr;
      const double t2 = t * t, t3 = t2 * t;
      h = (2 * t3 - 3 * t2 + 1) * h_[i] + (t3 - 2 * t2 + t) * dr * dh(h_[i]) + (-2 * t3 + 3 * t2) * h_[i + 1] +
          (t3 - t2) * dr * dh(h_[i + 1]);
    }
    const double floor = 2 * m_;
    for (int iter = 0; iter < 50; ++iter) {
      const double f = r_of_h(h) - r;
      double next = h - f * dh(h);
      if (!(next > floor)) next = 0.5 * (h + floor);
      const double step = std::abs(next - h);
      h = next;
      if (step <= 2 * std::numeric_limits<double>::epsilon() * h) break;
    }
    return h;
  }

 private:
  double m_;
  double G_anchor_;
  std::vector<double> r_, h_;
};

}  // namespace detail

/// An immutable warping factor. Cheap to copy; tables are shared.
class WarpSpec {
 public:
  static WarpSpec euclidean() { return WarpSpec(WarpPreset::euclidean, {}); }
  static WarpSpec hyperbolic() { return WarpSpec(WarpPreset::hyperbolic, {}); }

  static WarpSpec schwarzschild3(double m, double h_anchor = 0.0) {
    if (!(m > 0)) throw ArgumentError("schwarzschild3 requires m > 0");
    WarpParams p;
    p.m = m;
    p.h_anchor = h_anchor > 0 ? h_anchor : 3.0 * m;
    if (!(p.h_anchor > 2 * m)) throw ArgumentError("schwarzschild3 anchor must satisfy h > 2m");
    WarpSpec w(WarpPreset::schwarzschild3, p);
    w.schw_ = std::make_shared<const detail::SchwarzschildTable>(p.m, p.h_anchor);
    return w;
  }

  static WarpSpec saturating(double a, double b, double k, double h0 = 0.0) {
    if (!(a > b && b > 0 && k > 0)) throw ArgumentError("saturating requires a > b > 0 and k > 0");
    if (!(h0 >= 0)) throw ArgumentError("saturating requires h(0) >= 0");
    WarpParams p;
    p.a = a;
    p.b = b;
    p.k = k;
    p.h0 = h0;
    WarpSpec w(WarpPreset::saturating, p);
    w.build_potential_table();
    return w;
  }

  static WarpSpec power(double exponent) {
    if (!(exponent >= 1)) throw ArgumentError("power preset requires p >= 1");
    WarpParams p;
    p.p = exponent;
    return WarpSpec(WarpPreset::power, p);
  }

  /// Same warp with the additive constant of Phi chosen so that Phi(r0) = phi0.
  WarpSpec with_phi_anchor(double r0, double phi0) const {
    WarpSpec w = *this;
    w.phi_offset_ = 0;
    w.phi_offset_ = phi0 - w.phi(r0);
    return w;
  }

  WarpPreset preset() const { return preset_; }
  const WarpParams& params() const { return params_; }
  double phi_offset() const { return phi_offset_; }

  std::string name() const { return to_string(preset_); }

  Interval r_domain() const {
    switch (preset_) {
      case WarpPreset::schwarzschild3: return {schw_->r_horizon(), detail::kInf};
      default: return {0.0, detail::kInf};
    }
  }

  /// h, h', h'' at r. Throws DomainError outside r_domain.
  WarpValues eval(double r) const {
    require_radius(r);
    switch (preset_) {
      case WarpPreset::euclidean: return {r, 1.0, 0.0};
      case WarpPreset::hyperbolic: return {std::sinh(r), std::cosh(r), std::sinh(r)};
      case WarpPreset::schwarzschild3: return at_h(schw_->h_of_r(r));
      case WarpPreset::saturating: return eval_saturating_raw(r);
      case WarpPreset::power: {
        const double p = params_.p;
        if (p == 1.0) return {r, 1.0, 0.0};
        return {std::pow(r, p), p * std::pow(r, p - 1), p * (p - 1) * std::pow(r, p - 2)};
      }
    }
    return {};
  }

  /// Phi(r), with Phi' = 1/h.
  double phi(double r) const {
    require_radius(r);
    return natural_phi(r) + phi_offset_;
  }

  /// Image of Phi over r_domain.
  Interval phi_image() const {
    Interval nat;
    switch (preset_) {
      case WarpPreset::euclidean: nat = {-detail::kInf, detail::kInf}; break;
      case WarpPreset::hyperbolic: nat = {-detail::kInf, 0.0}; break;
      case WarpPreset::schwarzschild3: nat = {std::log(2 * params_.m), detail::kInf}; break;
      case WarpPreset::saturating: nat = {sat_->y_min(), sat_->y_max()}; break;
      case WarpPreset::power:
        nat = params_.p == 1.0 ? Interval{-detail::kInf, detail::kInf} : Interval{-detail::kInf, 0.0};
        break;
    }
    return {nat.lo + phi_offset_, nat.hi + phi_offset_};
  }

  /// Inverse of Phi.
  double r_of_phi(double phi_value) const { return at_phi(phi_value).r; }

  /// r together with h, h', h'' from a potential value.
  WarpSample at_phi(double phi_value) const {
    const double x = phi_value - phi_offset_;
    if (!std::isfinite(x)) throw DomainError("non-finite potential value");
    auto out_of_image = [&] { return DomainError("potential value " + std::to_string(phi_value) + " outside image of Phi"); };
    switch (preset_) {
      case WarpPreset::euclidean: {
        const double r = std::exp(x);
        if (!(r > 0) || !std::isfinite(r)) throw out_of_image();
        return {r, r, 1.0, 0.0};
      }
      case WarpPreset::hyperbolic: {
        if (!(x < 0)) throw out_of_image();
        // r = 2 artanh(e^x) = ln((1 + e^x) / (1 - e^x))
        const double r = std::log((1 + std::exp(x)) / -std::expm1(x));
        if (!(r > 0) || !std::isfinite(r)) throw out_of_image();
        return {r, std::sinh(r), std::cosh(r), std::sinh(r)};
      }
      case WarpPreset::schwarzschild3: {
        const double m = params_.m;
        if (!(x > std::log(2 * m))) throw out_of_image();
        const double s = std::exp(0.5 * x);
        const double sq = (s * s + 2 * m) / (2 * s);
        const double h = sq * sq;
        const WarpValues v = at_h(h);
        return {schw_->r_of_h(h), v.h, v.dh, v.ddh};
      }
      case WarpPreset::saturating: {
        const double s = sat_->inverse(x);
        const double r = std::exp(s);
        const WarpValues v = eval(r);
        return {r, v.h, v.dh, v.ddh};
      }
      case WarpPreset::power: {
        const double p = params_.p;
        double r;
        if (p == 1.0) {
          r = std::exp(x);
        } else {
          if (!(x < 0)) throw out_of_image();
          r = std::pow((1 - p) * x, 1 / (1 - p));
        }
        if (!(r > 0) || !std::isfinite(r)) throw out_of_image();
        const WarpValues v = eval(r);
        return {r, v.h, v.dh, v.ddh};
      }
    }
    return {};
  }

  /// Inverse of h (every preset has h' > 0).
  double r_of_h(double hval) const {
    if (!(hval > 0) || !std::isfinite(hval)) throw DomainError("h must be positive and finite");
    switch (preset_) {
      case WarpPreset::euclidean: return hval;
      case WarpPreset::hyperbolic: return std::asinh(hval);
      case WarpPreset::schwarzschild3:
        if (!(hval > 2 * params_.m)) throw DomainError("schwarzschild3 requires h > 2m");
        return schw_->r_of_h(hval);
      case WarpPreset::power: return std::pow(hval, 1 / params_.p);
      case WarpPreset::saturating: {
        if (!(hval > params_.h0)) throw DomainError("saturating: h below h(0)");
        double lo = 0, hi = 1;
        while (eval(hi).h < hval) hi *= 2;
        double r = 0.5 * (lo + hi);
        for (int i = 0; i < 200; ++i) {
          const WarpValues v = eval(r);
          if (v.h > hval) hi = r; else lo = r;
          double next = r - (v.h - hval) / v.dh;
          if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
          if (std::abs(next - r) <= 1e-16 * r) return next;
          r = next;
        }
        return r;
      }
    }
    return 0;
  }

  /// Ambient dimension forced by the preset (0 when any n works).
  int required_ambient_dim() const { return preset_ == WarpPreset::schwarzschild3 ? 3 : 0; }

 private:
  WarpSpec(WarpPreset p, WarpParams params) : preset_(p), params_(params) {}

  void require_radius(double r) const {
    const Interval d = r_domain();
    if (!d.contains_open(r) || !std::isfinite(r))
      throw DomainError(name() + ": radius " + std::to_string(r) + " outside warp domain");
  }

  WarpValues at_h(double h) const {
    // n = 3: h' = sqrt(1 - 2m/h), h'' = m/h^2
    const double m = params_.m;
    return {h, std::sqrt(1.0 - 2 * m / h), m / (h * h)};
  }

  double natural_phi(double r) const {
    switch (preset_) {
      case WarpPreset::euclidean: return std::log(r);
      case WarpPreset::hyperbolic: return std::log1p(-2.0 / (std::exp(r) + 1.0));  // ln tanh(r/2)
      case WarpPreset::schwarzschild3: {
        const double h = schw_->h_of_r(r);
        return 2 * std::log(std::sqrt(h) + std::sqrt(h - 2 * params_.m));
      }
      case WarpPreset::saturating: return sat_->value(std::log(r));
      case WarpPreset::power:
        return params_.p == 1.0 ? std::log(r) : std::pow(r, 1 - params_.p) / (1 - params_.p);
    }
    return 0;
  }

  // Phi(e^s) on a uniform s-grid anchored at Phi(1) = 0, node values by Gauss-Kronrod per cell.
  void build_potential_table() {
    const std::size_t half = 4096;
    const double L = 28.0;
    const double ds = L / double(half);
    const std::size_t n = 2 * half + 1;
    std::vector<double> y(n), dy(n), ddy(n);
    auto h_of = [this](double r) { return eval_saturating_raw(r); };
    auto integrand = [&](double s) {
      const double r = std::exp(s);
      return r / h_of(r).h;
    };
    for (std::size_t i = 0; i < n; ++i) {
      const double s = -L + ds * double(i);
      const double r = std::exp(s);
      const WarpValues v = h_of(r);
      dy[i] = r / v.h;
      ddy[i] = r / v.h - r * r * v.dh / (v.h * v.h);
    }
    using GK = boost::math::quadrature::gauss_kronrod<double, 21>;
    y[half] = 0.0;
    for (std::size_t i = half; i + 1 < n; ++i) {
      const double a = -L + ds * double(i);
      y[i + 1] = y[i] + GK::integrate(integrand, a, a + ds, 5, 1e-15);
    }
    for (std::size_t i = half; i > 0; --i) {
      const double b = -L + ds * double(i);
      y[i - 1] = y[i] - GK::integrate(integrand, b - ds, b, 5, 1e-15);
    }
    sat_ = std::make_shared<const detail::QuinticTable>(-L, ds, std::move(y), std::move(dy), std::move(ddy));
  }

  WarpValues eval_saturating_raw(double r) const {
    const double a = params_.a, b = params_.b, k = params_.k;
    const double l1p = std::log1p(r);
    const double integral = k == 1.0 ? l1p : std::expm1((1 - k) * l1p) / (1 - k);
    const double pw = std::exp(-k * l1p);
    return {params_.h0 + a * r - b * integral, a - b * pw, k * b * pw / (1 + r)};
  }

  WarpPreset preset_;
  WarpParams params_;
  double phi_offset_ = 0.0;
  std::shared_ptr<const detail::SchwarzschildTable> schw_;
  std::shared_ptr<const detail::QuinticTable> sat_;
};

inline WarpValues eval_warp(const WarpSpec& spec, double r) { return spec.eval(r); }
inline double radial_potential(const WarpSpec& spec, double r) { return spec.phi(r); }
inline double r_of_phi(const WarpSpec& spec, double phi) { return spec.r_of_phi(phi); }

// ---------------------------------------------------------------------------
// Hypothesis checks

/// One sampled violation of a named inequality.
struct Witness {
  std::string flag;        // c1_weak, c1_strict, c5_bounded
  std::string inequality;  // e.g. "h'' >= 0"
  double r = 0;
  double value = 0;  // slack of the inequality at r (negative means violated)
};

struct ConditionReport {
  bool c1_weak = false;    // h' > 0, h'' >= 0
  bool c1_strict = false;  // h' > 0, h'' > 0, h h'' - h'^2 + rho >= 0
  bool c5_bounded = false; // C >= h' > 0, C >= h^(1+alpha) h'' >= 0
  Interval interval;
  double rho = 0, C = 0, alpha = 0;
  std::vector<Witness> witnesses;
};

inline constexpr std::size_t kConditionSamples = 10001;

/// Dense sampling of the three hypothesis classes on [r_lo, r_hi].
inline ConditionReport check_conditions(const WarpSpec& spec, Interval interval, double rho, double C, double alpha) {
  if (!(interval.hi > interval.lo)) throw ArgumentError("check_conditions: empty interval");
  const Interval dom = spec.r_domain();
  if (!(interval.lo > dom.lo && interval.hi < dom.hi))
    throw DomainError("check_conditions: interval not inside the warp domain");

  ConditionReport rep;
  rep.interval = interval;
  rep.rho = rho;
  rep.C = C;
  rep.alpha = alpha;

  struct Worst {
    std::string inequality;
    double r = 0;
    double slack = 0;
    bool violated = false;
    // called only for violated samples; keeps the most negative slack
    void see(const char* ineq, double r_, double s) {
      if (!violated || s < slack) {
        inequality = ineq;
        r = r_;
        slack = s;
        violated = true;
      }
    }
  } weak, strict, bounded;

  const std::size_t n = kConditionSamples;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = i + 1 == n ? interval.hi : interval.lo + (interval.hi - interval.lo) * double(i) / double(n - 1);
    const WarpValues v = spec.eval(r);
    const double curv = v.h * v.ddh - v.dh * v.dh + rho;
    const double curv_tol = 64 * std::numeric_limits<double>::epsilon() *
                            (std::abs(v.h * v.ddh) + v.dh * v.dh + std::abs(rho));
    const double weighted = std::pow(v.h, 1 + alpha) * v.ddh;

    if (!(v.dh > 0)) weak.see("h' > 0", r, v.dh);
    if (!(v.ddh >= 0)) weak.see("h'' >= 0", r, v.ddh);

    if (!(v.dh > 0)) strict.see("h' > 0", r, v.dh);
    if (!(v.ddh > 0)) strict.see("h'' > 0", r, v.ddh);
    if (!(curv >= -curv_tol)) strict.see("h h'' - h'^2 + rho >= 0", r, curv);

    if (!(v.dh > 0)) bounded.see("h' > 0", r, v.dh);
    if (!(C >= v.dh)) bounded.see("C >= h'", r, C - v.dh);
    if (!(weighted >= 0)) bounded.see("h^(1+alpha) h'' >= 0", r, weighted);
    if (!(C >= weighted)) bounded.see("C >= h^(1+alpha) h''", r, C - weighted);
  }
  rep.c1_weak = !weak.violated;
  rep.c1_strict = !strict.violated;
  rep.c5_bounded = !bounded.violated;
  if (weak.violated) rep.witnesses.push_back({"c1_weak", weak.inequality, weak.r, weak.slack});
  if (strict.violated) rep.witnesses.push_back({"c1_strict", strict.inequality, strict.r, strict.slack});
  if (bounded.violated) rep.witnesses.push_back({"c5_bounded", bounded.inequality, bounded.r, bounded.slack});
  return rep;
}

/// Re-evaluates a witness; true when the named inequality is indeed violated at w.r.
inline bool witness_holds(const WarpSpec& spec, const ConditionReport& rep, const Witness& w) {
  const WarpValues v = spec.eval(w.r);
  const double weighted = std::pow(v.h, 1 + rep.alpha) * v.ddh;
  if (w.inequality == "h' > 0") return !(v.dh > 0);
  if (w.inequality == "h'' >= 0") return !(v.ddh >= 0);
  if (w.inequality == "h'' > 0") return !(v.ddh > 0);
  if (w.inequality == "h h'' - h'^2 + rho >= 0") return v.h * v.ddh - v.dh * v.dh + rep.rho < 0;
  if (w.inequality == "C >= h'") return !(rep.C >= v.dh);
  if (w.inequality == "h^(1+alpha) h'' >= 0") return !(weighted >= 0);
  if (w.inequality == "C >= h^(1+alpha) h''") return !(rep.C >= weighted);
  return false;
}

/// inf of h''/h over [r_lo, r_hi]: dense sampling, then Brent refinement around an interior minimum.
inline double infimum_h0(const WarpSpec& spec, Interval interval) {
  if (!(interval.hi >= interval.lo)) throw ArgumentError("infimum_h0: empty interval");
  const Interval dom = spec.r_domain();
  if (!(interval.lo > dom.lo && interval.hi < dom.hi)) throw DomainError("infimum_h0: interval not inside warp domain");
  auto ratio = [&](double r) {
    const WarpValues v = spec.eval(r);
    return v.ddh / v.h;
  };
  if (interval.hi == interval.lo) return std::max(0.0, ratio(interval.lo));
  const std::size_t n = kConditionSamples;
  std::size_t best_i = 0;
  double best = detail::kInf;
  std::vector<double> rs(n);
  for (std::size_t i = 0; i < n; ++i) {
    rs[i] = i + 1 == n ? interval.hi : interval.lo + (interval.hi - interval.lo) * double(i) / double(n - 1);
    const double q = ratio(rs[i]);
    if (q < best) {
      best = q;
      best_i = i;
    }
  }
  if (best_i > 0 && best_i + 1 < n) {
    auto [r_min, q_min] = boost::math::tools::brent_find_minima(ratio, rs[best_i - 1], rs[best_i + 1], 52);
    (void)r_min;
    best = std::min(best, q_min);
  }
  return std::max(0.0, best);
}

}  // namespace imcf
