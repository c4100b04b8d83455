// Acceptance driver: `imcf_acceptance <criterion|all> <fixtures_dir> <out_dir>`.
// Prints one PASS/FAIL line per criterion and exits nonzero if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <sstream>

#include "imcf/imcf.hpp"

using namespace imcf;
namespace fs = std::filesystem;

namespace {

struct Result {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) pass = false;
    if (!detail.empty()) detail += "; ";
    detail += (ok ? "" : "FAILED ") + what;
  }
  void merge(const Result& sub) {
    pass = pass && sub.pass;
    if (!detail.empty()) detail += "; ";
    detail += sub.detail;
  }
};

struct Context {
  fs::path fixtures, out;
};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

struct FixtureRun {
  cli::RunOutcome outcome;
  double seconds = 0;
  fs::path dir;
};

FixtureRun run_fixture(const Context& ctx, const std::string& name, const std::string& subdir = {}) {
  const ConfigMap m = load_config_file((ctx.fixtures / (name + ".cfg")).string());
  FixtureRun r;
  r.dir = ctx.out / (subdir.empty() ? name : subdir);
  const auto t0 = std::chrono::steady_clock::now();
  r.outcome = cli::execute_run(m, r.dir);
  r.seconds = seconds_since(t0);
  return r;
}

const CheckReport* find_report(const cli::RunOutcome& o, const std::string& id) {
  for (const auto& r : o.reports)
    if (r.check_id == id) return &r;
  return nullptr;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

// --- criterion 1 --------------------------------------------------------

Result criterion_1(const Context& ctx) {
  Result res;
  double total = 0;
  for (const char* preset : {"euclidean", "hyperbolic", "schwarzschild3", "saturating"}) {
    const auto r = run_fixture(ctx, std::string("c1_point_") + preset);
    total += r.seconds;
    const auto& rows = r.outcome.trace.rows;
    const double d = r.outcome.trace.base->dim();
    double worst = 0;
    for (const auto& row : rows)
      worst = std::max(worst, std::abs(row.max_h * std::exp(-row.t / d) - rows.front().max_h) / rows.front().max_h);
    const bool reached = r.outcome.trace.completed() && std::abs(rows.back().t - 5.0) < 1e-12;
    res.require(reached && worst < 1e-8 && r.outcome.exit_code == cli::kOk,
                std::string(preset) + " max rel dev " + num(worst));
  }
  res.require(total < 1.0, "runtime " + num(total) + " s");
  return res;
}

// --- criterion 2 --------------------------------------------------------

Result criterion_2(const Context& ctx) {
  Result res;
  const auto r = run_fixture(ctx, "c2_axisphere_growth");
  const auto* g = find_report(r.outcome, "growth_and_support");
  res.require(g && g->pass, "growth sandwich margin " + num(g ? g->margin : NAN));
  double min_H = INFINITY;
  for (const auto& row : r.outcome.trace.rows) min_H = std::min(min_H, row.min_H);
  res.require(r.outcome.trace.completed() && min_H > 0, "min H " + num(min_H));
  res.require(r.seconds < 30, "runtime " + num(r.seconds) + " s");
  return res;
}

// --- criterion 3 --------------------------------------------------------

Result criterion_3(const Context& ctx) {
  Result res;
  const double f1 = h_floor(2, 1, 2, 0.1, 1.0), f2 = h_floor(2, 1, 2, 0.1, 2.0), f5 = h_floor(2, 1, 2, 0.1, 5.0);
  res.require(std::abs(f1 - 0.09589) / 0.09589 < 5e-4, "floor(t=1) " + num(f1));
  res.require(std::abs(f2 - 0.13561) / 0.13561 < 5e-4 && f5 == f2, "floor(t>=2) " + num(f2));
  for (const char* name : {"c3_schwarzschild_point", "c3_schwarzschild_axisphere"}) {
    const auto r = run_fixture(ctx, name);
    const auto* h = find_report(r.outcome, "H_floor");
    res.require(h && h->applicable && h->pass && h->margin > 0 && r.outcome.trace.completed(),
                std::string(name) + " margin " + num(h ? h->margin : NAN));
  }
  return res;
}

// --- criterion 4 --------------------------------------------------------

Result roundness(const Context& ctx, const std::string& name) {
  Result res;
  const auto r = run_fixture(ctx, name);
  const auto* a = find_report(r.outcome, "asymptotics");
  if (!a || !a->applicable) {
    res.require(false, name + " asymptotics not evaluated");
    return res;
  }
  const double osc = a->details["terminal_osc"].get<double>();
  res.require(osc < 1e-3, name + " osc(8) " + num(osc));
  const auto& rates = a->details["rates"];
  for (const char* q : {"max_grad_phi", "max_hess_phi", "shape_deviation"}) {
    const auto& v = rates[q]["rate"];
    const bool ok = v.is_string() || v.get<double>() > 0;
    res.require(ok, std::string(q) + " rate " + (v.is_string() ? v.get<std::string>() : num(v.get<double>())));
  }
  res.require(r.seconds < 60, "runtime " + num(r.seconds) + " s");
  return res;
}

Result criterion_4(const Context& ctx) {
  Result res;
  for (const char* name : {"c4_roundness_euclidean", "c4_roundness_saturating"}) {
    res.merge(roundness(ctx, name));
  }
  return res;
}

// --- criterion 5 --------------------------------------------------------

Result criterion_5a(const Context& ctx) {
  Result res;
  const auto r = run_fixture(ctx, "c5_obstruction_hyperbolic");
  const auto* a = find_report(r.outcome, "asymptotics");
  const double osc = a && a->applicable ? a->details["terminal_osc"].get<double>() : NAN;
  res.require(a && a->pass && osc > 1e-2, "hyperbolic osc(8) " + num(osc));
  return res;
}

Result criterion_5b(const Context& ctx) {
  return roundness(ctx, "c5_contrast_euclidean");
}

// --- criterion 6 --------------------------------------------------------

GraphState axisphere_state(int M, const std::function<double(double)>& r) {
  auto base = make_base(BaseManifold::axisphere(M));
  ScalarField rr(base->size());
  for (std::size_t j = 0; j < rr.size(); ++j) rr[j] = r(base->coord(j)[0]);
  return state_from_radius(base, WarpSpec::euclidean(), rr);
}

double oracle_error(int M) {
  const auto s = axisphere_state(M, [](double t) { return 2 + 0.1 * std::cos(t); });
  const auto g = snapshot(s);
  const auto H = embedding_oracle_H(s);
  double e = 0;
  for (std::size_t j = 0; j < H.size(); ++j) e = std::max(e, std::abs(g.H[j] - H[j]) / std::abs(H[j]));
  return e;
}

double offcenter_error(int M) {
  const auto s = axisphere_state(M, [](double t) {
    const double R = 2, c = 0.3, sn = std::sin(t);
    return c * std::cos(t) + std::sqrt(R * R - c * c * sn * sn);
  });
  const auto g = snapshot(s);
  double e = 0;
  for (double H : g.H) e = std::max(e, std::abs(H - 1.0));
  return e;
}

Result criterion_6(const Context&) {
  Result res;
  const double e200 = oracle_error(200), e400 = oracle_error(400);
  res.require(e200 < 1e-3, "oracle M=200 " + num(e200));
  res.require(std::abs(e200 / e400 - 4) <= 0.8, "ratio 200/400 " + num(e200 / e400));
  const double o200 = offcenter_error(200), o400 = offcenter_error(400);
  res.require(o200 < 1e-3, "off-center |H-1| M=200 " + num(o200));
  res.require(std::abs(o200 / o400 - 4) <= 0.8, "off-center ratio " + num(o200 / o400));
  return res;
}

// --- criterion 7 --------------------------------------------------------

Result criterion_7(const Context& ctx) {
  Result res;
  const auto grid = run_fixture(ctx, "c7_residuals_axisphere");
  const auto* g = find_report(grid.outcome, "evolution_residuals");
  for (const char* id : {"omega_eq", "tw_eq"}) {
    const auto& e = g ? g->details["identities"][id] : json();
    const bool ok = e.contains("ratio") && e["ratio"].get<double>() >= 2.0;
    res.require(ok, std::string("axisphere ") + id + " ratio " + (e.contains("ratio") ? num(e["ratio"].get<double>()) : "n/a"));
  }
  res.require(g && g->pass, "axisphere report");
  const auto point = run_fixture(ctx, "c7_residuals_point");
  const auto* p = find_report(point.outcome, "evolution_residuals");
  for (const char* id : {"omega_eq", "tw_eq"}) {
    const auto& e = p ? p->details["identities"][id] : json();
    const bool ok = e.contains("residual") && e["residual"].get<double>() < 1e-10;
    res.require(ok, std::string("point ") + id + " residual " +
                        (e.contains("residual") ? num(e["residual"].get<double>()) : "n/a"));
  }
  return res;
}

// --- criterion 8 --------------------------------------------------------

struct InvariantStats {
  int states = 0;
  double theta_min = 1, theta_max = 0;
  double cs_slack = INFINITY;  // min (A2 d - H^2) / H^2
  double trace_err = 0, metric_err = 0, ricci_err = 0;
  int flat_states = 0;
};

ScalarField random_radius(const BaseManifold& b, double r0, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> amp(-0.12, 0.12), phase(0, 6.283185307179586);
  std::array<double, 4> a{};
  for (auto& x : a) x = amp(rng);
  const double p0 = phase(rng), p1 = phase(rng);
  ScalarField r(b.size());
  for (std::size_t j = 0; j < r.size(); ++j) {
    const Vec2 x = b.coord(j);
    double v = 0;
    switch (b.kind()) {
      case BaseKind::point: v = a[0]; break;
      case BaseKind::circle:
        v = a[0] * std::cos(x[0] + p0) + a[1] * std::cos(2 * x[0] + p1) + a[2] * std::sin(3 * x[0]) + a[3] * std::cos(5 * x[0]);
        break;
      case BaseKind::axisphere:
        v = a[0] * b.cos_theta(j) + a[1] * std::cos(2 * x[0]) + a[2] * std::cos(3 * x[0]) + a[3] * std::cos(4 * x[0]);
        break;
      case BaseKind::torus2:
        v = a[0] * std::cos(x[0] + p0) + a[1] * std::sin(x[1] + p1) + a[2] * std::cos(x[0] + x[1]) + a[3] * std::sin(2 * x[0] - x[1]);
        break;
    }
    r[j] = r0 * (1 + v);
  }
  return r;
}

void accumulate(const GraphState& s, InvariantStats& st) {
  const auto g = snapshot(s);
  const auto [gm, gi] = induced_metric(s);
  const BaseManifold& b = *s.base;
  const double d = b.dim();
  // h = r gives flat space only over a base with Ric_N = (n - 2) sigma
  const bool flat = s.warp.preset() == WarpPreset::euclidean && b.ricci_coefficient() == d - 1;
  if (flat) ++st.flat_states;
  for (std::size_t j = 0; j < g.size(); ++j) {
    st.theta_min = std::min(st.theta_min, g.theta[j]);
    st.theta_max = std::max(st.theta_max, g.theta[j]);
    const double H2 = g.H[j] * g.H[j];
    if (H2 > 0) st.cs_slack = std::min(st.cs_slack, (g.A2[j] * d - H2) / H2);
    const double iso = b.extra_dims() * g.theta[j] * g.dh[j] / g.h[j];
    st.trace_err = std::max(st.trace_err, std::abs(g.shape[j].trace() + iso - g.H[j]) / (1 + std::abs(g.H[j])));
    const Mat2 P = detail::mul(gi[j], gm[j]);
    const double scale = std::max(1.0, std::abs(gi[j].xx * gm[j].xx) + std::abs(gi[j].xy * gm[j].xy));
    std::vector<double> errs{std::abs(P.a00 - 1), std::abs(P.a01), std::abs(P.a10)};
    if (b.frame_dims() == 2) errs.push_back(std::abs(P.a11 - 1));
    for (double e : errs) st.metric_err = std::max(st.metric_err, e / scale);
    if (flat) st.ricci_err = std::max({st.ricci_err, std::abs(g.ric_vv[j]), std::abs(g.ric_rr[j])});
  }
  ++st.states;
}

Result criterion_8(const Context&) {
  Result res;
  std::mt19937_64 rng(20240601);
  const std::vector<WarpSpec> warps{WarpSpec::euclidean(), WarpSpec::hyperbolic(), WarpSpec::saturating(2, 1, 1),
                                    WarpSpec::schwarzschild3(0.5), WarpSpec::power(2)};
  std::map<std::string, InvariantStats> per;
  const int kStates = 60;
  for (int i = 0; i < kStates; ++i) {
    std::uniform_int_distribution<int> dim(2, 4);
    const int pd = dim(rng);
    const std::vector<BasePtr> bases{make_base(BaseManifold::point(pd, 1.0)), make_base(BaseManifold::circle(96)),
                                     make_base(BaseManifold::axisphere(96)), make_base(BaseManifold::torus2(24))};
    for (const auto& b : bases) {
      WarpSpec w = warps[std::size_t(i) % warps.size()];
      if (w.required_ambient_dim() && w.required_ambient_dim() != b->ambient_dim()) w = WarpSpec::euclidean();
      const double r0 = std::max(w.r_domain().lo, 0.0) + 1.5;
      accumulate(state_from_radius(b, w, random_radius(*b, r0, rng)), per[b->name()]);
    }
  }
  for (const auto& [name, st] : per) {
    res.require(st.states >= 50 && st.theta_min > 0 && st.theta_max <= 1, name + " Theta in (0,1] over " +
                                                                               std::to_string(st.states) + " states");
    res.require(st.cs_slack >= -1e-12, name + " A2 d >= H^2 slack " + num(st.cs_slack));
    res.require(st.trace_err <= 1e-12, name + " trace err " + num(st.trace_err));
    res.require(st.metric_err <= 1e-12, name + " g g^-1 err " + num(st.metric_err));
    if (st.flat_states > 0)
      res.require(st.ricci_err <= 1e-12, name + " flat Ricci " + num(st.ricci_err) + " over " +
                                             std::to_string(st.flat_states) + " euclidean states");
    else
      res.require(true, name + " flat Ricci n/a (euclidean warp over this base is not flat)");
  }
  // commuting residual order on random smooth axisymmetric fields
  double worst_order = INFINITY;
  std::uniform_real_distribution<double> amp(-1, 1);
  for (int i = 0; i < 50; ++i) {
    const double a1 = amp(rng), a2 = amp(rng), a3 = amp(rng);
    auto field = [&](const BaseManifold& b) {
      ScalarField f(b.size());
      for (std::size_t j = 0; j < f.size(); ++j) {
        const double t = b.coord(j)[0];
        f[j] = a1 * b.cos_theta(j) + a2 * std::cos(2 * t) + a3 * std::cos(3 * t);
      }
      return f;
    };
    const auto b1 = BaseManifold::axisphere(100), b2 = BaseManifold::axisphere(200);
    const double r1 = b1.commuting_residual(field(b1)), r2 = b2.commuting_residual(field(b2));
    worst_order = std::min(worst_order, std::log2(r1 / r2));
  }
  res.require(worst_order >= 1.7, "axisphere commuting residual order >= " + num(worst_order));
  return res;
}

// --- criterion 9 --------------------------------------------------------

Result criterion_9(const Context& ctx) {
  Result res;
  const auto a = run_fixture(ctx, "c9_determinism", "c9_determinism_a");
  const auto b = run_fixture(ctx, "c9_determinism", "c9_determinism_b");
  res.require(slurp(a.dir / "trace.csv") == slurp(b.dir / "trace.csv"), "trace.csv identical");
  res.require(slurp(a.dir / "report.json") == slurp(b.dir / "report.json"), "report.json identical");
  res.require(a.outcome.exit_code == b.outcome.exit_code, "exit codes " + std::to_string(a.outcome.exit_code));
  return res;
}

}  // namespace

int main(int argc, char** argv) {
  if (argc != 4) {
    std::cerr << "usage: imcf_acceptance <1|2|3|4|5a|5b|6|7|8|9|all> <fixtures_dir> <out_dir>\n";
    return 2;
  }
  const std::string which = argv[1];
  const Context ctx{argv[2], argv[3]};
  const std::vector<std::pair<std::string, std::function<Result(const Context&)>>> table{
      {"1", criterion_1},   {"2", criterion_2}, {"3", criterion_3}, {"4", criterion_4}, {"5a", criterion_5a},
      {"5b", criterion_5b}, {"6", criterion_6}, {"7", criterion_7}, {"8", criterion_8}, {"9", criterion_9}};
  bool all_pass = true, matched = false;
  for (const auto& [id, fn] : table) {
    if (which != "all" && which != id) continue;
    matched = true;
    Result r;
    try {
      r = fn(ctx);
    } catch (const std::exception& e) {
      r.pass = false;
      r.detail = std::string("exception: ") + e.what();
    }
    std::cout << "criterion " << id << ": " << (r.pass ? "PASS" : "FAIL") << " | " << r.detail << std::endl;
    all_pass = all_pass && r.pass;
  }
  if (!matched) {
    std::cerr << "unknown criterion '" << which << "'\n";
    return 2;
  }
  return all_pass ? 0 : 1;
}
