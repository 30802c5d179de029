// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "minkflow/cli.hpp"
#include "minkflow/error.hpp"
#include "minkflow/flow.hpp"
#include "minkflow/io.hpp"
#include "minkflow/minkowski.hpp"
#include "minkflow/parallel.hpp"
#include "minkflow/shapes.hpp"
#include "minkflow/verify.hpp"

using namespace minkflow;
namespace fs = std::filesystem;

namespace {

constexpr double kPi = std::numbers::pi;
const double kArea = 4 * kPi;

GridPtr grid2(int nt) { return SphereGrid::build(2, nt, 2 * nt); }

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double sup_from(const SupportField& u, double value) {
  double d = 0.0;
  for (double v : u.u) d = std::max(d, std::abs(v - value));
  return d;
}

FlowConfig flow_config(const GridPtr& g, double alpha, double beta, const ScalarField& f, const Shape& start) {
  FlowConfig c;
  c.params = FlowParams::make(*g, alpha, beta, f, true);
  c.initial = make_shape(start, g);
  return c;
}

// Z0 drift gathered from every normalized run below.
double g_z0_drift = 0.0;
long g_z0_rows = 0;

void note_rows(const Trajectory& tr) {
  for (const auto& r : tr.rows) {
    g_z0_drift = std::max(g_z0_drift, std::abs(r.Z0 - kArea));
    ++g_z0_rows;
  }
}

// W_u of the ellipsoid: tangential block of the ambient Hessian of sqrt(y^T A y).
struct CalcErr {
  double hess_rms = 0, hess_max = 0, sigma_rms = 0, sigma_max = 0;
};

CalcErr calculus_error(int nt) {
  const Vec3 ax{1, 1, 2};
  auto g = grid2(nt);
  const SupportField b = make_shape(Shape::ellipsoid(ax), g);
  const CurvatureData cd = curvature(b);
  const double abc2 = std::pow(ax[0] * ax[1] * ax[2], 2);
  CalcErr e;
  for (std::size_t i = 0; i < g->size(); ++i) {
    const Vec3 x = g->node(i);
    const Vec3 et = to_ambient(*g, i, {1, 0}), ep = to_ambient(*g, i, {0, 1});
    const double U = b.u[i];
    Vec3 Ax;
    for (int k = 0; k < 3; ++k) Ax[k] = ax[k] * ax[k] * x[k];
    auto H = [&](const Vec3& a, const Vec3& c) {
      double s = 0;
      for (int k = 0; k < 3; ++k) s += a[k] * c[k] * ax[k] * ax[k];
      return s / U - dot(Ax, a) * dot(Ax, c) / (U * U * U);
    };
    const double dh = std::max({std::abs(cd.W[i].tt - H(et, et)), std::abs(cd.W[i].tp - H(et, ep)),
                                std::abs(cd.W[i].pp - H(ep, ep))});
    const double ds = std::abs(cd.sigma[i] - abc2 / std::pow(U, 4));
    const double w = g->weights()[i];
    e.hess_max = std::max(e.hess_max, dh);
    e.sigma_max = std::max(e.sigma_max, ds);
    e.hess_rms += dh * dh * w;
    e.sigma_rms += ds * ds * w;
  }
  e.hess_rms = std::sqrt(e.hess_rms / kArea);
  e.sigma_rms = std::sqrt(e.sigma_rms / kArea);
  return e;
}

Outcome c1() {
  const CalcErr a = calculus_error(16), b = calculus_error(32), c = calculus_error(64);
  const double h1 = a.hess_rms / b.hess_rms, h2 = b.hess_rms / c.hess_rms;
  const double s1 = a.sigma_rms / b.sigma_rms, s2 = b.sigma_rms / c.sigma_rms;
  const bool ok = std::min({h1, h2, s1, s2}) >= 3.5;
  return {ok, fmt("rms ratios W %.2f %.2f, sigma %.2f %.2f (max-norm sigma %.2f %.2f)", h1, h2, s1, s2,
                  a.sigma_max / b.sigma_max, b.sigma_max / c.sigma_max)};
}

Outcome c2() {
  auto g = grid2(32);
  double worst_res = 0, worst_drift = 0;
  for (auto [a, b] : {std::pair{1.0, 1.0}, {0.0, 1.0}, {3.0, 1.0}}) {
    FlowConfig c = flow_config(g, a, b, ScalarField(g->size(), 1.0), Shape::sphere(1));
    FlowState s = initial_state(c);
    for (int k = 0; k < 100; ++k) {
      FlowState next = step(s, c);
      worst_res = std::max(worst_res, next.residual);
      worst_drift = std::max({worst_drift, sup_distance(next.u, s.u), sup_from(next.u, 1.0)});
      g_z0_drift = std::max(g_z0_drift, std::abs(next.Z0 - kArea));
      ++g_z0_rows;
      s = std::move(next);
    }
  }
  return {worst_res <= 1e-10 && worst_drift <= 1e-10,
          fmt("max residual %.2e, max drift %.2e over 3 x 100 steps", worst_res, worst_drift)};
}

Outcome c3() {
  auto g = grid2(32);
  FlowConfig c = flow_config(g, 0, 1, ScalarField(g->size(), 1.0), Shape::ellipsoid({1, 1, 1.5}));
  c.max_steps = 20000;
  const Trajectory tr = run(c);
  note_rows(tr);
  const double d = sup_from(tr.final_state.u, 1.0);
  const bool ok = tr.status == FlowStatus::converged && tr.final_state.residual < 1e-3 && d <= 2e-3 &&
                  tr.c() >= 0.999 && tr.c() <= 1.001;
  return {ok, fmt("%s after %ld steps, residual %.2e, sup distance %.2e, c = %.6f",
                  to_string(tr.status), tr.final_state.step, tr.final_state.residual, d, tr.c())};
}

Outcome c4() {
  auto g = grid2(32);
  const ScalarField f = sample(*g, [](const Vec3& x) { return 1 + 0.2 * x[2] * x[2]; });
  FlowConfig a = flow_config(g, 1, 1, f, Shape::ellipsoid({1, 1, 1.5}));
  const Trajectory ta = run(a);
  note_rows(ta);
  FlowConfig b = flow_config(g, -1.5, 1, ScalarField(g->size(), 1.0), Shape::ellipsoid({1, 1, 1.5}));
  const Trajectory tb = run(b);
  note_rows(tb);
  FlowConfig c = flow_config(g, 0, 1, ScalarField(g->size(), 1.0), Shape::ellipsoid({1, 1, 1.5}));
  c.max_steps = 2000;
  const Trajectory tc = run(c);
  note_rows(tc);
  const double diss = dissipation_identity_residual(c.initial, c);
  const long va = ta.monitors.monotonicity_violations, vb = tb.monitors.monotonicity_violations,
             vc = tc.monitors.monotonicity_violations;
  const bool ok = va == 0 && vb == 0 && vc == 0 && diss <= 5e-2 && ta.rows.back().J <= ta.rows.front().J &&
                  tb.rows.back().J >= tb.rows.front().J;
  return {ok, fmt("violations A %ld (%ld steps), B %ld (%ld steps), C %ld; dissipation identity %.2e", va,
                  ta.final_state.step, vb, tb.final_state.step, vc, diss)};
}

Outcome c5() {
  std::vector<double> r;
  for (int nt : {16, 32}) {
    auto g = grid2(nt);
    FlowConfig c = flow_config(g, 1, 1, ScalarField(g->size(), 1.0),
                               Shape::perturbed(Shape::sphere(1), 0.1, SpherePolynomial::parse("x3^2 - 1/3")));
    r.push_back(dZp_identity_residual(c.initial, c));
  }
  return {r[1] <= 1e-2 && r[1] < r[0], fmt("residual %.2e at 16x32, %.2e at 32x64", r[0], r[1])};
}

Outcome c6() {
  return {g_z0_rows > 0 && g_z0_drift <= 1e-12,
          fmt("max |Z0 - |S^2|| = %.2e over %ld normalized states", g_z0_drift, g_z0_rows)};
}

Outcome c7() {
  VerifyOptions o;
  o.grid = grid2(32);
  o.samples = 20;
  o.seed = 7;
  o.checks = {"af", "af_psi", "bs", "polar"};
  const VerifyReport rep = run_verify(o);
  std::string d;
  for (const auto& c : rep.checks)
    for (const auto& it : c.items) d += fmt("%s.%s %.2e; ", c.name.c_str(), it.name.c_str(), it.value);
  d.resize(d.size() - 2);
  return {rep.pass(), d};
}

Outcome c8() {
  auto g = grid2(32);
  const SupportField e = make_shape(Shape::ellipsoid({1, 1, 1.3}), g);
  LpOptions opts;
  opts.tol_residual = 1e-5;
  double worst = 0;
  std::string d;
  for (double p : {4.0, 2.0, 3.0}) {
    const LpSolution sol = solve(LpProblem{p, g, manufactured_phi(e, p)}, nullptr, opts);
    const double err = p == 3.0 ? sup_distance(renormalize(sol.u), renormalize(e)) : sup_distance(sol.u, e);
    worst = std::max(worst, err);
    d += fmt("p=%g %.2e (%ld steps); ", p, err, sol.trajectory.final_state.step);
  }
  d.resize(d.size() - 2);
  return {worst <= 5e-3, d};
}

Outcome c9() {
  auto g = grid2(32);
  const ScalarField phi = sample(*g, [](const Vec3& x) { return 1 + 0.3 * x[0] + 0.2 * x[2] * x[2] - 0.1 * x[1]; });
  const std::vector<SupportField> starts{
      make_shape(Shape::translate(Shape::sphere(1), {0.2, 0, 0.1}), g),
      make_shape(Shape::translate(Shape::ellipsoid({1, 0.8, 1.2}), {-0.1, 0.15, 0}), g),
      make_shape(Shape::translate(Shape::ellipsoid({1.3, 1, 0.9}), {0, -0.2, 0.15}), g)};
  const UniquenessReport rep = uniqueness_probe(LpProblem{4.0, g, phi}, starts);
  bool conv = true;
  for (const auto& s : rep.solutions) conv = conv && s.trajectory.status == FlowStatus::converged;
  return {conv && rep.max_pairwise_distance <= 5e-3,
          fmt("3 starts %s, max pairwise sup distance %.2e", conv ? "converged" : "did NOT all converge",
              rep.max_pairwise_distance)};
}

Outcome c10() {
  auto g = grid2(32);
  const FlowParams p = FlowParams::make(*g, 0, 1, ScalarField(g->size(), 1.0), true);
  // sphere collapse down to r = 0.3
  SupportField u = make_shape(Shape::sphere(1), g);
  double t = 0, worst = 0;
  const double t_end = (1 - 0.027) / 3;
  while (t < t_end) {
    const double dt = std::min(unnormalized_dt(u, p, 0.08), t_end - t);
    u = unnormalized_step(u, p, dt);
    t += dt;
    const double r = std::cbrt(1 - 3 * t);
    worst = std::max(worst, sup_from(u, r) / r);
  }

  // ellipsoid: unnormalized run, mapped through tau, against the normalized run
  FlowConfig c = flow_config(g, 0, 1, ScalarField(g->size(), 1.0), Shape::ellipsoid({1, 1, 1.5}));
  FlowState ns = initial_state(c);
  SupportField v = ns.u;
  std::vector<double> ts{0.0}, vols{volume(v)};
  double tt = 0, match = 0;
  int checkpoints = 0;
  for (int k = 1; k <= 2000; ++k) {
    const double dt = unnormalized_dt(v, p, 0.08);
    v = unnormalized_step(v, p, dt);
    tt += dt;
    ts.push_back(tt);
    vols.push_back(volume(v));
    if (k % 400 == 0) {
      const double tau = time_rescale(ts, vols, p).back();
      ns = run_until(ns, c, tau);
      match = std::max(match, sup_distance(renormalize(v), ns.u));
      ++checkpoints;
    }
  }
  return {worst <= 1e-4 && match <= 5e-3,
          fmt("collapse rel. error %.2e to r = 0.3; tau match %.2e at %d checkpoints (volume ratio %.3f)", worst,
              match, checkpoints, vols.back() / vols.front())};
}

Outcome c11() {
  const fs::path dir = fs::temp_directory_path() / "minkflow_acceptance";
  fs::remove_all(dir);
  fs::create_directories(dir);
  write_text((dir / "run.cfg").string(),
             "mode = flow\nn_theta = 16\nalpha = 1\nbeta = 1\nseed = 3\nf = 1 + 0.2*x3^2\n"
             "initial = random_even()\nmax_steps = 300\n");
  std::string summaries[2];
  for (int k = 0; k < 2; ++k) {
    std::ostringstream o, e;
    const fs::path out = dir / ("out" + std::to_string(k));
    const int code = run_command(CliArgs{"flow", (dir / "run.cfg").string(), out.string(), std::nullopt}, o, e);
    if (code != exit_ok && code != exit_max_steps) return {false, "flow command exited " + std::to_string(code)};
    summaries[k] = read_text((out / "summary.json").string());
  }
  const bool same = !summaries[0].empty() && summaries[0] == summaries[1];

  Rng rng(19);
  auto g = grid2(32);
  const SupportField b = make_shape(random_even_shape(rng, 2), g);
  write_body(b, (dir / "b.body").string(), "acceptance");
  const SupportField r = read_body((dir / "b.body").string());
  const bool exact = r.u.size() == b.u.size() && std::memcmp(r.u.data(), b.u.data(), b.u.size() * sizeof(double)) == 0;
  return {same && exact, fmt("summary JSON %s across reruns (%zu bytes); body round trip %s",
                             same ? "identical" : "DIFFERS", summaries[0].size(), exact ? "bit-exact" : "NOT exact")};
}

}  // namespace

int main() {
  apply_thread_cap_from_env();
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"calculus convergence", c1},   {"fixed point exactness", c2}, {"convergence to soliton", c3},
      {"monotonicity suites", c4},    {"dZ_p identity", c5},         {"volume conservation", c6},
      {"inequality oracles", c7},     {"L_p round trips", c8},       {"uniqueness multi-start", c9},
      {"unnormalized consistency", c10}, {"determinism and persistence", c11}};
  int failed = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[k].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (!o.pass) ++failed;
    std::printf("[%s] %2zu %-28s %s [%.1fs]\n", o.pass ? "PASS" : "FAIL", k + 1, criteria[k].first.c_str(),
                o.detail.c_str(), secs);
    std::fflush(stdout);
  }
  std::printf("%zu/%zu criteria passed\n", criteria.size() - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
