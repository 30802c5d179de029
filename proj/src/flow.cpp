#include "minkflow/flow.hpp"

#include <algorithm>
#include <climits>
#include <cmath>
#include <sstream>

#include "minkflow/error.hpp"
#include "minkflow/parallel.hpp"

namespace minkflow {

namespace {

double max_abs(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

// -f u^alpha sigma^{-beta} (+ eta u when `normalized`), then the polar low-pass.
ScalarField speed(const SupportField& u, const CurvatureData& cd, const FlowParams& params, bool normalized,
                  double filter) {
  const std::size_t n = u.size();
  ScalarField out(n);
  const double e = normalized ? eta(u, cd, params) : 0.0;
  parallel_for(n, [&](std::size_t i) {
    const double v = params.f[i] * std::exp(params.alpha * std::log(u.u[i]) - params.beta * std::log(cd.sigma[i]));
    out[i] = -v + e * u.u[i];
  });
  if (filter > 0.0) polar_filter(*u.grid, out, filter);
  return out;
}

// Returns an empty message when the trial field is admissible.
std::string admissible(std::span<const double> u, const CurvatureData& cd, double eps_convex) {
  for (std::size_t i = 0; i < u.size(); ++i) {
    if (!(u[i] > 0.0) || !std::isfinite(u[i])) {
      std::ostringstream os;
      os << "u = " << u[i] << " at node " << i;
      return os.str();
    }
  }
  if (!(cd.lambda_min > eps_convex)) {
    std::ostringstream os;
    os << "lambda_min = " << cd.lambda_min << " at node " << cd.argmin;
    return os.str();
  }
  return {};
}

SupportField axpy(const SupportField& u, double a, const ScalarField& k) {
  SupportField out = u;
  for (std::size_t i = 0; i < out.u.size(); ++i) out.u[i] += a * k[i];
  return out;
}

double max_diffusivity(const SupportField& u, const CurvatureData& cd, const FlowParams& params) {
  const int n = u.grid->dim();
  double worst = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double lam = n == 1 ? 1.0 : cd.lambda[i][1];
    const double d = params.beta * params.f[i] *
                     std::exp(params.alpha * std::log(u.u[i]) - (params.beta + 1.0) * std::log(cd.sigma[i])) * lam;
    worst = std::max(worst, d);
  }
  return worst;
}

}  // namespace

const char* to_string(FlowStatus s) {
  switch (s) {
    case FlowStatus::converged: return "converged";
    case FlowStatus::max_steps: return "max_steps";
    case FlowStatus::step_failure: return "step_failure";
  }
  return "?";
}

void FlowConfig::validate() const {
  auto bad = [](const std::string& what) { throw Error(ErrorCode::invalid_params, what); };
  if (!initial.grid) bad("initial body has no grid");
  if (initial.u.size() != initial.grid->size()) throw Error(ErrorCode::size_mismatch, "initial body size");
  if (params.f.size() != initial.grid->size()) throw Error(ErrorCode::grid_mismatch, "f is sampled on another grid");
  if (params.n != initial.grid->dim()) throw Error(ErrorCode::grid_mismatch, "params and body disagree on n");
  if (!(dt_min > 0.0)) bad("dt_min must be positive");
  if (!(dt_max >= dt_min)) bad("dt_max must be >= dt_min");
  if (dt_init < 0.0) bad("dt_init must be >= 0");
  if (!(cfl_safety > 0.0)) bad("cfl_safety must be positive");
  if (!(tol_residual > 0.0)) bad("tol_residual must be positive");
  if (!(tol_J_rate > 0.0)) bad("tol_J_rate must be positive");
  if (max_steps < 0) bad("max_steps must be >= 0");
  if (renormalize_every < 1) bad("renormalize_every must be >= 1");
  if (snapshot_every < 0) bad("snapshot_every must be >= 0");
  if (polar_filter < 0.0) bad("polar_filter must be >= 0");
  if (symmetrize) {
    const double asym = antipodal_asymmetry(*initial.grid, initial.u);
    if (asym > 1e-12 * max_abs(initial.u)) {
      bad("symmetric mode needs an origin-symmetric initial body, max |u(x) - u(-x)| = " + std::to_string(asym));
    }
    if (antipodal_asymmetry(*initial.grid, params.f) > 1e-12 * max_abs(params.f)) {
      bad("symmetric mode needs an even f");
    }
  }
}

FlowState make_state(SupportField u, const FlowParams& params, double eps_convex) {
  FlowState s;
  s.curv = curvature_of(*u.grid, u.u);
  const std::string why = admissible(u.u, s.curv, eps_convex);
  if (!why.empty()) throw Error(ErrorCode::non_convex, "inadmissible body: " + why);
  s.u = std::move(u);
  s.eta = eta(s.u, s.curv, params);
  s.J = J(s.u, s.curv, params);
  s.Z0 = Z(0.0, s.u, s.curv, params);
  s.residual = soliton_residual(s.u, s.curv, params);
  s.lambda_min = s.curv.lambda_min;
  const auto [lo, hi] = std::minmax_element(s.u.u.begin(), s.u.u.end());
  s.u_min = *lo;
  s.u_max = *hi;
  return s;
}

SupportField renormalize(const SupportField& u) {
  const CurvatureData cd = curvature_of(*u.grid, u.u);
  ScalarField vol(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) vol[i] = u.u[i] * cd.sigma[i];
  const double v = integrate(*u.grid, vol);
  if (!(v > 0.0)) throw Error(ErrorCode::non_convex, "cannot renormalize a body with non-positive volume");
  const int n = u.grid->dim();
  return scaled(u, std::pow(sphere_area(n) / v, 1.0 / (n + 1)));
}

double choose_dt(const FlowState& state, const FlowConfig& cfg) {
  const double h = state.u.grid->h_min();
  const double d = max_diffusivity(state.u, state.curv, cfg.params);
  const double dt = d > 0.0 ? cfg.cfl_safety * h * h / d : cfg.dt_max;
  return std::clamp(dt, cfg.dt_min, cfg.dt_max);
}

ScalarField tendency(const SupportField& u, const CurvatureData& cd, const FlowParams& params, double filter) {
  return speed(u, cd, params, true, filter);
}

FlowState step(const FlowState& state, const FlowConfig& cfg, double dt, long* rejections) {
  const FlowParams& p = cfg.params;
  const SphereGrid& grid = *state.u.grid;
  const ScalarField k1 = tendency(state.u, state.curv, p, cfg.polar_filter);
  std::string why;
  while (true) {
    if (dt < cfg.dt_min) {
      std::ostringstream os;
      os << "dt fell below dt_min = " << cfg.dt_min << " at t = " << state.t << " (step " << state.step + 1
         << "): " << why;
      throw Error(ErrorCode::dt_underflow, os.str());
    }
    const SupportField mid = axpy(state.u, 0.5 * dt, k1);
    const CurvatureData cm = curvature_of(grid, mid.u);
    why = admissible(mid.u, cm, cfg.eps_convex);
    if (why.empty()) {
      SupportField next = axpy(state.u, dt, tendency(mid, cm, p, cfg.polar_filter));
      // the state too: filtered tendencies never damp rounding noise in the high pole-row modes
      if (cfg.polar_filter > 0.0) polar_filter(grid, next.u, cfg.polar_filter);
      if (cfg.symmetrize) symmetrize(grid, next.u);
      if ((state.step + 1) % cfg.renormalize_every == 0) {
        const CurvatureData cn = curvature_of(grid, next.u);
        why = admissible(next.u, cn, cfg.eps_convex);
        if (why.empty()) next = renormalize(next);
      }
      if (why.empty()) {
        try {
          FlowState out = make_state(std::move(next), p, cfg.eps_convex);
          out.t = state.t + dt;
          out.step = state.step + 1;
          out.dt = dt;
          return out;
        } catch (const Error& e) {
          if (e.code() != ErrorCode::non_convex) throw;
          why = e.what();
        }
      }
    }
    dt *= 0.5;
    if (rejections) ++*rejections;
  }
}

FlowState step(const FlowState& state, const FlowConfig& cfg) { return step(state, cfg, choose_dt(state, cfg)); }

FlowState initial_state(const FlowConfig& cfg) {
  cfg.validate();
  SupportField u = cfg.initial;
  if (cfg.polar_filter > 0.0) polar_filter(*u.grid, u.u, cfg.polar_filter);
  if (cfg.symmetrize) {
    symmetrize(*u.grid, u.u);
    u.symmetric = true;
  }
  return make_state(renormalize(u), cfg.params, cfg.eps_convex);
}

namespace {

TrajectoryRow row_of(const FlowState& s) {
  return {s.t, s.dt, s.eta, s.J, s.Z0, s.residual, s.lambda_min, s.u_min, s.u_max};
}

bool J_should_increase(Regime r) { return r == Regime::B; }

}  // namespace

Trajectory run(const FlowConfig& cfg) {
  Trajectory tr;
  tr.regime = cfg.params.regime;
  tr.planar = cfg.params.n == 1;
  FlowState s = initial_state(cfg);
  const double area = sphere_area(cfg.params.n);
  tr.rows.push_back(row_of(s));
  tr.snapshots.push_back({s.step, s.t, s.u});
  Monitors& mon = tr.monitors;
  mon.max_Z0_drift = std::abs(s.Z0 - area);
  double eta_bound = s.eta, umax_bound = s.u_max, umin_bound = s.u_min;

  while (true) {
    if (s.step >= cfg.max_steps) {
      tr.status = FlowStatus::max_steps;
      break;
    }
    const double dt = (s.step == 0 && cfg.dt_init > 0.0) ? std::clamp(cfg.dt_init, cfg.dt_min, cfg.dt_max)
                                                           : choose_dt(s, cfg);
    FlowState next;
    try {
      next = step(s, cfg, dt, &mon.rejected_steps);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::dt_underflow && e.code() != ErrorCode::non_convex) throw;
      tr.status = FlowStatus::step_failure;
      tr.failure = e.what();
      break;
    }

    const double tol = 1e-8 * std::abs(s.J) + 1e-10;
    const double change = J_should_increase(tr.regime) ? s.J - next.J : next.J - s.J;
    if (change > tol) {
      ++mon.monotonicity_violations;
      mon.worst_monotonicity_excess = std::max(mon.worst_monotonicity_excess, change);
    }
    if (next.step % cfg.renormalize_every == 0) mon.max_Z0_drift = std::max(mon.max_Z0_drift, std::abs(next.Z0 - area));
    if (next.step > cfg.burn_in) {
      if (next.eta > 2.0 * eta_bound) ++mon.eta_bound_violations;
      if (next.u_max > 2.0 * umax_bound || next.u_min < 0.5 * umin_bound) ++mon.u_bound_violations;
    }
    eta_bound = std::max(eta_bound, next.eta);
    umax_bound = std::max(umax_bound, next.u_max);
    umin_bound = std::min(umin_bound, next.u_min);

    const bool done = next.residual < cfg.tol_residual && std::abs(next.J - s.J) / next.dt < cfg.tol_J_rate;
    s = std::move(next);
    tr.rows.push_back(row_of(s));
    if (cfg.snapshot_every > 0 && s.step % cfg.snapshot_every == 0) tr.snapshots.push_back({s.step, s.t, s.u});
    if (done) {
      tr.status = FlowStatus::converged;
      break;
    }
  }
  if (tr.snapshots.back().step != s.step) tr.snapshots.push_back({s.step, s.t, s.u});
  tr.final_state = std::move(s);
  return tr;
}

FlowState run_until(const FlowState& state, const FlowConfig& cfg, double t_end) {
  FlowState s = state;
  while (s.t < t_end) {
    const double remaining = t_end - s.t;
    const double dt = choose_dt(s, cfg);
    const bool last = dt >= remaining;
    FlowState next = step(s, cfg, last ? remaining : dt);
    if (last && next.dt == remaining) next.t = t_end;
    s = std::move(next);
  }
  return s;
}

double unnormalized_dt(const SupportField& u, const FlowParams& params, double cfl) {
  const CurvatureData cd = curvature_of(*u.grid, u.u);
  const double h = u.grid->h_min();
  return cfl * h * h / max_diffusivity(u, cd, params);
}

SupportField unnormalized_step(const SupportField& u, const FlowParams& params, double dt, double filter,
                               double u_floor) {
  const SphereGrid& grid = *u.grid;
  const CurvatureData c0 = curvature_of(grid, u.u);
  std::string why = admissible(u.u, c0, 0.0);
  if (why.empty()) {
    const SupportField mid = axpy(u, 0.5 * dt, speed(u, c0, params, false, filter));
    const CurvatureData cm = curvature_of(grid, mid.u);
    why = admissible(mid.u, cm, 0.0);
    if (why.empty()) {
      SupportField next = axpy(u, dt, speed(mid, cm, params, false, filter));
      if (filter > 0.0) polar_filter(grid, next.u, filter);
      if (u.symmetric) symmetrize(grid, next.u);
      const double lo = *std::min_element(next.u.begin(), next.u.end());
      if (lo < u_floor) {
        throw Error(ErrorCode::extinction, "min u = " + std::to_string(lo) + " fell below the extinction floor");
      }
      return next;
    }
  }
  throw Error(ErrorCode::non_convex, "unnormalized step lost convexity: " + why);
}

std::vector<double> time_rescale(const std::vector<double>& t, const std::vector<double>& volume,
                                 const FlowParams& params) {
  if (t.size() != volume.size()) throw Error(ErrorCode::size_mismatch, "times and volumes differ in length");
  const int n = params.n;
  const double e = (1.0 + n * params.beta - params.alpha) / (n + 1);
  const double area = sphere_area(n);
  std::vector<double> tau(t.size(), 0.0);
  for (std::size_t k = 1; k < t.size(); ++k) {
    const double g0 = std::pow(area / volume[k - 1], e);
    const double g1 = std::pow(area / volume[k], e);
    tau[k] = tau[k - 1] + 0.5 * (t[k] - t[k - 1]) * (g0 + g1);
  }
  return tau;
}

namespace {

// Two raw steps of the normalized flow (no symmetrization or renormalization) around the
// renormalized body.
struct ThreePoint {
  FlowState s0, s1, s2;
  double dt;
};

ThreePoint three_point(const SupportField& u, const FlowConfig& cfg, double dt) {
  FlowConfig raw = cfg;
  raw.symmetrize = false;
  raw.renormalize_every = INT_MAX;
  ThreePoint tp;
  tp.s0 = make_state(renormalize(u), cfg.params, cfg.eps_convex);
  tp.dt = dt > 0.0 ? dt : choose_dt(tp.s0, cfg);
  tp.s1 = step(tp.s0, raw, tp.dt);
  tp.s2 = step(tp.s1, raw, tp.dt);
  if (tp.s1.dt != tp.dt || tp.s2.dt != tp.dt) throw Error(ErrorCode::dt_underflow, "identity check step was rejected");
  return tp;
}

}  // namespace

double dZp_identity_residual(const SupportField& u, const FlowConfig& cfg, double dt) {
  const ThreePoint tp = three_point(u, cfg, dt);
  const FlowParams& p = cfg.params;
  const double q = 1.0 / p.beta;
  const double fd = (Z(q, tp.s2.u, tp.s2.curv, p) - Z(q, tp.s0.u, tp.s0.curv, p)) / (2.0 * tp.dt);
  const double closed = dZ_closed_form(tp.s1.u, tp.s1.curv, p);
  return std::abs(fd - closed) / std::abs(closed);
}

double dissipation_identity_residual(const SupportField& u, const FlowConfig& cfg, double dt) {
  if (cfg.params.regime != Regime::C) throw Error(ErrorCode::invalid_params, "dissipation identity is for regime C");
  const ThreePoint tp = three_point(u, cfg, dt);
  const FlowParams& p = cfg.params;
  const double fd = (tp.s2.J - tp.s0.J) / (2.0 * tp.dt);
  const double closed = entropy_dissipation(tp.s1.u, tp.s1.curv, p);
  return std::abs(fd - closed) / std::abs(closed);
}

}  // namespace minkflow
