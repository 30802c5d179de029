#pragma once

#include <string>
#include <vector>

#include "minkflow/functionals.hpp"

namespace minkflow {

struct FlowConfig {
  FlowParams params;
  SupportField initial;

  double dt_init = 0.0;  ///< 0 picks the CFL step
  double dt_min = 1e-12;
  double dt_max = 1e-1;
  double cfl_safety = 0.08;
  double tol_residual = 1e-3;
  double tol_J_rate = 1e-6;
  long max_steps = 20000;
  int renormalize_every = 1;
  bool symmetrize = true;
  int snapshot_every = 0;  ///< 0 keeps only the initial and final bodies

  double eps_convex = 0.0;
  /// Strength c of the longitudinal low-pass on the tendency near the poles; 0 disables it.
  double polar_filter = 2.0;
  long burn_in = 50;

  /// Throws Error(invalid_params | grid_mismatch | size_mismatch) naming the bad field.
  void validate() const;
};

struct FlowState {
  SupportField u;
  CurvatureData curv;
  double t = 0.0;
  long step = 0;
  double dt = 0.0;
  double eta = 0.0;
  double J = 0.0;
  double Z0 = 0.0;
  double residual = 0.0;
  double lambda_min = 0.0;
  double u_min = 0.0;
  double u_max = 0.0;
};

struct TrajectoryRow {
  double t, dt, eta, J, Z0, residual, lambda_min, u_min, u_max;
};

struct Snapshot {
  long step;
  double t;
  SupportField u;
};

enum class FlowStatus { converged, max_steps, step_failure };
const char* to_string(FlowStatus s);

struct Monitors {
  long monotonicity_violations = 0;
  double worst_monotonicity_excess = 0.0;
  long eta_bound_violations = 0;
  long u_bound_violations = 0;
  double max_Z0_drift = 0.0;
  long rejected_steps = 0;
};

struct Trajectory {
  std::vector<TrajectoryRow> rows;
  std::vector<Snapshot> snapshots;
  FlowStatus status = FlowStatus::max_steps;
  std::string failure;
  FlowState final_state;
  Monitors monitors;
  Regime regime = Regime::C;
  /// Set for n = 1, where the flow reduces to a curve-shortening type problem.
  bool planar = false;

  /// Final eta, the soliton constant c in rho = c.
  double c() const { return final_state.eta; }
};

/// Evaluates every diagnostic of a body (throws Error(non_convex) if lambda_min <= eps_convex).
FlowState make_state(SupportField u, const FlowParams& params, double eps_convex = 0.0);

/// u <- (|S^n| / integral(u sigma))^{1/(n+1)} u.
SupportField renormalize(const SupportField& u);

/// clamp(cfl * h_min^2 / max D, dt_min, dt_max) with D = beta f u^alpha sigma^{-beta-1} lambda_max(cofactor).
double choose_dt(const FlowState& state, const FlowConfig& cfg);

/// Tendency of the normalized flow, -f u^alpha sigma^{-beta} + eta u, polar-filtered.
ScalarField tendency(const SupportField& u, const CurvatureData& cd, const FlowParams& params, double filter);

/**
 * One explicit midpoint step of size `dt` (halved on rejection: lambda_min <= eps_convex or u <= 0),
 * followed by symmetrization and renormalization as configured. Throws Error(dt_underflow).
 * `rejections`, if given, counts halvings.
 */
FlowState step(const FlowState& state, const FlowConfig& cfg, double dt, long* rejections = nullptr);
/// Same with dt = choose_dt(state, cfg).
FlowState step(const FlowState& state, const FlowConfig& cfg);

/// Prepares the initial state: polar-filter projection, symmetrization, renormalization.
FlowState initial_state(const FlowConfig& cfg);

/// Runs until convergence, max_steps or a step failure.
Trajectory run(const FlowConfig& cfg);

/// Advances the normalized flow from `state` until time exactly `t_end`.
FlowState run_until(const FlowState& state, const FlowConfig& cfg, double t_end);

/// Unnormalized flow du/dt = -f u^alpha sigma^{-beta}; throws Error(extinction) when
/// min u falls below `u_floor`.
SupportField unnormalized_step(const SupportField& u, const FlowParams& params, double dt, double filter = 2.0,
                               double u_floor = 1e-3);

/// Time step of the unnormalized flow (same CFL rule as choose_dt).
double unnormalized_dt(const SupportField& u, const FlowParams& params, double cfl);

/**
 * tau(t) = integral_0^t (|S^n| / V(s))^{(1 + n beta - alpha)/(n+1)} ds by the trapezoid rule over the
 * given times and volumes (V = integral(u sigma)).
 */
std::vector<double> time_rescale(const std::vector<double>& t, const std::vector<double>& volume, const FlowParams& params);

/// Relative mismatch |FD - closed| / |closed| between a centered difference of Z_{1/beta} over
/// two flow steps of size dt (0 picks the CFL step) and the closed form at the middle state.
double dZp_identity_residual(const SupportField& u, const FlowConfig& cfg, double dt = 0.0);

/// Regime C: relative mismatch between a centered difference of J and entropy_dissipation.
double dissipation_identity_residual(const SupportField& u, const FlowConfig& cfg, double dt = 0.0);

}  // namespace minkflow
