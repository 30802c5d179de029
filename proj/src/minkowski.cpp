#include "minkflow/minkowski.hpp"

#include <algorithm>
#include <cmath>

#include "minkflow/error.hpp"
#include "minkflow/shapes.hpp"

namespace minkflow {

namespace {

bool is_even(const SphereGrid& grid, std::span<const double> g) {
  double m = 0.0;
  for (double v : g) m = std::max(m, std::abs(v));
  return antipodal_asymmetry(grid, g) <= 1e-12 * m;
}

bool critical(const LpProblem& pr) { return std::abs(pr.p - (pr.grid->dim() + 1)) < 1e-12; }

}  // namespace

void validate(const LpProblem& pr) {
  if (!pr.grid) throw Error(ErrorCode::invalid_params, "L_p problem without a grid");
  const int n = pr.grid->dim();
  if (!(pr.p > -n - 1.0) || !std::isfinite(pr.p)) {
    throw Error(ErrorCode::invalid_params, "p = " + std::to_string(pr.p) + " must exceed -n-1 = " +
                                               std::to_string(-n - 1));
  }
  if (pr.phi.size() != pr.grid->size()) throw Error(ErrorCode::size_mismatch, "phi has the wrong number of samples");
  for (std::size_t i = 0; i < pr.phi.size(); ++i) {
    if (!(pr.phi[i] > 0.0) || !std::isfinite(pr.phi[i])) {
      throw Error(ErrorCode::invalid_params, "phi must be positive, phi = " + std::to_string(pr.phi[i]) +
                                                 " at node " + std::to_string(i));
    }
  }
  if (pr.p < n + 1.0 && !critical(pr) && !is_even(*pr.grid, pr.phi)) {
    throw Error(ErrorCode::invalid_params, "phi must be even for p < n + 1");
  }
}

double lp_residual(const SupportField& u, const ScalarField& phi, double p) {
  const CurvatureData cd = curvature_of(*u.grid, u.u);
  double worst = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double lhs = std::exp((1.0 - p) * std::log(u.u[i])) * cd.sigma[i];
    worst = std::max(worst, std::abs(lhs / phi[i] - 1.0));
  }
  return worst;
}

ScalarField manufactured_phi(const SupportField& body, double p) {
  const CurvatureData cd = curvature(body);
  ScalarField phi(body.size());
  for (std::size_t i = 0; i < body.size(); ++i) phi[i] = std::exp((1.0 - p) * std::log(body.u[i])) * cd.sigma[i];
  return phi;
}

LpSolution solve(const LpProblem& pr, const SupportField* initial, const LpOptions& opts) {
  validate(pr);
  const int n = pr.grid->dim();
  const SupportField start = initial ? *initial : make_shape(Shape::sphere(1.0), pr.grid);
  if (!start.grid->same_layout(*pr.grid)) throw Error(ErrorCode::grid_mismatch, "start body lives on another grid");
  const bool even_data = is_even(*pr.grid, pr.phi) && is_even(*pr.grid, start.u);
  const bool sym = opts.symmetric.value_or(even_data);

  FlowConfig cfg;
  cfg.params = FlowParams::make(*pr.grid, pr.p, 1.0, pr.phi, sym);
  cfg.initial = start;
  cfg.symmetrize = sym;
  cfg.cfl_safety = opts.cfl_safety;
  cfg.tol_residual = opts.tol_residual;
  cfg.tol_J_rate = opts.tol_J_rate;
  cfg.max_steps = opts.max_steps;
  cfg.polar_filter = opts.polar_filter;
  cfg.dt_max = opts.dt_max;
  cfg.snapshot_every = opts.snapshot_every;

  LpSolution sol;
  sol.trajectory = run(cfg);
  sol.c = sol.trajectory.c();
  const SupportField& limit = sol.trajectory.final_state.u;
  if (critical(pr)) {
    sol.unique_up_to_dilation = true;
    sol.u = limit;
    ScalarField scaled_phi = pr.phi;
    for (double& v : scaled_phi) v /= sol.c;
    sol.residual = lp_residual(sol.u, scaled_phi, pr.p);
  } else {
    sol.u = scaled(limit, std::pow(sol.c, 1.0 / (1.0 + n - pr.p)));
    sol.residual = lp_residual(sol.u, pr.phi, pr.p);
  }
  return sol;
}

UniquenessReport uniqueness_probe(const LpProblem& pr, const std::vector<SupportField>& starts, const LpOptions& opts) {
  if (!(pr.p > 1.0)) throw Error(ErrorCode::invalid_params, "uniqueness probe needs p > 1");
  if (starts.size() < 2) throw Error(ErrorCode::invalid_params, "uniqueness probe needs at least two starts");
  UniquenessReport rep;
  std::vector<SupportField> aligned;
  for (const SupportField& s : starts) {
    rep.solutions.push_back(solve(pr, &s, opts));
    const SupportField& u = rep.solutions.back().u;
    aligned.push_back(critical(pr) ? renormalize(u) : u);
  }
  for (std::size_t a = 0; a < aligned.size(); ++a) {
    for (std::size_t b = a + 1; b < aligned.size(); ++b) {
      rep.max_pairwise_distance = std::max(rep.max_pairwise_distance, sup_distance(aligned[a], aligned[b]));
    }
  }
  return rep;
}

}  // namespace minkflow
