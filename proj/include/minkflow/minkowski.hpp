#pragma once

#include <optional>
#include <string>
#include <vector>

#include "minkflow/flow.hpp"

namespace minkflow {

/// L_p Minkowski problem u^{1-p} sigma_n(u) = phi on S^n, p in (-n-1, inf).
struct LpProblem {
  double p = 1.0;
  GridPtr grid;
  ScalarField phi;
};

struct LpOptions {
  double cfl_safety = 0.08;
  double tol_residual = 1e-4;
  double tol_J_rate = 1e-6;
  long max_steps = 60000;
  double polar_filter = 2.0;
  double dt_max = 1e-1;
  int snapshot_every = 0;
  /// Unset: symmetric mode whenever phi is even and the start is origin-symmetric.
  std::optional<bool> symmetric;
};

struct LpSolution {
  SupportField u;
  double c = 0.0;         ///< final eta of the flow
  double residual = 0.0;  ///< sup |u^{1-p} sigma / phi - 1| (phi / c when p = n + 1)
  bool unique_up_to_dilation = false;
  Trajectory trajectory;
};

/// Throws Error(invalid_params) for p outside (-n-1, inf), non-positive phi, or an odd phi
/// when p < n + 1.
void validate(const LpProblem& problem);

/// Runs the flow with alpha = p, beta = 1, f = phi from `initial` (unit sphere if empty) and
/// rescales the limit by c^{1/(1+n-p)}. For p = n + 1 the volume-normalized limit is returned.
LpSolution solve(const LpProblem& problem, const SupportField* initial = nullptr, const LpOptions& opts = {});

/// sup |u^{1-p} sigma_n / phi - 1|.
double lp_residual(const SupportField& u, const ScalarField& phi, double p);

/// phi = u^{1-p} sigma_n(u), so that `body` solves the problem exactly on its grid.
ScalarField manufactured_phi(const SupportField& body, double p);

struct UniquenessReport {
  std::vector<LpSolution> solutions;
  double max_pairwise_distance = 0.0;
};

/// Solves from every start and compares the results (after Z_0 normalization when p = n + 1).
/// Refuses p <= 1, where uniqueness is not expected.
UniquenessReport uniqueness_probe(const LpProblem& problem, const std::vector<SupportField>& starts,
                                  const LpOptions& opts = {});

}  // namespace minkflow
