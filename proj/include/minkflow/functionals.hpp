#pragma once

#include <string>

#include "minkflow/convex_body.hpp"

namespace minkflow {

/**
 * Parameter regimes of the normalized flow (n = dimension, beta > 0):
 *   A: 1 - beta < alpha < 1 + n beta
 *   B: 1 - n beta - 2 beta < alpha < 1 - beta
 *   C: alpha = 0, beta = 1 (entropy branch)
 *   D: alpha >= 1 + n beta
 */
enum class Regime { A, B, C, D };

const char* to_string(Regime r);

/// Throws Error(invalid_params) for beta <= 0, for alpha = 1 - beta outside regime C, and for
/// alpha <= 1 - n beta - 2 beta.
Regime classify(int n, double alpha, double beta);

/// True for the regimes whose theory assumes origin-symmetric data (A, B, C).
bool requires_even(Regime r);

struct FlowParams {
  double alpha = 0.0;
  double beta = 1.0;
  ScalarField f;
  Regime regime = Regime::C;
  int n = 2;

  /// Validates f > 0 and, when `require_even`, f(x) = f(-x) (tiny asymmetry is symmetrized away,
  /// anything larger than 1e-12 relative is rejected).
  static FlowParams make(const SphereGrid& grid, double alpha, double beta, ScalarField f, bool require_even);
};

/// rho = f u^{alpha-1} sigma^{-beta}, nodewise.
ScalarField rho(const SupportField& body, const CurvatureData& cd, const FlowParams& params);

/// eta = integral of f u^alpha sigma^{1-beta} divided by the exact |S^n|.
double eta(const SupportField& body, const CurvatureData& cd, const FlowParams& params);

/// Z_p = integral of u sigma rho^p.
double Z(double p, const SupportField& body, const CurvatureData& cd, const FlowParams& params);

/// Z_{1/beta} in regimes A, B, D; the entropy
///   integral(f log u) / integral(f) - log(integral(u sigma)) / (n + 1)
/// in regime C.
double J(const SupportField& body, const CurvatureData& cd, const FlowParams& params);

/// sup |rho / eta - 1|.
double soliton_residual(const SupportField& body, const CurvatureData& cd, const FlowParams& params);

/// Closed form of dZ_{1/beta}/dt along the normalized flow:
///   ((1 - alpha - beta) / beta) (Z_{1+1/beta} - Z_1 Z_{1/beta} / |S^n|).
double dZ_closed_form(const SupportField& body, const CurvatureData& cd, const FlowParams& params);

/// Regime-C dissipation  -integral(u^{-1} sigma (f / sigma - eta u)^2) / integral(f).
double entropy_dissipation(const SupportField& body, const CurvatureData& cd, const FlowParams& params);

/// Hoelder ladder for p < q < s: Z_q <= Z_p^{(s-q)/(s-p)} Z_s^{(q-p)/(s-p)}, each Z normalized by Z_0.
/// Returns the relative margin (rhs - lhs) / rhs, which is >= 0 when the inequality holds.
double holder_margin(double p, double q, double s, const SupportField& body, const CurvatureData& cd,
                     const FlowParams& params);

}  // namespace minkflow
