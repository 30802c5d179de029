#pragma once

#include <array>
#include <span>
#include <vector>

#include "minkflow/sphere_grid.hpp"

namespace minkflow {

/// Sampled support function u of a convex body containing the origin.
struct SupportField {
  GridPtr grid;
  ScalarField u;
  /// Origin-symmetric mode: u(x) == u(-x) nodewise.
  bool symmetric = false;

  std::size_t size() const { return u.size(); }
};

/**
 * Curvature of a body in support-function form, W = Hess(u) + u I (the radii-of-curvature
 * matrix). sigma = det W is sigma_n, `cofactor` is d sigma_n / d W_ij.
 */
struct CurvatureData {
  SymMatrixField W;
  std::vector<std::array<double, 2>> lambda;  ///< ascending eigenvalues (second unused for n = 1)
  ScalarField sigma;
  SymMatrixField cofactor;
  double lambda_min = 0.0;
  std::size_t argmin = 0;
};

/// Radial function r(xi) of the body, indexed by the grid nodes read as radial directions.
struct RadialField {
  GridPtr grid;
  ScalarField r;
};

/// Curvature without a convexity check; inspect lambda_min yourself.
CurvatureData curvature_of(const SphereGrid& grid, std::span<const double> u);

/// Throws Error(non_convex) if lambda_min <= eps_convex, naming the offending node.
CurvatureData curvature(const SupportField& body, double eps_convex = 0.0);

/// r(xi) = min over nodes x with <x, xi> > 0 of u(x) / <x, xi>, refined by a local quadratic fit.
RadialField radial_from_support(const SupportField& body);

/// Support field of the polar body: u* = 1 / r.
SupportField dual_body(const SupportField& body);

/// Gauss curvature of the radial graph X = r xi from g_ij = r^2 d_ij + r_i r_j and
/// hbar_ij = (-r r_ij + 2 r_i r_j + r^2 d_ij) / sqrt(r^2 + |grad r|^2). Throws Error(non_convex).
ScalarField gauss_from_radial(const RadialField& rf);

/// Embedding X(x) = u(x) x + grad u(x) of the boundary point with outer normal x.
std::vector<Vec3> embedding(const SupportField& body);

/**
 * Polar curvature relation u^{n+2}(x) u*^{n+2}(xi) / (K(p) K*(p*)) = 1, checked at every node x.
 * p = X(x) has normal x; its polar partner p* = x / u(x) has normal xi = p / |p|, so
 * u*(xi) = 1/|p| and K*(p*) is the Gauss curvature of the polar body's radial chart r* = 1/u.
 * Returns the maximum of |lhs - 1|.
 */
double polar_identity_residual(const SupportField& body);

/// Complete polarization of sigma_n: n = 1 -> A, n = 2 -> (trA trB - tr(AB)) / 2.
ScalarField mixed_sigma(int n, std::span<const SymMatrixField> ws);

/// V(u1, bodies...) = integral of u1 * sigma_n(W_{bodies[0]}, ..., W_{bodies[n-1]}).
double mixed_volume(const SupportField& u1, std::span<const SupportField> bodies);

/// Volume with the convention V = integral of u sigma_n (no 1/(n+1) factor), so Vol(B_1) = |S^n|.
double volume(const SupportField& body);

/// Same volume from the radial side: integral of r^{n+1}.
double volume_radial(const SupportField& body);

/// Volume of the polar body, integral of u^{-(n+1)} (its radial function is 1/u).
double dual_volume(const SupportField& body);

/// Scales u by s (sigma_n scales by s^n).
SupportField scaled(const SupportField& body, double s);

/// Max |a - b| nodewise; throws Error(grid_mismatch).
double sup_distance(const SupportField& a, const SupportField& b);

}  // namespace minkflow
