#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "minkflow/convex_body.hpp"
#include "minkflow/polynomial.hpp"

namespace minkflow {

using Mat3 = std::array<Vec3, 3>;

/// Analytic support function used to seed bodies on a grid.
class Shape {
 public:
  static Shape sphere(double radius);
  /// Axis-aligned ellipsoid (ellipse for n = 1, using the first two semi-axes).
  static Shape ellipsoid(const Vec3& axes);
  /// u(x) = sqrt(x^T A x) for symmetric positive-definite A: the ellipsoid A^{1/2} B_1.
  static Shape quadric(const Mat3& A, std::string description);
  /// Ellipsoid with semi-axes `axes` along the columns of the rotation R.
  static Shape rotated_ellipsoid(const Vec3& axes, const Mat3& R);
  static Shape translate(const Shape& base, const Vec3& v);
  static Shape perturbed(const Shape& base, double eps, const SpherePolynomial& mode);
  static Shape minkowski_sum(const std::vector<Shape>& parts);
  static Shape scale(const Shape& base, double s);

  double operator()(const Vec3& x) const { return fn_(x); }
  bool even() const { return even_; }
  const std::string& description() const { return desc_; }

 private:
  Shape(std::function<double(const Vec3&)> fn, bool even, std::string desc)
      : fn_(std::move(fn)), even_(even), desc_(std::move(desc)) {}

  std::function<double(const Vec3&)> fn_;
  bool even_ = false;
  std::string desc_;
};

/// Samples the shape and checks convexity; throws Error(non_convex) with the offending lambda_min.
SupportField make_shape(const Shape& shape, const GridPtr& grid, double eps_convex = 0.0);

/// Deterministic uniform(0,1) on top of mt19937_64 (whose output sequence is fixed by the standard).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Uniformly random rotation (planar rotation about x3 when n = 1).
  Mat3 rotation(int n);

 private:
  std::mt19937_64 engine_;
};

/// Random smooth origin-symmetric body: a ball plus two randomly rotated ellipsoids (Minkowski sum).
Shape random_even_shape(Rng& rng, int n);

/// Random smooth even test function: 1 + low-degree even polynomial with random coefficients.
SpherePolynomial random_even_polynomial(Rng& rng, double amplitude);

/**
 * Parses the shape grammar used by config files:
 *   sphere(r) | ellipsoid(a, b[, c]) | translate(S, v1, v2[, v3]) | perturbed(S, eps, <polynomial>)
 *   | sum(S, S, ...) | scale(S, s) | random_even(k)
 * random_even(k) draws the k-th body from a stream seeded with `seed`.
 */
Shape parse_shape(std::string_view text, int n, std::uint64_t seed);

}  // namespace minkflow
