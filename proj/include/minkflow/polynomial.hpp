#pragma once

#include <array>
#include <string>
#include <string_view>
#include <vector>

#include "minkflow/sphere_grid.hpp"

namespace minkflow {

/// Polynomial in the ambient coordinates (x1, x2, x3) restricted to the sphere.
/// Used for f / phi data and for shape perturbation modes.
class SpherePolynomial {
 public:
  struct Term {
    double coef = 0.0;
    std::array<int, 3> pow{0, 0, 0};
  };

  SpherePolynomial() = default;
  explicit SpherePolynomial(std::vector<Term> terms);
  static SpherePolynomial constant(double c);

  /// Parses sums of products such as "1 + 0.2*x3^2 - 0.5*x1*x2 - 1/3". Accepts x1/x2/x3 or x/y/z;
  /// a term may be divided by a number.
  /// Throws Error(config) on malformed input.
  static SpherePolynomial parse(std::string_view text);

  double operator()(const Vec3& x) const;
  /// Even iff every monomial has even total degree.
  bool even() const;
  int degree() const;
  const std::vector<Term>& terms() const { return terms_; }
  std::string to_string() const;

 private:
  std::vector<Term> terms_;
};

}  // namespace minkflow
