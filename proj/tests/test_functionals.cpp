#include <cmath>
#include <numbers>

#include "doctest.h"
#include "minkflow/error.hpp"
#include "minkflow/functionals.hpp"
#include "minkflow/shapes.hpp"

using namespace minkflow;

namespace {

constexpr double kPi = std::numbers::pi;

GridPtr grid2(int nt) { return SphereGrid::build(2, nt, 2 * nt); }

FlowParams flat(const GridPtr& g, double alpha, double beta) {
  return FlowParams::make(*g, alpha, beta, ScalarField(g->size(), 1.0), true);
}

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no exception");
  return ErrorCode::io;
}

}  // namespace

TEST_CASE("regime classification") {
  CHECK(classify(2, 1.0, 1.0) == Regime::A);
  CHECK(classify(2, 0.5, 1.0) == Regime::A);
  CHECK(classify(2, -1.5, 1.0) == Regime::B);
  CHECK(classify(2, -2.9, 1.0) == Regime::B);
  CHECK(classify(2, 0.0, 1.0) == Regime::C);
  CHECK(classify(2, 3.0, 1.0) == Regime::D);
  CHECK(classify(2, 7.0, 1.0) == Regime::D);
  CHECK(classify(1, 2.0, 1.0) == Regime::D);
  CHECK(classify(1, 1.5, 1.0) == Regime::A);
  CHECK(classify(2, 2.0, 0.5) == Regime::D);
  CHECK(classify(2, 0.6, 0.5) == Regime::A);

  CHECK(code_of([] { classify(2, 0.5, 0.5); }) == ErrorCode::invalid_params);   // alpha = 1 - beta
  CHECK(code_of([] { classify(2, -3.0, 1.0); }) == ErrorCode::invalid_params);  // lower endpoint
  CHECK(code_of([] { classify(2, -5.0, 1.0); }) == ErrorCode::invalid_params);
  CHECK(code_of([] { classify(2, 1.0, 0.0); }) == ErrorCode::invalid_params);
  CHECK(code_of([] { classify(3, 1.0, 1.0); }) == ErrorCode::invalid_dimension);
  try {
    classify(2, 0.25, 0.75);
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("alpha = 1 - beta") != std::string::npos);
  }
}

TEST_CASE("FlowParams validation") {
  auto g = grid2(16);
  ScalarField neg(g->size(), 1.0);
  neg[5] = -0.1;
  CHECK(code_of([&] { FlowParams::make(*g, 1, 1, neg, false); }) == ErrorCode::invalid_params);
  const ScalarField odd = sample(*g, [](const Vec3& x) { return 1.0 + 0.3 * x[0]; });
  CHECK(code_of([&] { FlowParams::make(*g, 1, 1, odd, true); }) == ErrorCode::invalid_params);
  CHECK_NOTHROW(FlowParams::make(*g, 4, 1, odd, false));
  CHECK(code_of([&] { FlowParams::make(*g, 1, 1, ScalarField(3, 1.0), false); }) == ErrorCode::size_mismatch);
}

TEST_CASE("rho, eta and Z on spheres") {
  auto g = grid2(16);
  const double area = 4 * kPi;
  for (double r0 : {1.0, 0.7, 1.8}) {
    const SupportField s = make_shape(Shape::sphere(r0), g);
    const CurvatureData cd = curvature(s);
    for (auto [a, b] : {std::pair{1.0, 1.0}, {0.0, 1.0}, {3.0, 1.0}, {-1.5, 1.0}, {0.5, 2.0}}) {
      const FlowParams p = flat(g, a, b);
      const ScalarField r = rho(s, cd, p);
      const double expect = std::pow(r0, a - 1 - 2 * b);
      for (double v : r) CHECK(v == doctest::Approx(expect).epsilon(1e-12));
      CHECK(eta(s, cd, p) == doctest::Approx(std::pow(r0, a + 2 * (1 - b))).epsilon(1e-12));
      for (double q : {0.0, 1.0, 2.5, -0.5}) {
        CHECK(Z(q, s, cd, p) == doctest::Approx(area * std::pow(r0, 3 + q * (a - 1 - 2 * b))).epsilon(1e-12));
      }
      if (r0 == 1.0) {
        CHECK(soliton_residual(s, cd, p) < 1e-12);
        CHECK(std::abs(dZ_closed_form(s, cd, p)) < 1e-10);
      } else {
        CHECK(soliton_residual(s, cd, p) > 1e-3);
      }
    }
  }
}

TEST_CASE("J branches on spheres") {
  auto g = grid2(16);
  const SupportField s = make_shape(Shape::sphere(1.0), g);
  const CurvatureData cd = curvature(s);
  CHECK(J(s, cd, flat(g, 1, 1)) == doctest::Approx(4 * kPi).epsilon(1e-12));
  CHECK(J(s, cd, flat(g, 0, 1)) == doctest::Approx(-std::log(4 * kPi) / 3).epsilon(1e-12));
  // the entropy is dilation invariant
  for (double r0 : {0.3, 2.0}) {
    const SupportField b = make_shape(Shape::sphere(r0), g);
    CHECK(J(b, curvature(b), flat(g, 0, 1)) == doctest::Approx(-std::log(4 * kPi) / 3).epsilon(1e-12));
  }
}

TEST_CASE("rho on the ellipsoid (1,1,2) for the entropy regime") {
  // sigma_2 = (abc)^2 / u^4, so rho = u^{-1} sigma^{-1} = u^3 / 4
  double prev = 0.0;
  for (int nt : {16, 32, 64}) {
    auto g = grid2(nt);
    const SupportField e = make_shape(Shape::ellipsoid({1, 1, 2}), g);
    const CurvatureData cd = curvature(e);
    const ScalarField r = rho(e, cd, flat(g, 0, 1));
    double err = 0.0;
    for (std::size_t i = 0; i < g->size(); ++i) {
      const double d = r[i] / (std::pow(e.u[i], 3) / 4.0) - 1.0;
      err += d * d * g->weights()[i];
    }
    err = std::sqrt(err / (4 * kPi));
    if (prev > 0.0) CHECK(prev / err > 3.5);
    prev = err;
    CHECK(soliton_residual(e, cd, flat(g, 0, 1)) > 0.5);
  }
}

TEST_CASE("eta in the entropy regime does not depend on the body") {
  auto g = grid2(32);
  const ScalarField f = sample(*g, [](const Vec3& x) { return 1.0 + 0.3 * x[2] * x[2]; });
  const FlowParams p = FlowParams::make(*g, 0, 1, f, true);
  const double expect = integrate(*g, f) / (4 * kPi);
  for (const Shape& s : {Shape::sphere(1), Shape::ellipsoid({1, 1, 2}), Shape::ellipsoid({0.7, 1.3, 1.0})}) {
    const SupportField b = make_shape(s, g);
    CHECK(eta(b, curvature(b), p) == doctest::Approx(expect).epsilon(1e-13));
  }
}

TEST_CASE("Z_0 is the volume and Z scales exactly") {
  auto g = grid2(32);
  Rng rng(11);
  for (int k = 0; k < 4; ++k) {
    const SupportField b = make_shape(random_even_shape(rng, 2), g);
    const CurvatureData cd = curvature(b);
    const FlowParams p =
        FlowParams::make(*g, rng.uniform(-1, 2.5), 1.0, sample(*g, random_even_polynomial(rng, 0.5)), true);
    CHECK(Z(0, b, cd, p) == doctest::Approx(volume(b)).epsilon(1e-13));
    for (double s : {0.6, 1.7}) {
      const SupportField bs = scaled(b, s);
      const CurvatureData cs = curvature(bs);
      for (double q : {-0.7, 0.5, 2.0}) {
        const double law = std::pow(s, 3 + q * (p.alpha - 1 - 2 * p.beta));
        CHECK(Z(q, bs, cs, p) == doctest::Approx(law * Z(q, b, cd, p)).epsilon(1e-11));
      }
    }
  }
}

TEST_CASE("Hoelder ladder on random bodies") {
  auto g = grid2(32);
  Rng rng(5);
  for (int k = 0; k < 8; ++k) {
    const SupportField b = make_shape(random_even_shape(rng, 2), g);
    const CurvatureData cd = curvature(b);
    const FlowParams p = FlowParams::make(*g, rng.uniform(0.1, 2.5), 1.0,
                                          sample(*g, random_even_polynomial(rng, 0.6)), true);
    CHECK(holder_margin(-1.0, 0.5, 2.0, b, cd, p) >= -1e-13);
    CHECK(holder_margin(0.0, 1.0, 2.0, b, cd, p) >= -1e-13);
    // Cauchy-Schwarz rung: Z_2 Z_0 >= Z_1^2
    CHECK(Z(2, b, cd, p) * Z(0, b, cd, p) >= Z(1, b, cd, p) * Z(1, b, cd, p) * (1 - 1e-13));
  }
  CHECK_THROWS_AS(holder_margin(1.0, 0.5, 2.0, make_shape(Shape::sphere(1), g),
                                curvature(make_shape(Shape::sphere(1), g)), flat(g, 1, 1)),
                  Error);
}

TEST_CASE("entropy dissipation vanishes only at solitons") {
  auto g = grid2(32);
  const FlowParams p = flat(g, 0, 1);
  const SupportField s = make_shape(Shape::sphere(1.0), g);
  CHECK(std::abs(entropy_dissipation(s, curvature(s), p)) < 1e-12);
  const SupportField e = make_shape(Shape::ellipsoid({1, 1, 1.5}), g);
  CHECK(entropy_dissipation(e, curvature(e), p) < -1e-3);
}

TEST_CASE("functionals reject non-convex input") {
  auto g = grid2(16);
  SupportField b = make_shape(Shape::sphere(1), g);
  CurvatureData cd = curvature(b);
  cd.lambda_min = -0.1;
  CHECK(code_of([&] { rho(b, cd, flat(g, 1, 1)); }) == ErrorCode::non_convex);
  CHECK(code_of([&] { J(b, cd, flat(g, 0, 1)); }) == ErrorCode::non_convex);
}
