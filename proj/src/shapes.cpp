#include "minkflow/shapes.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <numbers>
#include <sstream>

#include "minkflow/error.hpp"

namespace minkflow {

namespace {

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

[[noreturn]] void shape_error(std::string_view text, const std::string& why) {
  throw Error(ErrorCode::config, "shape '" + std::string(text) + "': " + why);
}

double parse_number(std::string_view s, std::string_view whole) {
  s = trim(s);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) shape_error(whole, "expected a number, got '" + std::string(s) + "'");
  return v;
}

// Splits "name(a, b(c, d), e)" into name and top-level arguments.
std::pair<std::string, std::vector<std::string_view>> split_call(std::string_view text) {
  const std::string_view t = trim(text);
  const auto open = t.find('(');
  if (open == std::string_view::npos || t.back() != ')') shape_error(text, "expected name(args...)");
  std::string name(trim(t.substr(0, open)));
  std::vector<std::string_view> args;
  const std::string_view inner = t.substr(open + 1, t.size() - open - 2);
  int depth = 0;
  std::size_t start = 0;
  for (std::size_t i = 0; i < inner.size(); ++i) {
    const char c = inner[i];
    if (c == '(') ++depth;
    if (c == ')') --depth;
    if (depth < 0) shape_error(text, "unbalanced parentheses");
    if (c == ',' && depth == 0) {
      args.push_back(trim(inner.substr(start, i - start)));
      start = i + 1;
    }
  }
  if (depth != 0) shape_error(text, "unbalanced parentheses");
  const auto last = trim(inner.substr(start));
  if (!last.empty() || !args.empty()) args.push_back(last);
  return {name, args};
}

Mat3 quaternion_matrix(double w, double x, double y, double z) {
  return {Vec3{1 - 2 * (y * y + z * z), 2 * (x * y - z * w), 2 * (x * z + y * w)},
          Vec3{2 * (x * y + z * w), 1 - 2 * (x * x + z * z), 2 * (y * z - x * w)},
          Vec3{2 * (x * z - y * w), 2 * (y * z + x * w), 1 - 2 * (x * x + y * y)}};
}

}  // namespace

Shape Shape::sphere(double radius) {
  if (!(radius > 0.0)) throw Error(ErrorCode::invalid_params, "sphere radius must be positive");
  return Shape([radius](const Vec3&) { return radius; }, true, "sphere(" + fmt(radius) + ")");
}

Shape Shape::ellipsoid(const Vec3& axes) {
  for (double a : axes) {
    if (!(a > 0.0)) throw Error(ErrorCode::invalid_params, "ellipsoid semi-axes must be positive");
  }
  const Vec3 sq{axes[0] * axes[0], axes[1] * axes[1], axes[2] * axes[2]};
  return Shape([sq](const Vec3& x) { return std::sqrt(sq[0] * x[0] * x[0] + sq[1] * x[1] * x[1] + sq[2] * x[2] * x[2]); },
               true, "ellipsoid(" + fmt(axes[0]) + ", " + fmt(axes[1]) + ", " + fmt(axes[2]) + ")");
}

Shape Shape::quadric(const Mat3& A, std::string description) {
  return Shape(
      [A](const Vec3& x) {
        double q = 0.0;
        for (std::size_t i = 0; i < 3; ++i) {
          for (std::size_t j = 0; j < 3; ++j) q += A[i][j] * (x[i] * x[j]);
        }
        return std::sqrt(q);
      },
      true, std::move(description));
}

Shape Shape::rotated_ellipsoid(const Vec3& axes, const Mat3& R) {
  Mat3 A{};
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t j = 0; j < 3; ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < 3; ++k) s += R[i][k] * axes[k] * axes[k] * R[j][k];
      A[i][j] = s;
    }
  }
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t j = i + 1; j < 3; ++j) A[j][i] = A[i][j];
  }
  return quadric(A, "rotated_ellipsoid(" + fmt(axes[0]) + ", " + fmt(axes[1]) + ", " + fmt(axes[2]) + ")");
}

Shape Shape::translate(const Shape& base, const Vec3& v) {
  const bool even = base.even() && v[0] == 0.0 && v[1] == 0.0 && v[2] == 0.0;
  auto fn = base.fn_;
  return Shape([fn, v](const Vec3& x) { return fn(x) + dot(v, x); }, even,
               "translate(" + base.desc_ + ", " + fmt(v[0]) + ", " + fmt(v[1]) + ", " + fmt(v[2]) + ")");
}

Shape Shape::perturbed(const Shape& base, double eps, const SpherePolynomial& mode) {
  auto fn = base.fn_;
  return Shape([fn, eps, mode](const Vec3& x) { return fn(x) + eps * mode(x); }, base.even() && mode.even(),
               "perturbed(" + base.desc_ + ", " + fmt(eps) + ", " + mode.to_string() + ")");
}

Shape Shape::minkowski_sum(const std::vector<Shape>& parts) {
  if (parts.empty()) throw Error(ErrorCode::invalid_params, "empty Minkowski sum");
  std::vector<std::function<double(const Vec3&)>> fns;
  bool even = true;
  std::string desc = "sum(";
  for (std::size_t i = 0; i < parts.size(); ++i) {
    fns.push_back(parts[i].fn_);
    even = even && parts[i].even();
    desc += (i ? ", " : "") + parts[i].desc_;
  }
  desc += ")";
  return Shape(
      [fns](const Vec3& x) {
        double s = 0.0;
        for (const auto& f : fns) s += f(x);
        return s;
      },
      even, desc);
}

Shape Shape::scale(const Shape& base, double s) {
  if (!(s > 0.0)) throw Error(ErrorCode::invalid_params, "scale factor must be positive");
  auto fn = base.fn_;
  return Shape([fn, s](const Vec3& x) { return s * fn(x); }, base.even(), "scale(" + base.desc_ + ", " + fmt(s) + ")");
}

SupportField make_shape(const Shape& shape, const GridPtr& grid, double eps_convex) {
  SupportField body{grid, sample(*grid, [&](const Vec3& x) { return shape(x); }), shape.even()};
  if (body.symmetric) symmetrize(*grid, body.u);
  for (std::size_t i = 0; i < body.size(); ++i) {
    if (!(body.u[i] > 0.0)) {
      throw Error(ErrorCode::invalid_params, shape.description() + " does not contain the origin (u <= 0 at node " +
                                                 std::to_string(i) + ")");
    }
  }
  try {
    (void)curvature(body, eps_convex);
  } catch (const Error& e) {
    throw Error(ErrorCode::non_convex, shape.description() + " is not convex on this grid: " + e.what());
  }
  return body;
}

Mat3 Rng::rotation(int n) {
  if (n == 1) {
    const double a = 2.0 * std::numbers::pi * uniform();
    return {Vec3{std::cos(a), -std::sin(a), 0.0}, Vec3{std::sin(a), std::cos(a), 0.0}, Vec3{0.0, 0.0, 1.0}};
  }
  const double u1 = uniform();
  const double u2 = uniform();
  const double u3 = uniform();
  const double tau = 2.0 * std::numbers::pi;
  return quaternion_matrix(std::sqrt(1 - u1) * std::sin(tau * u2), std::sqrt(1 - u1) * std::cos(tau * u2),
                           std::sqrt(u1) * std::sin(tau * u3), std::sqrt(u1) * std::cos(tau * u3));
}

Shape random_even_shape(Rng& rng, int n) {
  std::vector<Shape> parts{Shape::sphere(rng.uniform(0.5, 1.0))};
  for (int e = 0; e < 2; ++e) {
    const Vec3 axes{rng.uniform(0.2, 0.6), rng.uniform(0.2, 0.6), n == 1 ? 1.0 : rng.uniform(0.2, 0.6)};
    parts.push_back(Shape::rotated_ellipsoid(axes, rng.rotation(n)));
  }
  return Shape::minkowski_sum(parts);
}

SpherePolynomial random_even_polynomial(Rng& rng, double amplitude) {
  std::vector<SpherePolynomial::Term> terms{{1.0, {0, 0, 0}}};
  const std::array<std::array<int, 3>, 9> monomials{{{2, 0, 0},
                                                     {0, 2, 0},
                                                     {0, 0, 2},
                                                     {1, 1, 0},
                                                     {1, 0, 1},
                                                     {0, 1, 1},
                                                     {4, 0, 0},
                                                     {0, 0, 4},
                                                     {2, 2, 0}}};
  for (const auto& m : monomials) terms.push_back({amplitude * rng.uniform(-1.0, 1.0) / 3.0, m});
  return SpherePolynomial(terms);
}

Shape parse_shape(std::string_view text, int n, std::uint64_t seed) {
  auto [name, args] = split_call(text);
  auto need = [&](std::size_t lo, std::size_t hi) {
    if (args.size() < lo || args.size() > hi) shape_error(text, name + " takes " + std::to_string(lo) + ".." + std::to_string(hi) + " arguments");
  };
  auto vec = [&](std::size_t first) {
    Vec3 v{0.0, 0.0, 0.0};
    for (std::size_t i = first; i < args.size() && i - first < 3; ++i) v[i - first] = parse_number(args[i], text);
    return v;
  };

  if (name == "sphere") {
    need(1, 1);
    return Shape::sphere(parse_number(args[0], text));
  }
  if (name == "ellipsoid") {
    need(2, 3);
    Vec3 axes = vec(0);
    if (args.size() == 2) axes[2] = 1.0;
    return Shape::ellipsoid(axes);
  }
  if (name == "translate") {
    need(3, 4);
    return Shape::translate(parse_shape(args[0], n, seed), vec(1));
  }
  if (name == "perturbed") {
    need(3, 3);
    return Shape::perturbed(parse_shape(args[0], n, seed), parse_number(args[1], text), SpherePolynomial::parse(args[2]));
  }
  if (name == "sum") {
    need(1, 64);
    std::vector<Shape> parts;
    for (auto a : args) parts.push_back(parse_shape(a, n, seed));
    return Shape::minkowski_sum(parts);
  }
  if (name == "scale") {
    need(2, 2);
    return Shape::scale(parse_shape(args[0], n, seed), parse_number(args[1], text));
  }
  if (name == "random_even") {
    need(0, 1);
    const int k = args.empty() ? 0 : static_cast<int>(parse_number(args[0], text));
    if (k < 0) shape_error(text, "random_even index must be >= 0");
    Rng rng(seed);
    Shape s = random_even_shape(rng, n);
    for (int i = 0; i < k; ++i) s = random_even_shape(rng, n);
    return s;
  }
  shape_error(text, "unknown shape kind '" + name + "'");
}

}  // namespace minkflow
