#include "minkflow/convex_body.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <tuple>
#include <utility>

#include <Eigen/Dense>

#include "minkflow/error.hpp"
#include "minkflow/parallel.hpp"

namespace minkflow {

namespace {

// Directions with <x, xi> below this are never candidates for the radial minimization.
constexpr double kMinCosine = 1e-3;

void require_same_grid(const SupportField& a, const SupportField& b) {
  if (!a.grid || !b.grid || !a.grid->same_layout(*b.grid)) {
    throw Error(ErrorCode::grid_mismatch, "support fields live on different grids");
  }
}

std::string node_report(const SphereGrid& grid, std::size_t i) {
  std::ostringstream os;
  os.precision(6);
  const auto& x = grid.node(i);
  os << "node " << i << " (row " << grid.row(i) << ", col " << grid.col(i) << ", x = [" << x[0] << ", " << x[1]
     << ", " << x[2] << "])";
  return os.str();
}

// Unit vectors spanning the plane orthogonal to xi.
std::pair<Vec3, Vec3> tangent_basis(const Vec3& xi) {
  const Vec3 seed = std::abs(xi[0]) < 0.9 ? Vec3{1.0, 0.0, 0.0} : Vec3{0.0, 1.0, 0.0};
  const double d = dot(seed, xi);
  Vec3 b1{seed[0] - d * xi[0], seed[1] - d * xi[1], seed[2] - d * xi[2]};
  const double len = std::sqrt(dot(b1, b1));
  for (double& c : b1) c /= len;
  const Vec3 b2{xi[1] * b1[2] - xi[2] * b1[1], xi[2] * b1[0] - xi[0] * b1[2], xi[0] * b1[1] - xi[1] * b1[0]};
  return {b1, b2};
}

// Least-squares polynomial in the scaled coordinates a (1 or 2 of them), then Newton on the fit.
// Returns the fitted minimum, or NaN when the fit is not locally convex.
double fitted_minimum(const std::vector<std::array<double, 3>>& pts, int dims, int degree) {
  auto monomials = [&](double a1, double a2) {
    std::vector<double> m{1.0};
    for (int d = 1; d <= degree; ++d) {
      for (int e = d; e >= 0; --e) {
        if (dims == 1 && e != d) continue;
        m.push_back(std::pow(a1, e) * std::pow(a2, d - e));
      }
    }
    return m;
  };
  const auto cols = static_cast<Eigen::Index>(monomials(0.0, 0.0).size());
  Eigen::MatrixXd A(static_cast<Eigen::Index>(pts.size()), cols);
  Eigen::VectorXd b(static_cast<Eigen::Index>(pts.size()));
  for (std::size_t r = 0; r < pts.size(); ++r) {
    const auto m = monomials(pts[r][0], pts[r][1]);
    for (Eigen::Index c = 0; c < cols; ++c) A(static_cast<Eigen::Index>(r), c) = m[static_cast<std::size_t>(c)];
    b(static_cast<Eigen::Index>(r)) = pts[r][2];
  }
  const Eigen::VectorXd coef = A.colPivHouseholderQr().solve(b);

  // Value, gradient and Hessian of the fit by central differences of the polynomial itself
  // would lose digits; evaluate them exactly term by term instead.
  auto eval = [&](double a1, double a2, Eigen::Vector2d& g, Eigen::Matrix2d& H) {
    double v = 0.0;
    g.setZero();
    H.setZero();
    Eigen::Index c = 0;
    for (int d = 0; d <= degree; ++d) {
      for (int e = d; e >= 0; --e) {
        if (dims == 1 && e != d) continue;
        const int f = d - e;
        const double k = coef(c++);
        auto pw = [](double x, int p) { return p <= 0 ? (p == 0 ? 1.0 : 0.0) : std::pow(x, p); };
        v += k * pw(a1, e) * pw(a2, f);
        g(0) += k * e * pw(a1, e - 1) * pw(a2, f);
        g(1) += k * f * pw(a1, e) * pw(a2, f - 1);
        H(0, 0) += k * e * (e - 1) * pw(a1, e - 2) * pw(a2, f);
        H(0, 1) += k * e * f * pw(a1, e - 1) * pw(a2, f - 1);
        H(1, 1) += k * f * (f - 1) * pw(a1, e) * pw(a2, f - 2);
      }
    }
    H(1, 0) = H(0, 1);
    if (dims == 1) H(1, 1) = 1.0;
    return v;
  };

  Eigen::Vector2d a = Eigen::Vector2d::Zero();
  Eigen::Vector2d g;
  Eigen::Matrix2d H;
  for (int it = 0; it < 30; ++it) {
    eval(a(0), a(1), g, H);
    if (!(H(0, 0) > 0.0) || !(H.determinant() > 0.0)) return std::numeric_limits<double>::quiet_NaN();
    const Eigen::Vector2d step = -H.ldlt().solve(g);
    a += step;
    if (a.norm() > 1.5) return std::numeric_limits<double>::quiet_NaN();
    if (step.norm() < 1e-13) break;
  }
  return eval(a(0), a(1), g, H);
}

// r(xi) = min over x of F(x) = u(x) / <x, xi>. In gnomonic coordinates z about xi, F(x) equals the
// homogeneous extension of u at xi + z, so F^2 is exactly quadratic in z for ellipsoids. The
// discrete minimum is refined by a local cubic fit of F^2 in z.
double radial_value(const SphereGrid& grid, std::span<const double> u, const Vec3& xi) {
  double best = std::numeric_limits<double>::infinity();
  std::size_t arg = grid.size();
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double c = dot(grid.node(i), xi);
    if (c <= kMinCosine) continue;
    const double f = u[i] / c;
    if (f < best) {
      best = f;
      arg = i;
    }
  }
  if (arg == grid.size()) {
    throw Error(ErrorCode::degenerate_direction, "no grid node with positive projection on the target direction");
  }

  std::vector<std::size_t> near;
  double spacing = grid.dtheta();
  const Vec3& x0 = grid.node(arg);
  if (grid.dim() == 1) {
    const int k = static_cast<int>(arg);
    for (int dk = -2; dk <= 2; ++dk) near.push_back(grid.wrapped_index(k + dk, 0));
  } else {
    spacing = std::max(grid.dtheta(), grid.dphi());
    const double min_cos = std::cos(2.5 * spacing);
    // Rows continued past a pole revisit real rows; dedupe by node index.
    const int j0 = grid.row(arg);
    for (int dj = -3; dj <= 3; ++dj) {
      for (int k = 0; k < grid.n_phi(); ++k) {
        const std::size_t i = grid.wrapped_index(j0 + dj, k);
        if (dot(grid.node(i), x0) >= min_cos) near.push_back(i);
      }
    }
    std::sort(near.begin(), near.end());
    near.erase(std::unique(near.begin(), near.end()), near.end());
  }

  Vec3 b1, b2;
  if (grid.dim() == 1) {
    b1 = {-xi[1], xi[0], 0.0};
    b2 = {0.0, 0.0, 0.0};
  } else {
    std::tie(b1, b2) = tangent_basis(xi);
  }
  const double c0 = dot(x0, xi);
  const double z01 = dot(x0, b1) / c0;
  const double z02 = dot(x0, b2) / c0;

  std::vector<std::array<double, 3>> pts;
  for (std::size_t i : near) {
    const Vec3& y = grid.node(i);
    const double c = dot(y, xi);
    if (c <= kMinCosine) continue;
    const double f = u[i] / c;
    pts.push_back({(dot(y, b1) / c - z01) / spacing, (dot(y, b2) / c - z02) / spacing, f * f});
  }

  double fit = std::numeric_limits<double>::quiet_NaN();
  if (grid.dim() == 1) {
    if (pts.size() >= 5) fit = fitted_minimum(pts, 1, 3);
  } else if (pts.size() >= 14) {
    fit = fitted_minimum(pts, 2, 3);
  } else if (pts.size() >= 8) {
    fit = fitted_minimum(pts, 2, 2);
  }
  if (!(fit > 0.0)) return best;
  const double refined = std::sqrt(fit);
  return refined <= best ? refined : best;
}

}  // namespace

CurvatureData curvature_of(const SphereGrid& grid, std::span<const double> u) {
  CurvatureData cd;
  VectorField grad;
  derivatives(grid, u, grad, cd.W);
  const std::size_t n = u.size();
  cd.lambda.assign(n, {0.0, 0.0});
  cd.sigma.assign(n, 0.0);
  cd.cofactor.assign(n, Sym2{});

  if (grid.dim() == 1) {
    for (std::size_t i = 0; i < n; ++i) {
      cd.W[i].tt += u[i];
      cd.lambda[i] = {cd.W[i].tt, cd.W[i].tt};
      cd.sigma[i] = cd.W[i].tt;
      cd.cofactor[i] = {1.0, 0.0, 0.0};
    }
  } else {
    parallel_for(n, [&](std::size_t i) {
      Sym2& w = cd.W[i];
      w.tt += u[i];
      w.pp += u[i];
      const double mean = 0.5 * (w.tt + w.pp);
      const double rad = std::hypot(0.5 * (w.tt - w.pp), w.tp);
      cd.lambda[i] = {mean - rad, mean + rad};
      cd.sigma[i] = w.tt * w.pp - w.tp * w.tp;
      cd.cofactor[i] = {w.pp, -w.tp, w.tt};
    });
  }

  cd.lambda_min = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    if (cd.lambda[i][0] < cd.lambda_min) {
      cd.lambda_min = cd.lambda[i][0];
      cd.argmin = i;
    }
  }
  return cd;
}

CurvatureData curvature(const SupportField& body, double eps_convex) {
  CurvatureData cd = curvature_of(*body.grid, body.u);
  if (!(cd.lambda_min > eps_convex)) {
    std::ostringstream os;
    os << "lambda_min = " << cd.lambda_min << " at " << node_report(*body.grid, cd.argmin);
    throw Error(ErrorCode::non_convex, os.str());
  }
  return cd;
}

RadialField radial_from_support(const SupportField& body) {
  const SphereGrid& grid = *body.grid;
  RadialField rf{body.grid, ScalarField(grid.size(), 0.0)};
  parallel_for(grid.size(), [&](std::size_t i) { rf.r[i] = radial_value(grid, body.u, grid.node(i)); });
  return rf;
}

SupportField dual_body(const SupportField& body) {
  RadialField rf = radial_from_support(body);
  SupportField out{body.grid, std::move(rf.r), body.symmetric};
  for (double& v : out.u) v = 1.0 / v;
  if (out.symmetric) symmetrize(*out.grid, out.u);
  return out;
}

ScalarField gauss_from_radial(const RadialField& rf) {
  const SphereGrid& grid = *rf.grid;
  VectorField grad;
  SymMatrixField hess;
  derivatives(grid, rf.r, grad, hess);
  ScalarField K(grid.size(), 0.0);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double r = rf.r[i];
    const double a = grad[i].t;
    const double b = grad[i].p;
    const double r2 = r * r;
    const double norm = std::sqrt(r2 + a * a + b * b);
    double det_hbar = 0.0;
    double det_g = 0.0;
    double lead = 0.0;
    if (grid.dim() == 1) {
      lead = (-r * hess[i].tt + 2.0 * a * a + r2) / norm;
      det_hbar = lead;
      det_g = r2 + a * a;
    } else {
      const double htt = (-r * hess[i].tt + 2.0 * a * a + r2) / norm;
      const double htp = (-r * hess[i].tp + 2.0 * a * b) / norm;
      const double hpp = (-r * hess[i].pp + 2.0 * b * b + r2) / norm;
      lead = htt;
      det_hbar = htt * hpp - htp * htp;
      det_g = (r2 + a * a) * (r2 + b * b) - a * a * b * b;
    }
    if (!(lead > 0.0) || !(det_hbar > 0.0)) {
      throw Error(ErrorCode::non_convex, "radial graph is not uniformly convex at " + node_report(grid, i));
    }
    K[i] = det_hbar / det_g;
  }
  return K;
}

std::vector<Vec3> embedding(const SupportField& body) {
  const SphereGrid& grid = *body.grid;
  const VectorField grad = gradient(grid, body.u);
  std::vector<Vec3> X(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const Vec3& x = grid.node(i);
    const Vec3 t = to_ambient(grid, i, grad[i]);
    X[i] = {body.u[i] * x[0] + t[0], body.u[i] * x[1] + t[1], body.u[i] * x[2] + t[2]};
  }
  return X;
}

double polar_identity_residual(const SupportField& body) {
  const SphereGrid& grid = *body.grid;
  const CurvatureData cd = curvature(body);
  const VectorField grad = gradient(grid, body.u);
  RadialField polar{body.grid, ScalarField(grid.size())};
  for (std::size_t i = 0; i < grid.size(); ++i) polar.r[i] = 1.0 / body.u[i];
  const ScalarField k_polar = gauss_from_radial(polar);

  const int n = grid.dim();
  double worst = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double u = body.u[i];
    const double p = std::sqrt(u * u + grad[i].t * grad[i].t + grad[i].p * grad[i].p);
    const double lhs = std::pow(u / p, n + 2) * cd.sigma[i] / k_polar[i];
    worst = std::max(worst, std::abs(lhs - 1.0));
  }
  return worst;
}

ScalarField mixed_sigma(int n, std::span<const SymMatrixField> ws) {
  if (static_cast<int>(ws.size()) != n) {
    throw Error(ErrorCode::size_mismatch, "mixed_sigma needs exactly n matrix fields");
  }
  const std::size_t size = ws[0].size();
  for (const auto& w : ws) {
    if (w.size() != size) throw Error(ErrorCode::size_mismatch, "matrix fields differ in length");
  }
  ScalarField out(size);
  if (n == 1) {
    for (std::size_t i = 0; i < size; ++i) out[i] = ws[0][i].tt;
    return out;
  }
  for (std::size_t i = 0; i < size; ++i) {
    const Sym2& a = ws[0][i];
    const Sym2& b = ws[1][i];
    const double tr_ab = a.tt * b.tt + 2.0 * a.tp * b.tp + a.pp * b.pp;
    out[i] = 0.5 * ((a.tt + a.pp) * (b.tt + b.pp) - tr_ab);
  }
  return out;
}

double mixed_volume(const SupportField& u1, std::span<const SupportField> bodies) {
  const int n = u1.grid->dim();
  if (static_cast<int>(bodies.size()) != n) {
    throw Error(ErrorCode::size_mismatch, "mixed_volume needs exactly n bodies after the first argument");
  }
  std::vector<SymMatrixField> ws;
  ws.reserve(bodies.size());
  for (const auto& b : bodies) {
    require_same_grid(u1, b);
    ws.push_back(curvature(b).W);
  }
  const ScalarField s = mixed_sigma(n, ws);
  ScalarField integrand(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) integrand[i] = u1.u[i] * s[i];
  return integrate(*u1.grid, integrand);
}

double volume(const SupportField& body) {
  const CurvatureData cd = curvature(body);
  ScalarField integrand(body.size());
  for (std::size_t i = 0; i < body.size(); ++i) integrand[i] = body.u[i] * cd.sigma[i];
  return integrate(*body.grid, integrand);
}

double volume_radial(const SupportField& body) {
  const RadialField rf = radial_from_support(body);
  const int n = body.grid->dim();
  ScalarField integrand(rf.r.size());
  for (std::size_t i = 0; i < rf.r.size(); ++i) integrand[i] = std::pow(rf.r[i], n + 1);
  return integrate(*body.grid, integrand);
}

double dual_volume(const SupportField& body) {
  const int n = body.grid->dim();
  ScalarField integrand(body.size());
  for (std::size_t i = 0; i < body.size(); ++i) integrand[i] = std::pow(body.u[i], -(n + 1));
  return integrate(*body.grid, integrand);
}

SupportField scaled(const SupportField& body, double s) {
  SupportField out = body;
  for (double& v : out.u) v *= s;
  return out;
}

double sup_distance(const SupportField& a, const SupportField& b) {
  require_same_grid(a, b);
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a.u[i] - b.u[i]));
  return worst;
}

}  // namespace minkflow
