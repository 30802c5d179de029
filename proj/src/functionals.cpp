#include "minkflow/functionals.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "minkflow/error.hpp"

namespace minkflow {

namespace {

constexpr double kBoundaryTol = 1e-12;

void require_positive_curvature(const CurvatureData& cd) {
  if (!(cd.lambda_min > 0.0)) {
    std::ostringstream os;
    os << "functional needs a convex body, lambda_min = " << cd.lambda_min << " at node " << cd.argmin;
    throw Error(ErrorCode::non_convex, os.str());
  }
}

void require_sizes(const SupportField& body, const CurvatureData& cd, const FlowParams& params) {
  if (cd.sigma.size() != body.size() || params.f.size() != body.size()) {
    throw Error(ErrorCode::size_mismatch, "body, curvature and f have different lengths");
  }
}

}  // namespace

const char* to_string(Regime r) {
  switch (r) {
    case Regime::A: return "A";
    case Regime::B: return "B";
    case Regime::C: return "C";
    case Regime::D: return "D";
  }
  return "?";
}

Regime classify(int n, double alpha, double beta) {
  if (n != 1 && n != 2) throw Error(ErrorCode::invalid_dimension, "n must be 1 or 2");
  if (!(beta > 0.0) || !std::isfinite(alpha) || !std::isfinite(beta)) {
    throw Error(ErrorCode::invalid_params, "beta must be positive and alpha finite");
  }
  if (std::abs(alpha) <= kBoundaryTol && std::abs(beta - 1.0) <= kBoundaryTol) return Regime::C;
  const double lower = 1.0 - n * beta - 2.0 * beta;
  const double excluded = 1.0 - beta;
  const double upper = 1.0 + n * beta;
  std::ostringstream os;
  os << "(alpha, beta) = (" << alpha << ", " << beta << ")";
  if (std::abs(alpha - excluded) <= kBoundaryTol) {
    throw Error(ErrorCode::invalid_params, os.str() + " lies on the excluded line alpha = 1 - beta");
  }
  if (alpha >= upper - kBoundaryTol * std::max(1.0, std::abs(upper))) return Regime::D;
  if (alpha > excluded) return Regime::A;
  if (alpha > lower) return Regime::B;
  throw Error(ErrorCode::invalid_params,
              os.str() + " is outside every admissible regime (need alpha > 1 - n beta - 2 beta)");
}

bool requires_even(Regime r) { return r != Regime::D; }

FlowParams FlowParams::make(const SphereGrid& grid, double alpha, double beta, ScalarField f, bool require_even) {
  FlowParams p;
  p.n = grid.dim();
  p.regime = classify(p.n, alpha, beta);
  p.alpha = alpha;
  p.beta = beta;
  if (f.size() != grid.size()) throw Error(ErrorCode::size_mismatch, "f has the wrong number of samples");
  double fmax = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (!(f[i] > 0.0) || !std::isfinite(f[i])) {
      throw Error(ErrorCode::invalid_params, "f must be positive, f = " + std::to_string(f[i]) + " at node " +
                                                 std::to_string(i));
    }
    fmax = std::max(fmax, f[i]);
  }
  if (require_even) {
    const double asym = antipodal_asymmetry(grid, f);
    if (asym > 1e-12 * fmax) {
      throw Error(ErrorCode::invalid_params,
                  "f must be even in origin-symmetric mode, max |f(x) - f(-x)| = " + std::to_string(asym));
    }
    symmetrize(grid, f);
  }
  p.f = std::move(f);
  return p;
}

ScalarField rho(const SupportField& body, const CurvatureData& cd, const FlowParams& params) {
  require_sizes(body, cd, params);
  require_positive_curvature(cd);
  ScalarField out(body.size());
  for (std::size_t i = 0; i < body.size(); ++i) {
    out[i] = params.f[i] * std::exp((params.alpha - 1.0) * std::log(body.u[i]) - params.beta * std::log(cd.sigma[i]));
  }
  return out;
}

double eta(const SupportField& body, const CurvatureData& cd, const FlowParams& params) {
  require_sizes(body, cd, params);
  require_positive_curvature(cd);
  ScalarField g(body.size());
  for (std::size_t i = 0; i < body.size(); ++i) {
    g[i] = params.f[i] * std::exp(params.alpha * std::log(body.u[i]) + (1.0 - params.beta) * std::log(cd.sigma[i]));
  }
  return integrate(*body.grid, g) / sphere_area(body.grid->dim());
}

double Z(double p, const SupportField& body, const CurvatureData& cd, const FlowParams& params) {
  const ScalarField r = rho(body, cd, params);
  ScalarField g(body.size());
  for (std::size_t i = 0; i < body.size(); ++i) {
    g[i] = body.u[i] * cd.sigma[i] * (p == 0.0 ? 1.0 : std::pow(r[i], p));
  }
  return integrate(*body.grid, g);
}

double J(const SupportField& body, const CurvatureData& cd, const FlowParams& params) {
  if (params.regime != Regime::C) return Z(1.0 / params.beta, body, cd, params);
  require_sizes(body, cd, params);
  require_positive_curvature(cd);
  ScalarField flog(body.size()), vol(body.size());
  for (std::size_t i = 0; i < body.size(); ++i) {
    flog[i] = params.f[i] * std::log(body.u[i]);
    vol[i] = body.u[i] * cd.sigma[i];
  }
  const SphereGrid& grid = *body.grid;
  return integrate(grid, flog) / integrate(grid, params.f) - std::log(integrate(grid, vol)) / (grid.dim() + 1);
}

double soliton_residual(const SupportField& body, const CurvatureData& cd, const FlowParams& params) {
  const ScalarField r = rho(body, cd, params);
  const double e = eta(body, cd, params);
  double worst = 0.0;
  for (double v : r) worst = std::max(worst, std::abs(v / e - 1.0));
  return worst;
}

double dZ_closed_form(const SupportField& body, const CurvatureData& cd, const FlowParams& params) {
  const double b = params.beta;
  const double area = sphere_area(body.grid->dim());
  const double z1 = Z(1.0, body, cd, params);
  const double zq = Z(1.0 / b, body, cd, params);
  const double zq1 = Z(1.0 + 1.0 / b, body, cd, params);
  return (1.0 - params.alpha - b) / b * (zq1 - z1 * zq / area);
}

double entropy_dissipation(const SupportField& body, const CurvatureData& cd, const FlowParams& params) {
  require_sizes(body, cd, params);
  require_positive_curvature(cd);
  const double e = eta(body, cd, params);
  ScalarField g(body.size());
  for (std::size_t i = 0; i < body.size(); ++i) {
    const double d = params.f[i] / cd.sigma[i] - e * body.u[i];
    g[i] = cd.sigma[i] * d * d / body.u[i];
  }
  return -integrate(*body.grid, g) / integrate(*body.grid, params.f);
}

double holder_margin(double p, double q, double s, const SupportField& body, const CurvatureData& cd,
                     const FlowParams& params) {
  if (!(p < q && q < s)) throw Error(ErrorCode::invalid_params, "Hoelder ladder needs p < q < s");
  const double z0 = Z(0.0, body, cd, params);
  const double zp = Z(p, body, cd, params) / z0;
  const double zq = Z(q, body, cd, params) / z0;
  const double zs = Z(s, body, cd, params) / z0;
  const double rhs = std::pow(zp, (s - q) / (s - p)) * std::pow(zs, (q - p) / (s - p));
  return (rhs - zq) / rhs;
}

}  // namespace minkflow
