#include "minkflow/verify.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>

#include "minkflow/error.hpp"
#include "minkflow/flow.hpp"
#include "minkflow/shapes.hpp"

namespace minkflow {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Suite {
  const VerifyOptions& opts;
  const GridPtr& grid;
  int n;
};

CheckItem item(const std::string& name, double value, double tol, bool lower_bound) {
  return CheckItem{name, value, tol, lower_bound, false};
}

// V(first, second, rest, ..., rest).
double mixed(const SupportField& first, const SupportField& second, const SupportField& rest, int n) {
  std::vector<SupportField> bodies{second};
  for (int k = 1; k < n; ++k) bodies.push_back(rest);
  return mixed_volume(first, bodies);
}

double af_margin(const SupportField& v, const SupportField& u, int n) {
  const double vu = mixed(v, u, u, n);
  const double vv = mixed(v, v, u, n);
  return (vu * vu - vv * volume(u)) / (vu * vu);
}

SupportField add_linear(const SupportField& u, double a, const Vec3& w) {
  SupportField out = u;
  for (std::size_t i = 0; i < u.size(); ++i) out.u[i] = a * u.u[i] + dot(u.grid->node(i), w);
  return out;
}

CheckResult check_af(const Suite& s, Rng& rng) {
  double worst = kInf, equality = 0.0;
  for (int k = 0; k < s.opts.samples; ++k) {
    const SupportField u = make_shape(random_even_shape(rng, s.n), s.grid);
    const SupportField v = make_shape(random_even_shape(rng, s.n), s.grid);
    worst = std::min(worst, af_margin(v, u, s.n));
    const Vec3 w{rng.uniform(-0.1, 0.1), rng.uniform(-0.1, 0.1), s.n == 1 ? 0.0 : rng.uniform(-0.1, 0.1)};
    equality = std::max(equality, std::abs(af_margin(add_linear(u, rng.uniform(0.5, 1.5), w), u, s.n)));
  }
  return {"af", s.opts.samples, {item("margin", worst, 1e-6, true), item("equality", equality, 1e-3, false)}};
}

// ((int u psi sigma)^2 - V (int u sigma psi^2 - int u^2 s^{ij} psi_i psi_j)) / (int u psi sigma)^2 with
// s^{ij} = cofactor / n and V = int u sigma.
double af_psi_margin(const SupportField& u, const ScalarField& psi) {
  const SphereGrid& grid = *u.grid;
  const int n = grid.dim();
  const CurvatureData cd = curvature(u);
  const VectorField g = gradient(grid, psi);
  ScalarField a(u.size()), b(u.size()), vol(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) {
    const Sym2& c = cd.cofactor[i];
    const double q = n == 1 ? c.tt * g[i].t * g[i].t
                            : c.tt * g[i].t * g[i].t + 2.0 * c.tp * g[i].t * g[i].p + c.pp * g[i].p * g[i].p;
    a[i] = u.u[i] * psi[i] * cd.sigma[i];
    b[i] = u.u[i] * cd.sigma[i] * psi[i] * psi[i] - u.u[i] * u.u[i] * q / n;
    vol[i] = u.u[i] * cd.sigma[i];
  }
  const double A = integrate(grid, a);
  return (A * A - integrate(grid, vol) * integrate(grid, b)) / (A * A);
}

CheckResult check_af_psi(const Suite& s, Rng& rng) {
  double worst = kInf, equality = 0.0;
  for (int k = 0; k < s.opts.samples; ++k) {
    const SupportField u = renormalize(make_shape(random_even_shape(rng, s.n), s.grid));
    const ScalarField psi = sample(*s.grid, random_even_polynomial(rng, 1.0));
    worst = std::min(worst, af_psi_margin(u, psi));
    const Vec3 w{rng.uniform(-0.2, 0.2), rng.uniform(-0.2, 0.2), s.n == 1 ? 0.0 : rng.uniform(-0.2, 0.2)};
    ScalarField lin(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) lin[i] = 1.0 + dot(s.grid->node(i), w) / u.u[i];
    equality = std::max(equality, std::abs(af_psi_margin(u, lin)));
  }
  return {"af_psi", s.opts.samples, {item("margin", worst, 1e-6, true), item("equality", equality, 1e-3, false)}};
}

double santalo_ratio(const SupportField& u) {
  const double area = sphere_area(u.grid->dim());
  return volume(u) * dual_volume(u) / (area * area);
}

CheckResult check_bs(const Suite& s, Rng& rng) {
  double worst = -kInf, equality = 0.0;
  for (int k = 0; k < s.opts.samples; ++k) {
    worst = std::max(worst, santalo_ratio(make_shape(random_even_shape(rng, s.n), s.grid)) - 1.0);
    const Vec3 axes{rng.uniform(0.85, 1.2), rng.uniform(0.85, 1.2), s.n == 1 ? 1.0 : rng.uniform(0.85, 1.2)};
    const SupportField e = make_shape(Shape::rotated_ellipsoid(axes, rng.rotation(s.n)), s.grid);
    equality = std::max(equality, std::abs(santalo_ratio(e) - 1.0));
  }
  return {"bs", s.opts.samples, {item("excess", worst, 1e-3, false), item("ellipsoid", equality, 1e-3, false)}};
}

CheckResult check_polar(const Suite& s, Rng& rng) {
  double worst = 0.0;
  for (int k = 0; k < s.opts.samples; ++k) {
    const Shape shape = Shape::perturbed(Shape::sphere(1.0), 0.05, random_even_polynomial(rng, 1.0));
    worst = std::max(worst, polar_identity_residual(make_shape(shape, s.grid)));
  }
  return {"polar", s.opts.samples, {item("residual", worst, 5e-3, false)}};
}

FlowParams random_regime_a(const Suite& s, Rng& rng) {
  const double beta = rng.uniform(0.5, 2.0);
  const double lo = 1.0 - beta, hi = 1.0 + s.n * beta;
  const double alpha = lo + (hi - lo) * rng.uniform(0.1, 0.9);
  return FlowParams::make(*s.grid, alpha, beta, sample(*s.grid, random_even_polynomial(rng, 0.5)), true);
}

CheckResult check_dzp(const Suite& s, Rng& rng) {
  double worst = 0.0;
  for (int k = 0; k < s.opts.samples; ++k) {
    FlowConfig cfg;
    cfg.params = random_regime_a(s, rng);
    cfg.initial = make_shape(Shape::perturbed(Shape::sphere(1.0), 0.1, random_even_polynomial(rng, 1.0)), s.grid);
    worst = std::max(worst, dZp_identity_residual(cfg.initial, cfg));
  }
  return {"dzp", s.opts.samples, {item("residual", worst, 1e-2, false)}};
}

CheckResult check_holder(const Suite& s, Rng& rng) {
  double worst = kInf;
  for (int k = 0; k < s.opts.samples; ++k) {
    const SupportField u = make_shape(random_even_shape(rng, s.n), s.grid);
    const FlowParams params = random_regime_a(s, rng);
    std::array<double, 3> e{rng.uniform(-1.0, 3.0), rng.uniform(-1.0, 3.0), rng.uniform(-1.0, 3.0)};
    std::sort(e.begin(), e.end());
    if (e[1] - e[0] < 1e-3 || e[2] - e[1] < 1e-3) e = {e[0], e[0] + 0.5, e[0] + 1.0};
    const CurvatureData cd = curvature(u);
    worst = std::min(worst, holder_margin(e[0], e[1], e[2], u, cd, params));
  }
  // rho constant on the unit sphere with f = 1: the ladder is an equality.
  const SupportField ball = make_shape(Shape::sphere(1.0), s.grid);
  const FlowParams flat = FlowParams::make(*s.grid, 1.0, 1.0, ScalarField(s.grid->size(), 1.0), true);
  const double equality = std::abs(holder_margin(-0.5, 0.5, 2.0, ball, curvature(ball), flat));
  return {"holder", s.opts.samples, {item("margin", worst, 1e-12, true), item("equality", equality, 1e-12, false)}};
}

using CheckFn = CheckResult (*)(const Suite&, Rng&);

const std::vector<std::pair<std::string, CheckFn>>& registry() {
  static const std::vector<std::pair<std::string, CheckFn>> r{{"af", check_af},       {"af_psi", check_af_psi},
                                                              {"bs", check_bs},       {"polar", check_polar},
                                                              {"dzp", check_dzp},     {"holder", check_holder}};
  return r;
}

}  // namespace

bool CheckResult::pass() const {
  return std::all_of(items.begin(), items.end(), [](const CheckItem& c) { return c.pass; });
}

bool VerifyReport::pass() const {
  return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.pass(); });
}

const std::vector<std::string>& all_checks() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> v;
    for (const auto& [name, fn] : registry()) v.push_back(name);
    return v;
  }();
  return names;
}

VerifyReport run_verify(const VerifyOptions& opts) {
  if (!opts.grid) throw Error(ErrorCode::config, "verify needs a grid");
  if (opts.samples < 1) throw Error(ErrorCode::config, "verify needs at least one sample");
  const std::vector<std::string>& wanted = opts.checks.empty() ? all_checks() : opts.checks;
  for (const std::string& w : wanted) {
    if (std::find(all_checks().begin(), all_checks().end(), w) == all_checks().end()) {
      throw Error(ErrorCode::config, "unknown check '" + w + "'");
    }
  }
  const Suite suite{opts, opts.grid, opts.grid->dim()};
  VerifyReport rep;
  const auto& reg = registry();
  for (std::size_t idx = 0; idx < reg.size(); ++idx) {
    if (std::find(wanted.begin(), wanted.end(), reg[idx].first) == wanted.end()) continue;
    // Each check draws from its own stream so that selecting a subset does not change results.
    Rng rng(opts.seed * 1000003ULL + idx);
    CheckResult res = reg[idx].second(suite, rng);
    for (CheckItem& it : res.items) {
      const auto over = opts.item_tolerance.find(res.name + "." + it.name);
      if (over != opts.item_tolerance.end()) it.tolerance = over->second;
      if (opts.tolerance) it.tolerance = *opts.tolerance;
      it.pass = it.lower_bound ? it.value >= -it.tolerance : it.value <= it.tolerance;
    }
    rep.checks.push_back(std::move(res));
  }
  return rep;
}

}  // namespace minkflow
