#include "minkflow/sphere_grid.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "minkflow/error.hpp"
#include "minkflow/parallel.hpp"

namespace minkflow {

namespace {

constexpr double kPi = std::numbers::pi;

void require_size(const SphereGrid& grid, std::size_t n) {
  if (n != grid.size()) {
    throw Error(ErrorCode::size_mismatch,
                "field has " + std::to_string(n) + " samples, grid has " + std::to_string(grid.size()));
  }
}

int positive_mod(int a, int m) {
  const int r = a % m;
  return r < 0 ? r + m : r;
}

// Mirrored angle tables: entries k >= count/2 are exact negations of entries k - count/2.
void periodic_tables(int count, std::vector<double>& cosv, std::vector<double>& sinv) {
  cosv.assign(static_cast<std::size_t>(count), 0.0);
  sinv.assign(static_cast<std::size_t>(count), 0.0);
  const int half = count / 2;
  for (int k = 0; k < half; ++k) {
    const double phi = 2.0 * kPi * k / count;
    cosv[static_cast<std::size_t>(k)] = std::cos(phi);
    sinv[static_cast<std::size_t>(k)] = std::sin(phi);
    cosv[static_cast<std::size_t>(k + half)] = -cosv[static_cast<std::size_t>(k)];
    sinv[static_cast<std::size_t>(k + half)] = -sinv[static_cast<std::size_t>(k)];
  }
}

// Cubic Lagrange weights for offsets -1, 0, 1, 2 at fractional position f in [0, 1).
std::array<double, 4> cubic_weights(double f) {
  return {-f * (f - 1.0) * (f - 2.0) / 6.0, (f + 1.0) * (f - 1.0) * (f - 2.0) / 2.0,
          -(f + 1.0) * f * (f - 2.0) / 2.0, (f + 1.0) * f * (f - 1.0) / 6.0};
}

}  // namespace

double sphere_area(int n) {
  if (n == 1) return 2.0 * kPi;
  if (n == 2) return 4.0 * kPi;
  throw Error(ErrorCode::invalid_dimension, "n must be 1 or 2, got " + std::to_string(n));
}

std::shared_ptr<const SphereGrid> SphereGrid::build(int n, int n_theta, int n_phi) {
  if (n != 1 && n != 2) {
    throw Error(ErrorCode::invalid_dimension, "n must be 1 or 2, got " + std::to_string(n));
  }
  if (n_theta < 8 || n_theta % 2 != 0) {
    throw Error(ErrorCode::resolution_too_small,
                "N_theta must be even and >= 8 (antipodal pairing), got " + std::to_string(n_theta));
  }
  if (n == 2 && (n_phi < 16 || n_phi % 2 != 0)) {
    throw Error(ErrorCode::resolution_too_small,
                "N_phi must be even and >= 16 (antipodal pairing), got " + std::to_string(n_phi));
  }

  std::shared_ptr<SphereGrid> g(new SphereGrid());
  g->n_ = n;
  g->n_theta_ = n_theta;

  if (n == 1) {
    g->n_phi_ = 1;
    g->dtheta_ = 2.0 * kPi / n_theta;
    g->dphi_ = 0.0;
    g->h_min_ = g->dtheta_;
    periodic_tables(n_theta, g->cos_p_, g->sin_p_);
    g->nodes_.resize(static_cast<std::size_t>(n_theta));
    g->weights_.assign(static_cast<std::size_t>(n_theta), g->dtheta_);
    g->antipode_.resize(static_cast<std::size_t>(n_theta));
    for (int k = 0; k < n_theta; ++k) {
      const auto kk = static_cast<std::size_t>(k);
      g->nodes_[kk] = {g->cos_p_[kk], g->sin_p_[kk], 0.0};
      g->antipode_[kk] = static_cast<std::size_t>((k + n_theta / 2) % n_theta);
    }
    return g;
  }

  g->n_phi_ = n_phi;
  g->dtheta_ = kPi / n_theta;
  g->dphi_ = 2.0 * kPi / n_phi;
  g->h_min_ = std::min(g->dtheta_, g->dphi_);
  periodic_tables(n_phi, g->cos_p_, g->sin_p_);

  const auto nt = static_cast<std::size_t>(n_theta);
  g->sin_t_.resize(nt);
  g->cos_t_.resize(nt);
  g->cot_t_.resize(nt);
  for (int j = 0; j < n_theta / 2; ++j) {
    const double theta = (j + 0.5) * g->dtheta_;
    const auto a = static_cast<std::size_t>(j);
    const auto b = static_cast<std::size_t>(n_theta - 1 - j);
    g->sin_t_[a] = g->sin_t_[b] = std::sin(theta);
    g->cos_t_[a] = std::cos(theta);
    g->cos_t_[b] = -g->cos_t_[a];
    g->cot_t_[a] = g->cos_t_[a] / g->sin_t_[a];
    g->cot_t_[b] = -g->cot_t_[a];
  }

  const double band = 2.0 * std::sin(0.5 * g->dtheta_) * g->dphi_;
  g->nodes_.resize(nt * static_cast<std::size_t>(n_phi));
  g->weights_.resize(g->nodes_.size());
  g->antipode_.resize(g->nodes_.size());
  for (int j = 0; j < n_theta; ++j) {
    for (int k = 0; k < n_phi; ++k) {
      const std::size_t i = g->index(j, k);
      const double s = g->sin_t_[static_cast<std::size_t>(j)];
      g->nodes_[i] = {s * g->cos_p_[static_cast<std::size_t>(k)], s * g->sin_p_[static_cast<std::size_t>(k)],
                      g->cos_t_[static_cast<std::size_t>(j)]};
      g->weights_[i] = band * s;
      g->antipode_[i] = g->index(n_theta - 1 - j, (k + n_phi / 2) % n_phi);
    }
  }
  return g;
}

Vec3 SphereGrid::e_theta(std::size_t i) const {
  if (n_ == 1) {
    return {-sin_p_[i], cos_p_[i], 0.0};
  }
  const auto j = static_cast<std::size_t>(row(i));
  const auto k = static_cast<std::size_t>(col(i));
  return {cos_t_[j] * cos_p_[k], cos_t_[j] * sin_p_[k], -sin_t_[j]};
}

Vec3 SphereGrid::e_phi(std::size_t i) const {
  if (n_ == 1) return {0.0, 0.0, 0.0};
  const auto k = static_cast<std::size_t>(col(i));
  return {-sin_p_[k], cos_p_[k], 0.0};
}

std::size_t SphereGrid::wrapped_index(int j, int k) const {
  if (n_ == 1) return static_cast<std::size_t>(positive_mod(j, n_theta_));
  if (j < 0) {
    j = -1 - j;
    k += n_phi_ / 2;
  } else if (j >= n_theta_) {
    j = 2 * n_theta_ - 1 - j;
    k += n_phi_ / 2;
  }
  return index(j, positive_mod(k, n_phi_));
}

ScalarField sample(const SphereGrid& grid, const std::function<double(const Vec3&)>& fn) {
  ScalarField out(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) out[i] = fn(grid.node(i));
  return out;
}

double integrate(const SphereGrid& grid, std::span<const double> g) {
  require_size(grid, g.size());
  const auto w = grid.weights();
  double sum = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) sum += g[i] * w[i];
  return sum;
}

void derivatives(const SphereGrid& grid, std::span<const double> g, VectorField& grad, SymMatrixField& hess) {
  require_size(grid, g.size());
  grad.assign(g.size(), FrameVec{});
  hess.assign(g.size(), Sym2{});

  if (grid.dim() == 1) {
    const double h = grid.dtheta();
    parallel_for(g.size(), [&](std::size_t i) {
      const int k = static_cast<int>(i);
      const double gp = g[grid.wrapped_index(k + 1, 0)];
      const double gm = g[grid.wrapped_index(k - 1, 0)];
      grad[i].t = (gp - gm) / (2.0 * h);
      hess[i].tt = ((gp + gm) - 2.0 * g[i]) / (h * h);
    });
    return;
  }

  // Longitude modes m = 1 and m = 3 behave like sin^m(theta) near a pole, and centered
  // theta-differences of them lose an order in the cot(theta) terms on the pole rows. Those
  // modes are split off per row and differentiated through q = g_m / sin^m(theta), which is
  // even and smooth across the poles. The remainder goes through the plain stencils.
  const double h = grid.dtheta();
  const double d = grid.dphi();
  const int nt = grid.n_theta();
  const int nphi = grid.n_phi();
  const int half = nphi / 2;
  constexpr std::array<int, 2> kModes{1, 3};
  const auto ntz = static_cast<std::size_t>(nt);
  std::array<std::vector<double>, 2> qa{std::vector<double>(ntz), std::vector<double>(ntz)};
  std::array<std::vector<double>, 2> qb = qa;
  std::vector<double> sin_pow(ntz * 4);  // sin^0 .. sin^3 per row
  for (int j = 0; j < nt; ++j) {
    const double s = grid.sin_theta(j);
    const auto jj = static_cast<std::size_t>(j);
    sin_pow[4 * jj] = 1.0;
    for (std::size_t e = 1; e < 4; ++e) sin_pow[4 * jj + e] = sin_pow[4 * jj + e - 1] * s;
    const std::size_t base = grid.index(j, 0);
    for (std::size_t mi = 0; mi < kModes.size(); ++mi) {
      const int m = kModes[mi];
      double sa = 0.0, sb = 0.0;
      for (int k = 0; k < half; ++k) {
        const double diff = g[base + static_cast<std::size_t>(k)] - g[base + static_cast<std::size_t>(k + half)];
        const int idx = (m * k) % nphi;
        sa += diff * grid.cos_phi(idx);
        sb += diff * grid.sin_phi(idx);
      }
      const double norm = (2.0 / nphi) / sin_pow[4 * jj + static_cast<std::size_t>(m)];
      qa[mi][jj] = sa * norm;
      qb[mi][jj] = sb * norm;
    }
  }
  ScalarField r(g.begin(), g.end());
  for (std::size_t i = 0; i < g.size(); ++i) {
    const auto jj = static_cast<std::size_t>(grid.row(i));
    const int k = grid.col(i);
    double split = 0.0;
    for (std::size_t mi = 0; mi < kModes.size(); ++mi) {
      const int idx = (kModes[mi] * k) % nphi;
      const double sm = sin_pow[4 * jj + static_cast<std::size_t>(kModes[mi])];
      split += (qa[mi][jj] * sm) * grid.cos_phi(idx) + (qb[mi][jj] * sm) * grid.sin_phi(idx);
    }
    r[i] -= split;
  }
  // q is even across either pole for odd m.
  auto qrow = [&](const std::vector<double>& q, int j) {
    if (j < 0) j = -1 - j;
    if (j >= nt) j = 2 * nt - 1 - j;
    return q[static_cast<std::size_t>(j)];
  };

  parallel_for(g.size(), [&](std::size_t i) {
    const int j = grid.row(i);
    const int k = grid.col(i);
    auto val = [&](int jj, int kk) { return r[grid.wrapped_index(jj, kk)]; };
    const double c = r[i];
    const double up = val(j + 1, k);
    const double dn = val(j - 1, k);
    const double east = val(j, k + 1);
    const double west = val(j, k - 1);

    const double gt = (up - dn) / (2.0 * h);
    const double gtt = ((up + dn) - 2.0 * c) / (h * h);
    const double gp = (east - west) / (2.0 * d);
    const double gpp = ((east + west) - 2.0 * c) / (d * d);
    const double gtp =
        ((val(j + 1, k + 1) - val(j + 1, k - 1)) - (val(j - 1, k + 1) - val(j - 1, k - 1))) / (4.0 * h * d);

    const double s = grid.sin_theta(j);
    const double ct = grid.cos_theta(j);
    const double cot = grid.cot_theta(j);
    FrameVec gr{gt, gp / s};
    Sym2 he{gtt, (gtp - cot * gp) / s, gpp / (s * s) + cot * gt};

    // g_m = sin^m(theta) q(theta) Phi(phi), Phi = A cos(m phi) + B sin(m phi), Phi_phi = m Psi.
    const auto jj = static_cast<std::size_t>(j);
    for (std::size_t mi = 0; mi < kModes.size(); ++mi) {
      const int m = kModes[mi];
      const int idx = (m * k) % nphi;
      const double cp = grid.cos_phi(idx);
      const double sp = grid.sin_phi(idx);
      const auto& A = qa[mi];
      const auto& B = qb[mi];
      const double q0 = A[jj] * cp + B[jj] * sp;
      const double qup = qrow(A, j + 1) * cp + qrow(B, j + 1) * sp;
      const double qdn = qrow(A, j - 1) * cp + qrow(B, j - 1) * sp;
      const double q1 = (qup - qdn) / (2.0 * h);
      const double q2 = ((qup + qdn) - 2.0 * q0) / (h * h);
      const double psi0 = B[jj] * cp - A[jj] * sp;
      const double psi1 = ((qrow(B, j + 1) * cp - qrow(A, j + 1) * sp) - (qrow(B, j - 1) * cp - qrow(A, j - 1) * sp)) / (2.0 * h);

      const double* sw = &sin_pow[4 * jj];
      const double sm = sw[m];
      const double sm1 = sw[m - 1];
      const double sm2 = m >= 2 ? sw[m - 2] : 0.0;
      const double mm = m;
      const double d1 = mm * sm1 * ct * q0 + sm * q1;
      const double d2 = mm * (mm - 1.0) * sm2 * (ct * ct) * q0 - mm * sm * q0 + 2.0 * mm * sm1 * ct * q1 + sm * q2;
      gr.t += d1;
      gr.p += mm * sm1 * psi0;
      he.tt += d2;
      he.tp += mm * ((mm - 1.0) * sm2 * ct * psi0 + sm1 * psi1);
      he.pp += mm * (1.0 - mm) * sm2 * q0 - mm * sm * q0 + sm1 * ct * q1;
    }
    grad[i] = gr;
    hess[i] = he;
  });
}

VectorField gradient(const SphereGrid& grid, std::span<const double> g) {
  VectorField grad;
  SymMatrixField hess;
  derivatives(grid, g, grad, hess);
  return grad;
}

SymMatrixField covariant_hessian(const SphereGrid& grid, std::span<const double> g) {
  VectorField grad;
  SymMatrixField hess;
  derivatives(grid, g, grad, hess);
  return hess;
}

ScalarField laplacian(const SphereGrid& grid, std::span<const double> g) {
  const auto hess = covariant_hessian(grid, g);
  ScalarField out(hess.size());
  for (std::size_t i = 0; i < hess.size(); ++i) out[i] = hess[i].tt + (grid.dim() == 2 ? hess[i].pp : 0.0);
  return out;
}

Vec3 to_ambient(const SphereGrid& grid, std::size_t i, const FrameVec& v) {
  const Vec3 et = grid.e_theta(i);
  const Vec3 ep = grid.e_phi(i);
  return {v.t * et[0] + v.p * ep[0], v.t * et[1] + v.p * ep[1], v.t * et[2] + v.p * ep[2]};
}

double interpolate(const SphereGrid& grid, std::span<const double> g, const Vec3& direction) {
  require_size(grid, g.size());
  if (grid.dim() == 1) {
    double theta = std::atan2(direction[1], direction[0]);
    if (theta < 0) theta += 2.0 * kPi;
    const double t = theta / grid.dtheta();
    const int k0 = static_cast<int>(std::floor(t));
    const auto w = cubic_weights(t - k0);
    double sum = 0.0;
    for (int a = 0; a < 4; ++a) sum += w[static_cast<std::size_t>(a)] * g[grid.wrapped_index(k0 - 1 + a, 0)];
    return sum;
  }
  const double z = std::clamp(direction[2], -1.0, 1.0);
  const double theta = std::acos(z);
  double phi = std::atan2(direction[1], direction[0]);
  if (phi < 0) phi += 2.0 * kPi;
  const double s = theta / grid.dtheta() - 0.5;
  const double t = phi / grid.dphi();
  const int j0 = static_cast<int>(std::floor(s));
  const int k0 = static_cast<int>(std::floor(t));
  const auto wr = cubic_weights(s - j0);
  const auto wc = cubic_weights(t - k0);
  double sum = 0.0;
  for (int a = 0; a < 4; ++a) {
    double row = 0.0;
    for (int b = 0; b < 4; ++b) row += wc[static_cast<std::size_t>(b)] * g[grid.wrapped_index(j0 - 1 + a, k0 - 1 + b)];
    sum += wr[static_cast<std::size_t>(a)] * row;
  }
  return sum;
}

int polar_filter_cutoff(const SphereGrid& grid, int j, double c) {
  const int half = grid.n_phi() / 2;
  if (grid.dim() != 2 || c <= 0.0) return half;
  // Keep mode m while its longitudinal stiffness (2/dphi) sin(m dphi/2) / sin(theta)
  // stays within c times the meridional one, 2/dtheta.
  const double bound = c * grid.sin_theta(j) * grid.dphi() / grid.dtheta();
  if (bound >= 1.0) return half;
  const int m = static_cast<int>(std::floor(2.0 * std::asin(bound) / grid.dphi()));
  return std::clamp(m, 0, half);
}

void polar_filter(const SphereGrid& grid, std::span<double> g, double c) {
  require_size(grid, g.size());
  if (grid.dim() != 2 || c <= 0.0) return;
  const int nphi = grid.n_phi();
  const int half = nphi / 2;
  std::vector<double> a, b;
  for (int j = 0; j < grid.n_theta(); ++j) {
    const int mmax = polar_filter_cutoff(grid, j, c);
    if (mmax >= half) continue;
    a.assign(static_cast<std::size_t>(mmax + 1), 0.0);
    b.assign(static_cast<std::size_t>(mmax + 1), 0.0);
    const std::size_t base = grid.index(j, 0);
    for (int m = 0; m <= mmax; ++m) {
      double sa = 0.0, sb = 0.0;
      for (int k = 0; k < nphi; ++k) {
        const int idx = (m * k) % nphi;
        sa += g[base + static_cast<std::size_t>(k)] * grid.cos_phi(idx);
        sb += g[base + static_cast<std::size_t>(k)] * grid.sin_phi(idx);
      }
      const double scale = (m == 0 ? 1.0 : 2.0) / nphi;
      a[static_cast<std::size_t>(m)] = sa * scale;
      b[static_cast<std::size_t>(m)] = sb * scale;
    }
    for (int k = 0; k < nphi; ++k) {
      double v = a[0];
      for (int m = 1; m <= mmax; ++m) {
        const int idx = (m * k) % nphi;
        v += a[static_cast<std::size_t>(m)] * grid.cos_phi(idx) + b[static_cast<std::size_t>(m)] * grid.sin_phi(idx);
      }
      g[base + static_cast<std::size_t>(k)] = v;
    }
  }
}

double antipodal_asymmetry(const SphereGrid& grid, std::span<const double> g) {
  require_size(grid, g.size());
  double worst = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) worst = std::max(worst, std::abs(g[i] - g[grid.antipode(i)]));
  return worst;
}

void symmetrize(const SphereGrid& grid, std::span<double> g) {
  require_size(grid, g.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    const std::size_t a = grid.antipode(i);
    if (a < i) continue;
    const double v = 0.5 * (g[i] + g[a]);
    g[i] = v;
    g[a] = v;
  }
}

}  // namespace minkflow
