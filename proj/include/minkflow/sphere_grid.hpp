#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <vector>

namespace minkflow {

using Vec3 = std::array<double, 3>;

inline double dot(const Vec3& a, const Vec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }

/// Scalar samples, one per grid node.
using ScalarField = std::vector<double>;

/// Tangent vector in the local orthonormal frame {e_theta, e_phi}. For n = 1 only `t` is used.
struct FrameVec {
  double t = 0.0;
  double p = 0.0;
};
using VectorField = std::vector<FrameVec>;

/// Symmetric 2x2 tensor in the local orthonormal frame. For n = 1 only `tt` is used.
struct Sym2 {
  double tt = 0.0;
  double tp = 0.0;
  double pp = 0.0;
};
using SymMatrixField = std::vector<Sym2>;

/// |S^n|: 2*pi for the circle, 4*pi for the 2-sphere.
double sphere_area(int n);

/**
 * Discretization of S^1 or S^2.
 *
 * n = 1: N uniform periodic angles theta_k = 2*pi*k/N.
 * n = 2: colatitude-offset latitude-longitude grid, theta_j = (j + 1/2)*pi/N_theta,
 *        phi_k = 2*pi*k/N_phi, stored row-major (index = j*N_phi + k). No node sits on a pole.
 *
 * Node coordinates are built from mirrored trig tables so that the antipode of every node is
 * its exact floating-point negation.
 */
class SphereGrid {
 public:
  /// Throws Error(invalid_dimension | resolution_too_small). n_phi is ignored for n = 1.
  static std::shared_ptr<const SphereGrid> build(int n, int n_theta, int n_phi = 0);

  int dim() const { return n_; }
  int n_theta() const { return n_theta_; }
  /// Longitude count; equals 1 for n = 1 so that size() == n_theta() * n_phi().
  int n_phi() const { return n_phi_; }
  std::size_t size() const { return nodes_.size(); }

  std::size_t index(int j, int k) const {
    return static_cast<std::size_t>(j) * static_cast<std::size_t>(n_phi_) + static_cast<std::size_t>(k);
  }
  int row(std::size_t i) const { return static_cast<int>(i / static_cast<std::size_t>(n_phi_)); }
  int col(std::size_t i) const { return static_cast<int>(i % static_cast<std::size_t>(n_phi_)); }

  const Vec3& node(std::size_t i) const { return nodes_[i]; }
  std::span<const Vec3> nodes() const { return nodes_; }
  std::span<const double> weights() const { return weights_; }
  std::size_t antipode(std::size_t i) const { return antipode_[i]; }

  /// Unit tangent vectors of the local frame at node i (e_phi is zero for n = 1).
  Vec3 e_theta(std::size_t i) const;
  Vec3 e_phi(std::size_t i) const;

  double dtheta() const { return dtheta_; }
  double dphi() const { return dphi_; }
  /// Nominal (smallest) angular spacing: min(dtheta, dphi) for n = 2, 2*pi/N for n = 1.
  double h_min() const { return h_min_; }
  double area() const { return sphere_area(n_); }

  // Per-row / per-column trig tables (mirrored for exact antipodal symmetry).
  double sin_theta(int j) const { return sin_t_[static_cast<std::size_t>(j)]; }
  double cos_theta(int j) const { return cos_t_[static_cast<std::size_t>(j)]; }
  double cot_theta(int j) const { return cot_t_[static_cast<std::size_t>(j)]; }
  double cos_phi(int k) const { return cos_p_[static_cast<std::size_t>(k)]; }
  double sin_phi(int k) const { return sin_p_[static_cast<std::size_t>(k)]; }

  /// Row index continued across the poles: g(theta < 0, phi) = g(-theta, phi + pi).
  /// Works for any j in [-n_theta, 2*n_theta) and any k.
  std::size_t wrapped_index(int j, int k) const;

  bool same_layout(const SphereGrid& other) const {
    return n_ == other.n_ && n_theta_ == other.n_theta_ && n_phi_ == other.n_phi_;
  }

 private:
  SphereGrid() = default;

  int n_ = 0;
  int n_theta_ = 0;
  int n_phi_ = 1;
  double dtheta_ = 0.0;
  double dphi_ = 0.0;
  double h_min_ = 0.0;
  std::vector<Vec3> nodes_;
  std::vector<double> weights_;
  std::vector<std::size_t> antipode_;
  std::vector<double> sin_t_, cos_t_, cot_t_, cos_p_, sin_p_;
};

using GridPtr = std::shared_ptr<const SphereGrid>;

/// Samples a function of the unit normal on every node.
ScalarField sample(const SphereGrid& grid, const std::function<double(const Vec3&)>& fn);

/// Sum_i g_i * w_i. Throws Error(size_mismatch).
double integrate(const SphereGrid& grid, std::span<const double> g);

/// Centered-difference covariant gradient in the orthonormal frame.
VectorField gradient(const SphereGrid& grid, std::span<const double> g);

/// Centered-difference covariant Hessian in the orthonormal frame:
///   H_tt = g_tt,  H_tp = (g_tp - cot(theta) g_p) / sin(theta),  H_pp = g_pp / sin^2(theta) + cot(theta) g_t.
SymMatrixField covariant_hessian(const SphereGrid& grid, std::span<const double> g);

/// Gradient and Hessian from one stencil pass.
void derivatives(const SphereGrid& grid, std::span<const double> g, VectorField& grad, SymMatrixField& hess);

/// Trace of the covariant Hessian.
ScalarField laplacian(const SphereGrid& grid, std::span<const double> g);

/// Ambient-space vector of a frame field at node i.
Vec3 to_ambient(const SphereGrid& grid, std::size_t i, const FrameVec& v);

/// Bicubic (n = 2) or cubic (n = 1) Lagrange interpolation at an arbitrary unit direction.
double interpolate(const SphereGrid& grid, std::span<const double> g, const Vec3& direction);

/// Largest longitude wavenumber retained on row j by the polar filter of strength c
/// (returns n_phi/2 when the row is untouched). c <= 0 disables filtering.
int polar_filter_cutoff(const SphereGrid& grid, int j, double c);

/// In-place longitudinal low-pass on rows near the poles (no-op for n = 1). Rows far from the
/// poles and constant rows are returned unchanged up to roundoff.
void polar_filter(const SphereGrid& grid, std::span<double> g, double c);

/// Maximum of |g(x) - g(-x)| over the grid.
double antipodal_asymmetry(const SphereGrid& grid, std::span<const double> g);

/// g <- (g + g o antipode) / 2, exactly even afterwards.
void symmetrize(const SphereGrid& grid, std::span<double> g);

}  // namespace minkflow
