#pragma once

#include <Eigen/Dense>
#include <span>
#include <vector>

#include "warpiso/geometry.hpp"
#include "warpiso/warp_model.hpp"

namespace warpiso {

namespace detail {

/// Unit-sphere chart c(u1, ..., un) with c_{n+1} = sin u1, and its angle
/// derivatives. dir has n+1 components; jac is (n+1) x n with columns
/// d(dir)/du_j. Valid at any angles; the chart is non-degenerate for
/// |u1| < pi/2.
void sphere_dir_jacobian(std::span<const double> u, Eigen::VectorXd& dir,
                         Eigen::MatrixXd& jac);

/// Scan a derivative profile for positivity; returns the failing u1 range
/// (lo > hi when the profile stays positive).
struct MonotoneScan {
  bool monotone;
  double fail_lo;
  double fail_hi;
};
MonotoneScan scan_monotone(const std::function<double(double)>& deriv,
                           double lo, double hi, int grid);

}  // namespace detail

/// Per-point geometric data on the perturbed surface, evaluated at the
/// representative angles (u1, 0, ..., 0).
struct SurfaceSample {
  double u1;
  Eigen::VectorXd position;   // embedding point Y
  double radius;              // Euclidean |Y|
  double rho;                 // |Y|^2 / 2
  Eigen::MatrixXd tangents;   // n x (n+1), rows dY/du_i
  Eigen::VectorXd normal;     // outward unit normal in the warped metric
  Eigen::VectorXd killing;    // conformal Killing field, X^a = f(|Y|) Y^a
  double support;             // inner(X, normal)
  double area_density;        // sqrt(det of the induced metric)
};

/// Least-squares fit of the second-order volume coefficient over an
/// epsilon ladder, against the analytic value
///   c = -r^{n+1} Phi(r) omega_n / (2 (n+1) f^3(r)).
struct VolumeGapFit {
  std::vector<double> ladder;
  std::vector<double> gaps;
  double c_measured;
  double c_analytic;
  double rel_discrepancy;
  bool below_noise;  // every gap sits under the rounding floor
};

/// Measured vs analytic Taylor coefficients of g(r(eps)) * phi(eps) in eps
/// at a fixed u1.
struct GphiSeriesReport {
  double u1;
  double linear_measured;
  double linear_analytic;
  double linear_rel_err;
  double quadratic_measured;
  double quadratic_analytic;
  double quadratic_rel_err;
};

/// The family of perturbed hypersurfaces over the geodesic sphere of
/// radius r: the sphere chart is shifted along the last Cartesian axis by
///   eps + eps^2 h1(sin u1),   h1(s) = (f^2(r) - 1) / (2 r f^2(r)) * s,
/// where the quadratic corrector h1 restores the induced metric to the
/// round sphere metric through second order (toggled by include_h1).
class PerturbedSphere {
 public:
  /// Throws SpecError if r is outside the spec's validity interval.
  PerturbedSphere(WarpSpec spec, double r, bool include_h1 = true);

  const WarpSpec& spec() const { return spec_; }
  double base_radius() const { return r_; }
  int n() const { return spec_.n(); }
  bool include_h1() const { return include_h1_; }
  double alpha() const { return alpha_; }
  /// Construction-time bound on eps; ops reject anything larger.
  double eps_cap() const { return 0.1 * r_; }

  /// Offset along the last axis at a given sin u1.
  double offset(double eps, double sin_u1) const;

  /// Embedding point at (u1, other_angles); other_angles must have n-1
  /// entries (or be empty, meaning all zero).
  Eigen::VectorXd embed(double eps, double u1,
                        std::span<const double> other_angles = {}) const;

  /// Full per-point sample at the representative angles (u1, 0, ..., 0).
  SurfaceSample sample(double eps, double u1) const;

  /// | |Y| - (r + eps sin u1 + eps^2/(2r) (cos^2 u1 + 2 alpha sin^2 u1)) |.
  double radial_expansion_defect(double eps, double u1) const;

  /// Support function via the outward normal: inner(X, nu).
  double support_function(double eps, double u1) const;

  /// Support function via the radial graph: sqrt(2 rho - |grad rho|^2/f^2),
  /// with the gradient taken in the round metric of the base sphere.
  /// Throws EvalError if the radicand turns negative.
  double support_function_via_rho(double eps, double u1) const;

  /// Max-norm distance between the induced metric at (u1, 0, ..., 0) and
  /// r^2 times the round-sphere components, maximized over a pole-free
  /// u1 grid of Gauss-Legendre nodes.
  double isometry_defect(double eps, int grid_points = 64) const;

  double surface_area(double eps, const QuadratureOptions& quad = {}) const;

  /// Volume by the support-function flux formula,
  ///   omega_{n-1} \int g(|Y|) phi sqrt(det G) du1.
  double enclosed_volume_flux(double eps, const QuadratureOptions& quad = {}) const;

  /// Volume by polar slicing (independent oracle); requires the latitude
  /// map u1 -> psi to be strictly increasing (star-shapedness), otherwise
  /// throws StarShapeError with the failing range.
  double enclosed_volume_radial(double eps, const QuadratureOptions& quad = {}) const;

  /// Vol(M_eps) - Vol(B(r)) computed in difference form: the radial
  /// integrand uses \int_r^{R(u1)} t^n/f dt, so it stays well-defined even
  /// when the weight integral from 0 does not exist (ads-type metrics).
  double volume_gap(double eps, const QuadratureOptions& quad = {}) const;

  /// Fit of gap/eps^2 over the ladder (largest first). Requires at least
  /// 5 ladder points and include_h1 = true.
  VolumeGapFit volume_gap_coefficient(std::span<const double> ladder,
                                      const QuadratureOptions& quad = {}) const;

  /// Taylor coefficients of A(eps) = g(|Y|) phi(eps) at fixed u1 against
  /// the closed forms; requires include_h1 = true.
  GphiSeriesReport gphi_series_check(double u1, std::span<const double> ladder,
                                     const QuadratureOptions& quad = {}) const;

  /// Default ladder r 2^{-k}, k = 4..10 (strictly decreasing).
  std::vector<double> default_ladder() const;

 private:
  struct Frame;  // scalar per-(eps, u1) quantities in the 2-plane
  Frame frame(double eps, double u1) const;
  void require_eps(double eps) const;

  WarpSpec spec_;
  double r_;
  bool include_h1_;
  double alpha_;
};

}  // namespace warpiso
