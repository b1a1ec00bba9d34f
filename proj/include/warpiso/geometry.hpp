#pragma once

#include <Eigen/Dense>
#include <functional>

#include "warpiso/quadrature.hpp"
#include "warpiso/warp_model.hpp"

namespace warpiso {

/// Ambient metric components at a Cartesian point z with |z| = r > 0:
///   g_ab = delta_ab + (1/f^2(r) - 1) z_a z_b / r^2.
struct AmbientMetricTensor {
  Eigen::VectorXd point;
  double radius;
  Eigen::MatrixXd components;
};

AmbientMetricTensor metric_at(const WarpSpec& spec, const Eigen::VectorXd& z);

/// Warped inner product g(v, w) at z, without materializing the matrix.
double inner(const WarpSpec& spec, const Eigen::VectorXd& z,
             const Eigen::VectorXd& v, const Eigen::VectorXd& w);

/// Surface measure of the unit k-sphere, 2 pi^{(k+1)/2} / Gamma((k+1)/2),
/// via log-Gamma; omega_0 = 2.
double unit_sphere_area(int k);

/// Volume weight of the flux formula and its first two derivatives:
///   g(r)  = r^{-(n+1)} \int_0^r t^n / f(t) dt        (adaptive quadrature)
///   g'(r) = 1/(r f) - (n+1) g/r                      (closed form)
///   g''(r)= -(f + r f')/(r^2 f^2) - (n+1)(g'/r - g/r^2)
struct GWeights {
  double r;
  double g;
  double g_prime;
  double g_second;
};

GWeights g_weight(const WarpSpec& spec, double r,
                  const QuadratureOptions& quad = {});

/// \int_a^b t^n / f(t) dt with a, b anywhere the expression stays positive.
double warped_shell_integral(const WarpSpec& spec, double a, double b,
                             const QuadratureOptions& quad = {});

/// Volume of the geodesic ball B(r): omega_n \int_0^r t^n/f(t) dt,
/// computed as g(r) r^{n+1} omega_n.
double ball_volume(const WarpSpec& spec, double r,
                   const QuadratureOptions& quad = {});

/// Area of the geodesic sphere S(r): omega_n r^n.
double sphere_area(const WarpSpec& spec, double r);

/// Integral over S^n of a function of the first sphere angle:
///   \int_{S^n} F(u1) dS_n = omega_{n-1} \int_{-pi/2}^{pi/2} F(u) cos^{n-1}u du.
double axisym_integral(const std::function<double(double)>& F, int n,
                       const QuadratureOptions& quad = {});

/// Cross-check of the closed-form g' and g'' against finite differences of
/// the quadrature-only g, with fourth-order central stencils. The stencil
/// samples are assembled from shell-integral increments rather than
/// independent integrals from 0, which keeps the difference noise near
/// machine level. Relative errors use max(|closed form|, g/r^k) as the
/// denominator so identically-zero derivatives (f = 1) stay meaningful.
struct GDerivativeCheck {
  double gp_rel_err;
  double gpp_rel_err;
  double ft_rel_err;  // d/dr [g r^{n+1}] against r^n / f(r)
};

GDerivativeCheck check_g_derivatives(const WarpSpec& spec, double r,
                                     double step_rel = 5e-3);

}  // namespace warpiso
