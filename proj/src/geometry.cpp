#include "warpiso/geometry.hpp"

#include <cmath>

namespace warpiso {

AmbientMetricTensor metric_at(const WarpSpec& spec, const Eigen::VectorXd& z) {
  const double r = z.norm();
  if (!(r > 0.0)) throw EvalError("metric undefined at the origin");
  spec.require_in_interval(r);
  const double f2 = spec.f2_value(r);
  const int dim = static_cast<int>(z.size());
  AmbientMetricTensor tensor;
  tensor.point = z;
  tensor.radius = r;
  tensor.components = Eigen::MatrixXd::Identity(dim, dim) +
                      (1.0 / f2 - 1.0) / (r * r) * (z * z.transpose());
  return tensor;
}

double inner(const WarpSpec& spec, const Eigen::VectorXd& z,
             const Eigen::VectorXd& v, const Eigen::VectorXd& w) {
  const double r = z.norm();
  if (!(r > 0.0)) throw EvalError("metric undefined at the origin");
  spec.require_in_interval(r);
  const double f2 = spec.f2_value(r);
  return v.dot(w) + (1.0 / f2 - 1.0) * (v.dot(z) / r) * (w.dot(z) / r);
}

double unit_sphere_area(int k) {
  if (k < 0) throw SpecError("sphere dimension must be >= 0");
  const double half = 0.5 * (k + 1);
  return std::exp(std::log(2.0) + half * std::log(M_PI) - std::lgamma(half));
}

double warped_shell_integral(const WarpSpec& spec, double a, double b,
                             const QuadratureOptions& quad) {
  const int n = spec.n();
  return integrate(
      [&](double t) { return std::pow(t, n) / spec.f_raw(t); }, a, b, quad);
}

GWeights g_weight(const WarpSpec& spec, double r, const QuadratureOptions& quad) {
  if (!(r > 0.0)) throw EvalError("g(r) requires r > 0");
  const int n = spec.n();
  const double integral = warped_shell_integral(spec, 0.0, r, quad);
  const double g = integral / std::pow(r, n + 1);
  if (!(g > 0.0)) throw EvalError("g(r) must be positive");
  const double f = spec.f_value(r);
  const double fp = spec.f_prime(r);
  const double gp = 1.0 / (r * f) - (n + 1) * g / r;
  const double gpp =
      -(f + r * fp) / (r * r * f * f) - (n + 1) * (gp / r - g / (r * r));
  return {r, g, gp, gpp};
}

double ball_volume(const WarpSpec& spec, double r, const QuadratureOptions& quad) {
  const GWeights w = g_weight(spec, r, quad);
  return w.g * std::pow(r, spec.n() + 1) * unit_sphere_area(spec.n());
}

double sphere_area(const WarpSpec& spec, double r) {
  spec.require_in_interval(r);
  return unit_sphere_area(spec.n()) * std::pow(r, spec.n());
}

double axisym_integral(const std::function<double(double)>& F, int n,
                       const QuadratureOptions& quad) {
  if (n < 1) throw SpecError("axisymmetric reduction requires n >= 1");
  const double w = unit_sphere_area(n - 1);
  return w * integrate(
                 [&](double u) {
                   const double c = std::cos(u);
                   return F(u) * std::pow(c, n - 1);
                 },
                 -M_PI / 2, M_PI / 2, quad);
}

GDerivativeCheck check_g_derivatives(const WarpSpec& spec, double r,
                                     double step_rel) {
  const int n = spec.n();
  const double h = step_rel * r;
  QuadratureOptions quad;
  quad.abs_tol = 0.0;
  quad.rel_tol = 1e-14;

  const double w0 = warped_shell_integral(spec, 0.0, r, quad);
  // W at the stencil offsets, built incrementally so adjacent samples share
  // no cancelling 0..r part.
  double wv[5];  // offsets -2h..2h
  wv[2] = w0;
  wv[3] = w0 + warped_shell_integral(spec, r, r + h, quad);
  wv[4] = wv[3] + warped_shell_integral(spec, r + h, r + 2 * h, quad);
  wv[1] = w0 - warped_shell_integral(spec, r - h, r, quad);
  wv[0] = wv[1] - warped_shell_integral(spec, r - 2 * h, r - h, quad);

  double gv[5];
  for (int k = 0; k < 5; ++k) {
    const double rk = r + (k - 2) * h;
    gv[k] = wv[k] / std::pow(rk, n + 1);
  }

  const double gp_fd = (-gv[4] + 8 * gv[3] - 8 * gv[1] + gv[0]) / (12 * h);
  const double gpp_fd =
      (-gv[4] + 16 * gv[3] - 30 * gv[2] + 16 * gv[1] - gv[0]) / (12 * h * h);
  const double wp_fd = (-wv[4] + 8 * wv[3] - 8 * wv[1] + wv[0]) / (12 * h);

  const GWeights gw = g_weight(spec, r, quad);
  const double ft_exact = std::pow(r, n) / spec.f_value(r);

  GDerivativeCheck check;
  check.gp_rel_err = std::abs(gp_fd - gw.g_prime) /
                     std::max(std::abs(gw.g_prime), gw.g / r);
  check.gpp_rel_err = std::abs(gpp_fd - gw.g_second) /
                      std::max(std::abs(gw.g_second), gw.g / (r * r));
  check.ft_rel_err = std::abs(wp_fd - ft_exact) / std::abs(ft_exact);
  return check;
}

}  // namespace warpiso
