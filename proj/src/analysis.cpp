#include "warpiso/analysis.hpp"

#include <cmath>
#include <limits>

namespace warpiso {

ConvergenceReport fit_order(std::string quantity, std::span<const double> ladder,
                            std::span<const double> defects, double expected_order,
                            OrderCheck check, double scale, double slope_tol) {
  if (ladder.size() != defects.size() || ladder.empty()) {
    throw FitError("ladder and defect lists must be non-empty and aligned");
  }
  for (std::size_t i = 1; i < ladder.size(); ++i) {
    if (!(ladder[i] < ladder[i - 1])) {
      throw FitError("ladder must be strictly decreasing");
    }
  }
  ConvergenceReport report;
  report.quantity = std::move(quantity);
  report.ladder.assign(ladder.begin(), ladder.end());
  report.defects.assign(defects.begin(), defects.end());
  report.expected_order = expected_order;
  report.check = check;

  const double floor =
      1e3 * std::numeric_limits<double>::epsilon() * std::max(scale, 0.0);
  report.used.resize(ladder.size(), false);
  std::vector<double> xs, ys;
  for (std::size_t i = 0; i < ladder.size(); ++i) {
    if (defects[i] < 0.0) throw FitError("defects must be non-negative");
    if (defects[i] > floor) {
      report.used[i] = true;
      xs.push_back(std::log(ladder[i]));
      ys.push_back(std::log(defects[i]));
    }
  }
  if (xs.empty()) {
    report.below_noise_floor = true;
    report.slope = std::numeric_limits<double>::quiet_NaN();
    report.pass = true;  // exact to rounding
    return report;
  }
  if (xs.size() < 2) {
    throw FitError("too few usable points above the noise floor for '" +
                   report.quantity + "'");
  }
  const double m = static_cast<double>(xs.size());
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sx += xs[i];
    sy += ys[i];
    sxx += xs[i] * xs[i];
    sxy += xs[i] * ys[i];
  }
  report.slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
  const double intercept = (sy - report.slope * sx) / m;
  double rss = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double e = ys[i] - (intercept + report.slope * xs[i]);
    rss += e * e;
  }
  report.residual = std::sqrt(rss / m);
  report.pass = check == OrderCheck::exact
                    ? std::abs(report.slope - expected_order) <= slope_tol
                    : report.slope >= expected_order - slope_tol;
  return report;
}

PhiProfile scan_phi(const WarpSpec& spec, double lo, double hi, int grid_size) {
  ConditionScanOptions opts;
  opts.grid_size = grid_size;
  return glw_condition(spec, lo, hi, opts);
}

CounterexampleCertificate certify(const WarpSpec& spec, double r, double eps,
                                  const QuadratureOptions& quad) {
  const double phi = phi_stability(spec, r);
  // Borderline radii are refused: a certificate must be unambiguous.
  if (!(phi < -1e-12)) {
    throw CertificationRefused(
        "certification refused: Phi(" + std::to_string(r) + ") = " +
            std::to_string(phi) + " is not strictly negative",
        phi);
  }
  PerturbedSphere surface(spec, r, /*include_h1=*/true);

  CounterexampleCertificate cert;
  cert.expression_text = spec.expression_text();
  cert.is_squared = spec.is_squared();
  cert.params = spec.params();
  cert.n = spec.n();
  cert.r_min = spec.r_min();
  cert.r_max = spec.r_max();
  cert.quad_abs_tol = quad.abs_tol;
  cert.quad_rel_tol = quad.rel_tol;

  cert.r = r;
  cert.phi = phi;
  cert.eps = eps;
  cert.vol_ball = ball_volume(spec, r, quad);
  cert.vol_flux = surface.enclosed_volume_flux(eps, quad);
  cert.vol_radial = surface.enclosed_volume_radial(eps, quad);

  const double agreement_tol =
      1e-8 * std::max(1.0, std::max(std::abs(cert.vol_flux), std::abs(cert.vol_radial)));
  if (std::abs(cert.vol_flux - cert.vol_radial) > agreement_tol) {
    throw EvalError("flux and radial volumes disagree beyond tolerance: " +
                    std::to_string(cert.vol_flux) + " vs " +
                    std::to_string(cert.vol_radial));
  }

  cert.gap = cert.vol_flux - cert.vol_ball;
  const int n = spec.n();
  const double f = spec.f_value(r);
  const double c_analytic = -std::pow(r, n + 1) * phi * unit_sphere_area(n) /
                            (2.0 * (n + 1) * f * f * f);
  cert.gap_predicted = c_analytic * eps * eps;
  cert.prediction_rel_error =
      std::abs(cert.gap - cert.gap_predicted) / std::abs(cert.gap_predicted);

  cert.area = surface.surface_area(eps, quad);
  const double round_area = sphere_area(spec, r);
  cert.area_defect = std::abs(cert.area - round_area);
  cert.area_defect_ratio = cert.area_defect / (eps * eps * eps * round_area);

  if (!(cert.gap > 0.0)) {
    throw EvalError("certificate invariant failed: volume gap " +
                    std::to_string(cert.gap) + " is not positive");
  }
  return cert;
}

}  // namespace warpiso
