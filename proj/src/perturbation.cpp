#include "warpiso/perturbation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace warpiso {

namespace detail {

void sphere_dir_jacobian(std::span<const double> u, Eigen::VectorXd& dir,
                         Eigen::MatrixXd& jac) {
  const int m = static_cast<int>(u.size());
  dir.resize(m + 1);
  jac.setZero(m + 1, m);
  std::vector<double> cu(m), su(m);
  for (int i = 0; i < m; ++i) {
    cu[i] = std::cos(u[i]);
    su[i] = std::sin(u[i]);
  }
  // product of cos(u_i) for i in [0, upto], skipping one index
  auto cos_prod = [&](int upto, int skip) {
    double p = 1.0;
    for (int i = 0; i <= upto; ++i) {
      if (i != skip) p *= cu[i];
    }
    return p;
  };

  dir[0] = cos_prod(m - 1, -1);
  for (int j = 0; j < m; ++j) jac(0, j) = -su[j] * cos_prod(m - 1, j);

  for (int k = 1; k <= m - 1; ++k) {
    const int last = m - 1 - k;   // cos factors run over [0, last]
    const int sidx = m - k;       // the sin factor's angle index
    const double p = cos_prod(last, -1);
    dir[k] = p * su[sidx];
    for (int j = 0; j <= last; ++j) {
      jac(k, j) = -su[j] * cos_prod(last, j) * su[sidx];
    }
    jac(k, sidx) = p * cu[sidx];
  }

  dir[m] = su[0];
  jac(m, 0) = cu[0];
}

MonotoneScan scan_monotone(const std::function<double(double)>& deriv,
                           double lo, double hi, int grid) {
  MonotoneScan scan{true, hi, lo};
  for (int i = 0; i < grid; ++i) {
    const double u = lo + (hi - lo) * (i + 0.5) / grid;
    if (!(deriv(u) > 0.0)) {
      scan.monotone = false;
      scan.fail_lo = std::min(scan.fail_lo, u);
      scan.fail_hi = std::max(scan.fail_hi, u);
    }
  }
  return scan;
}

}  // namespace detail

// ---------------------------------------------------------------------------

PerturbedSphere::PerturbedSphere(WarpSpec spec, double r, bool include_h1)
    : spec_(std::move(spec)), r_(r), include_h1_(include_h1) {
  if (!spec_.contains(r_)) {
    throw SpecError("base radius " + std::to_string(r_) +
                    " outside the validity interval");
  }
  const double f2 = spec_.f2_value(r_);
  alpha_ = (f2 - 1.0) / (2.0 * f2);
}

void PerturbedSphere::require_eps(double eps) const {
  if (!(eps >= 0.0)) throw SpecError("eps must be non-negative");
  if (eps > eps_cap()) {
    throw SpecError("eps = " + std::to_string(eps) + " exceeds the cap 0.1*r = " +
                    std::to_string(eps_cap()));
  }
}

double PerturbedSphere::offset(double eps, double sin_u1) const {
  double a = eps;
  if (include_h1_) a += eps * eps * (alpha_ / r_) * sin_u1;  // h1(s) = alpha s / r
  return a;
}

Eigen::VectorXd PerturbedSphere::embed(double eps, double u1,
                                       std::span<const double> other_angles) const {
  require_eps(eps);
  const int n = spec_.n();
  if (!other_angles.empty() && static_cast<int>(other_angles.size()) != n - 1) {
    throw SpecError("embed expects " + std::to_string(n - 1) +
                    " angles besides u1");
  }
  std::vector<double> u(n, 0.0);
  u[0] = u1;
  for (std::size_t i = 0; i < other_angles.size(); ++i) u[i + 1] = other_angles[i];
  Eigen::VectorXd dir;
  Eigen::MatrixXd jac;
  detail::sphere_dir_jacobian(u, dir, jac);
  Eigen::VectorXd y = r_ * dir;
  y[n] += offset(eps, std::sin(u1));
  return y;
}

// Scalar geometry of the representative point in the plane spanned by the
// first and last axes. H is the horizontal radius r cos u1; V the last
// coordinate r sin u1 + a(u1).
struct PerturbedSphere::Frame {
  double s, c;
  double a, ap;
  double H, V;
  double R, R2;
  double f2R, fR;
  double T1dotT1;   // Euclidean |dY/du1|^2
  double T1dotY;
  double G11;       // warped metric: |dY/du1|^2_g
  double psi_prime_num;  // r^2 + r a' c + r a s  (divide by R^2 for psi')
};

PerturbedSphere::Frame PerturbedSphere::frame(double eps, double u1) const {
  Frame fr;
  fr.s = std::sin(u1);
  fr.c = std::cos(u1);
  fr.a = offset(eps, fr.s);
  fr.ap = include_h1_ ? eps * eps * (alpha_ / r_) * fr.c : 0.0;
  fr.H = r_ * fr.c;
  fr.V = r_ * fr.s + fr.a;
  fr.R2 = fr.H * fr.H + fr.V * fr.V;
  fr.R = std::sqrt(fr.R2);
  fr.f2R = spec_.f2_value(fr.R);
  fr.fR = std::sqrt(fr.f2R);
  const double t1 = -r_ * fr.s;
  const double t2 = r_ * fr.c + fr.ap;
  fr.T1dotT1 = t1 * t1 + t2 * t2;
  fr.T1dotY = t1 * fr.H + t2 * fr.V;
  fr.G11 = fr.T1dotT1 + (1.0 / fr.f2R - 1.0) * (fr.T1dotY * fr.T1dotY) / fr.R2;
  fr.psi_prime_num = r_ * r_ + r_ * fr.ap * fr.c + r_ * fr.a * fr.s;
  return fr;
}

SurfaceSample PerturbedSphere::sample(double eps, double u1) const {
  require_eps(eps);
  const int n = spec_.n();
  std::vector<double> u(n, 0.0);
  u[0] = u1;
  Eigen::VectorXd dir;
  Eigen::MatrixXd jac;
  detail::sphere_dir_jacobian(u, dir, jac);

  SurfaceSample smp;
  smp.u1 = u1;
  smp.position = r_ * dir;
  smp.position[n] += offset(eps, std::sin(u1));
  smp.radius = smp.position.norm();
  smp.rho = 0.5 * smp.radius * smp.radius;

  smp.tangents.resize(n, n + 1);
  for (int j = 0; j < n; ++j) smp.tangents.row(j) = r_ * jac.col(j).transpose();
  const double ap = include_h1_ ? eps * eps * (alpha_ / r_) * std::cos(u1) : 0.0;
  smp.tangents(0, n) += ap;

  // Outward Euclidean normal of the axisymmetric profile at the
  // representative point lies in the (first, last)-axis plane.
  Eigen::VectorXd ne = Eigen::VectorXd::Zero(n + 1);
  ne[0] = r_ * std::cos(u1) + ap;
  ne[n] = r_ * std::sin(u1);

  // nu = G^{-1} ne / |...|_g; with G = I + (1/f^2 - 1) yhat yhat^T the
  // inverse is I + (f^2 - 1) yhat yhat^T.
  const double f2R = spec_.f2_value(smp.radius);
  const Eigen::VectorXd yhat = smp.position / smp.radius;
  const Eigen::VectorXd nu_raw = ne + (f2R - 1.0) * yhat.dot(ne) * yhat;
  const double norm2 = ne.dot(nu_raw);
  if (!(norm2 > 0.0)) throw EvalError("degenerate tangent basis: cannot orient the normal");
  smp.normal = nu_raw / std::sqrt(norm2);

  smp.killing = std::sqrt(f2R) * smp.position;
  smp.support = inner(spec_, smp.position, smp.killing, smp.normal);

  Eigen::MatrixXd induced(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      induced(i, j) = inner(spec_, smp.position, smp.tangents.row(i),
                            smp.tangents.row(j));
      induced(j, i) = induced(i, j);
    }
  }
  const double det = induced.determinant();
  if (!(det > 0.0)) throw EvalError("induced metric is degenerate");
  smp.area_density = std::sqrt(det);
  return smp;
}

double PerturbedSphere::radial_expansion_defect(double eps, double u1) const {
  require_eps(eps);
  const Frame fr = frame(eps, u1);
  const double model =
      r_ + eps * fr.s +
      eps * eps / (2.0 * r_) * (fr.c * fr.c + 2.0 * alpha_ * fr.s * fr.s);
  return std::abs(fr.R - model);
}

double PerturbedSphere::support_function(double eps, double u1) const {
  require_eps(eps);
  const Frame fr = frame(eps, u1);
  // phi = f(R) (Y . ne) / sqrt(ne^T G^{-1} ne), the 2-plane reduction of
  // inner(X, nu) with nu = G^{-1} ne / |G^{-1} ne|_g.
  const double ne0 = r_ * fr.c + fr.ap;
  const double ne1 = r_ * fr.s;
  const double y_dot_ne = fr.H * ne0 + fr.V * ne1;
  const double ne_dot_yhat = (ne0 * fr.H + ne1 * fr.V) / fr.R;
  const double norm2 =
      ne0 * ne0 + ne1 * ne1 + (fr.f2R - 1.0) * ne_dot_yhat * ne_dot_yhat;
  if (!(norm2 > 0.0)) throw EvalError("degenerate tangent basis: cannot orient the normal");
  return fr.fR * y_dot_ne / std::sqrt(norm2);
}

double PerturbedSphere::support_function_via_rho(double eps, double u1) const {
  require_eps(eps);
  const Frame fr = frame(eps, u1);
  const double drho = fr.T1dotY;  // d(|Y|^2/2)/du1 = Y . dY/du1
  const double radicand = fr.R2 - (drho * drho) / (r_ * r_ * fr.f2R);
  if (!(radicand > 0.0)) {
    throw EvalError("support radicand non-positive at u1 = " + std::to_string(u1) +
                    " (eps beyond the graph formula's validity)");
  }
  return std::sqrt(radicand);
}

double PerturbedSphere::isometry_defect(double eps, int grid_points) const {
  require_eps(eps);
  const int n = spec_.n();
  // Open Gauss-Legendre nodes keep the chart away from the poles.
  const int order = 16;
  const int panels = std::max(1, grid_points / order);
  const GaussLegendreRule& rule = gauss_legendre(order);
  double defect = 0.0;
  for (int p = 0; p < panels; ++p) {
    const double lo = -M_PI / 2 + M_PI * p / panels;
    const double mid = lo + M_PI / (2.0 * panels);
    const double half = M_PI / (2.0 * panels);
    for (double x : rule.nodes) {
      const double u1 = mid + half * x;
      const Frame fr = frame(eps, u1);
      // Induced metric at the representative point is diagonal:
      // (G11, r^2 cos^2 u1, ..., r^2 cos^2 u1); the round-sphere target is
      // r^2 diag(1, cos^2 u1, ...). Middle entries agree identically, so
      // the defect reduces to |G11 - r^2|.
      (void)n;
      defect = std::max(defect, std::abs(fr.G11 - r_ * r_));
    }
  }
  return defect;
}

double PerturbedSphere::surface_area(double eps, const QuadratureOptions& quad) const {
  require_eps(eps);
  const int n = spec_.n();
  const double w = unit_sphere_area(n - 1);
  return w * integrate(
                 [&](double u1) {
                   const Frame fr = frame(eps, u1);
                   return std::sqrt(fr.G11) * std::pow(fr.H, n - 1);
                 },
                 -M_PI / 2, M_PI / 2, quad);
}

double PerturbedSphere::enclosed_volume_flux(double eps,
                                             const QuadratureOptions& quad) const {
  require_eps(eps);
  const int n = spec_.n();
  QuadratureOptions inner_quad = quad;
  inner_quad.rel_tol = std::min(quad.rel_tol, 1e-13);
  const double w = unit_sphere_area(n - 1);
  return w * integrate(
                 [&](double u1) {
                   const Frame fr = frame(eps, u1);
                   const double weight =
                       warped_shell_integral(spec_, 0.0, fr.R, inner_quad) /
                       std::pow(fr.R, n + 1);
                   return weight * support_function(eps, u1) *
                          std::sqrt(fr.G11) * std::pow(fr.H, n - 1);
                 },
                 -M_PI / 2, M_PI / 2, quad);
}

namespace {

void require_star_shaped(const detail::MonotoneScan& scan) {
  if (!scan.monotone) {
    throw StarShapeError(
        "surface is not star-shaped: latitude map not increasing on u1 in [" +
            std::to_string(scan.fail_lo) + ", " + std::to_string(scan.fail_hi) + "]",
        scan.fail_lo, scan.fail_hi);
  }
}

}  // namespace

double PerturbedSphere::enclosed_volume_radial(double eps,
                                               const QuadratureOptions& quad) const {
  require_eps(eps);
  const int n = spec_.n();
  QuadratureOptions inner_quad = quad;
  inner_quad.rel_tol = std::min(quad.rel_tol, 1e-13);
  require_star_shaped(detail::scan_monotone(
      [&](double u1) { return frame(eps, u1).psi_prime_num; }, -M_PI / 2,
      M_PI / 2, 256));
  const double w = unit_sphere_area(n - 1);
  return w * integrate(
                 [&](double u1) {
                   const Frame fr = frame(eps, u1);
                   const double shell = warped_shell_integral(spec_, 0.0, fr.R, inner_quad);
                   const double cos_psi = fr.H / fr.R;
                   const double psi_prime = fr.psi_prime_num / fr.R2;
                   return shell * std::pow(cos_psi, n - 1) * psi_prime;
                 },
                 -M_PI / 2, M_PI / 2, quad);
}

double PerturbedSphere::volume_gap(double eps, const QuadratureOptions& quad) const {
  require_eps(eps);
  const int n = spec_.n();
  QuadratureOptions inner_quad = quad;
  inner_quad.rel_tol = std::min(quad.rel_tol, 1e-13);
  require_star_shaped(detail::scan_monotone(
      [&](double u1) { return frame(eps, u1).psi_prime_num; }, -M_PI / 2,
      M_PI / 2, 256));
  const double w = unit_sphere_area(n - 1);
  return w * integrate(
                 [&](double u1) {
                   const Frame fr = frame(eps, u1);
                   const double shell = warped_shell_integral(spec_, r_, fr.R, inner_quad);
                   const double cos_psi = fr.H / fr.R;
                   const double psi_prime = fr.psi_prime_num / fr.R2;
                   return shell * std::pow(cos_psi, n - 1) * psi_prime;
                 },
                 -M_PI / 2, M_PI / 2, quad);
}

namespace {

// Least squares on the basis {eps^p : p in powers}; returns coefficients in
// the order of powers. Columns are scaled for conditioning.
Eigen::VectorXd fit_powers(std::span<const double> eps,
                           std::span<const double> values,
                           std::span<const int> powers) {
  const auto rows = static_cast<Eigen::Index>(eps.size());
  const auto cols = static_cast<Eigen::Index>(powers.size());
  const double eps_max = *std::max_element(eps.begin(), eps.end());
  Eigen::MatrixXd design(rows, cols);
  Eigen::VectorXd rhs(rows);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) {
      design(i, j) = std::pow(eps[i] / eps_max, powers[j]);
    }
    rhs[i] = values[i];
  }
  Eigen::VectorXd scaled = design.colPivHouseholderQr().solve(rhs);
  for (Eigen::Index j = 0; j < cols; ++j) {
    scaled[j] /= std::pow(eps_max, powers[j]);
  }
  return scaled;
}

}  // namespace

VolumeGapFit PerturbedSphere::volume_gap_coefficient(
    std::span<const double> ladder, const QuadratureOptions& quad) const {
  if (ladder.size() < 5) {
    throw SpecError("volume coefficient fit needs at least 5 ladder points");
  }
  if (!include_h1_) {
    throw SpecError("volume coefficient fit requires the h1 corrector");
  }
  VolumeGapFit fit;
  fit.ladder.assign(ladder.begin(), ladder.end());
  fit.gaps.resize(ladder.size());
  for (std::size_t i = 0; i < ladder.size(); ++i) {
    fit.gaps[i] = volume_gap(ladder[i], quad);
  }

  // The family is symmetric under eps -> -eps composed with the ambient
  // mirror isometry, so the gap expands in even powers only; fit
  // gap/eps^2 = c + d eps^2.
  std::vector<double> q(ladder.size());
  for (std::size_t i = 0; i < ladder.size(); ++i) {
    q[i] = fit.gaps[i] / (ladder[i] * ladder[i]);
  }
  const int powers[] = {0, 2};
  const Eigen::VectorXd coef = fit_powers(ladder, q, powers);
  fit.c_measured = coef[0];

  const double f = spec_.f_value(r_);
  const double phi = phi_stability(spec_, r_);
  const int n = spec_.n();
  fit.c_analytic = -std::pow(r_, n + 1) * phi * unit_sphere_area(n) /
                   (2.0 * (n + 1) * f * f * f);
  fit.rel_discrepancy = std::abs(fit.c_measured - fit.c_analytic) /
                        std::max(std::abs(fit.c_analytic),
                                 std::numeric_limits<double>::min());

  const double scale = unit_sphere_area(n) * std::pow(r_, n + 1);
  const double floor = 1e3 * std::numeric_limits<double>::epsilon() * scale;
  fit.below_noise = true;
  for (double g : fit.gaps) {
    if (std::abs(g) >= floor) fit.below_noise = false;
  }
  return fit;
}

GphiSeriesReport PerturbedSphere::gphi_series_check(
    double u1, std::span<const double> ladder, const QuadratureOptions& quad) const {
  if (ladder.size() < 3) throw SpecError("series check needs at least 3 ladder points");
  if (!include_h1_) throw SpecError("series check requires the h1 corrector");
  QuadratureOptions inner_quad = quad;
  inner_quad.rel_tol = std::min(quad.rel_tol, 1e-13);

  const int n = spec_.n();
  auto A = [&](double eps, double angle) {
    const Frame fr = frame(eps, angle);
    const double g = warped_shell_integral(spec_, 0.0, fr.R, inner_quad) /
                     std::pow(fr.R, n + 1);
    return g * support_function(eps, angle);
  };

  const GWeights gw = g_weight(spec_, r_, inner_quad);
  const double A0 = gw.g * r_;

  // A(eps, -u1) = A(-eps, u1), so odd/even parts in eps come from the
  // mirrored angle; the odd part is c1 eps + c3 eps^3 + ..., the even part
  // minus A0 is c2 eps^2 + c4 eps^4 + ...
  std::vector<double> odd(ladder.size()), even(ladder.size());
  for (std::size_t i = 0; i < ladder.size(); ++i) {
    const double plus = A(ladder[i], u1);
    const double minus = A(ladder[i], -u1);
    odd[i] = 0.5 * (plus - minus);
    even[i] = 0.5 * (plus + minus) - A0;
  }
  const int odd_powers[] = {1, 3};
  const int even_powers[] = {2, 4};
  const Eigen::VectorXd oc = fit_powers(ladder, odd, odd_powers);
  const Eigen::VectorXd ec = fit_powers(ladder, even, even_powers);

  GphiSeriesReport report;
  report.u1 = u1;
  report.linear_measured = oc[0];
  report.quadratic_measured = ec[0];

  const double s = std::sin(u1);
  const double c = std::cos(u1);
  const double f = spec_.f_value(r_);
  const double fp = spec_.f_prime(r_);
  const double f2 = spec_.f2_value(r_);
  const double g = gw.g;
  const double two_alpha = 2.0 * alpha_;
  report.linear_analytic = (1.0 / f - n * g) * s;
  const double bracket =
      (-(fp * r_ + n * f) / (f2 * r_) + two_alpha / (f * r_)) * s * s +
      (1.0 / (f * r_) - (n + 1) * g / r_) * c * c +
      g / r_ * ((n * (n + 1) - two_alpha * (n + 1)) * s * s + two_alpha);
  report.quadratic_analytic = 0.5 * bracket;

  // Zero coefficients (f = 1) get a floor tied to the size of A0 so the
  // ratio stays meaningful instead of dividing rounding noise by zero.
  const double coeff_floor = 1e-8 * std::max(1.0, std::abs(A0));
  auto rel = [coeff_floor](double meas, double an) {
    return std::abs(meas - an) / std::max(std::abs(an), coeff_floor);
  };
  report.linear_rel_err = rel(report.linear_measured, report.linear_analytic);
  report.quadratic_rel_err = rel(report.quadratic_measured, report.quadratic_analytic);
  return report;
}

std::vector<double> PerturbedSphere::default_ladder() const {
  std::vector<double> ladder;
  for (int k = 4; k <= 10; ++k) ladder.push_back(r_ * std::pow(2.0, -k));
  return ladder;
}

}  // namespace warpiso
