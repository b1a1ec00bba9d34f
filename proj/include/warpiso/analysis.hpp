#pragma once

#include <optional>
#include <string>
#include <vector>

#include "warpiso/perturbation.hpp"
#include "warpiso/warp_model.hpp"

namespace warpiso {

enum class OrderCheck { exact, at_least };

/// Log-log slope fit of a defect ladder against an expected decay order.
struct ConvergenceReport {
  std::string quantity;
  std::vector<double> ladder;    // strictly decreasing eps values
  std::vector<double> defects;   // non-negative, aligned with ladder
  std::vector<bool> used;        // points kept above the noise floor
  double slope = 0.0;
  double residual = 0.0;         // RMS of log-defect residuals
  double expected_order = 0.0;
  OrderCheck check = OrderCheck::at_least;
  bool below_noise_floor = false;  // all points under the floor: vacuous pass
  bool pass = false;
};

/// Refusal to fit: fewer than two ladder points survive the noise floor
/// while at least one sits above it.
class FitError : public Error {
 public:
  using Error::Error;
};

/// Ordinary least squares on (log eps, log defect). Ladder points whose
/// defect falls below 1e3 * machine epsilon * scale are excluded. Pass
/// means |slope - expected| <= tol (exact) or slope >= expected - tol
/// (at_least). When every point is under the floor the quantity is exact
/// to rounding and the check passes vacuously.
ConvergenceReport fit_order(std::string quantity,
                            std::span<const double> ladder,
                            std::span<const double> defects,
                            double expected_order,
                            OrderCheck check = OrderCheck::at_least,
                            double scale = 1.0, double slope_tol = 0.15);

/// Phi scan over [lo, hi]; identical to glw_condition with profile output.
PhiProfile scan_phi(const WarpSpec& spec, double lo, double hi,
                    int grid_size = 512);

/// Machine-checkable record that the perturbed surface at radius r bounds
/// strictly more volume than the geodesic ball while its area matches the
/// geodesic sphere to the expected order.
struct CounterexampleCertificate {
  // full input, so a third party can re-run bit for bit
  std::string expression_text;
  bool is_squared;
  expr::Bindings params;
  int n;
  double r_min, r_max;
  double quad_abs_tol, quad_rel_tol;

  double r;
  double phi;
  double eps;
  double vol_ball;
  double vol_flux;
  double vol_radial;
  double gap;             // vol_flux - vol_ball
  double gap_predicted;   // c_analytic * eps^2
  double prediction_rel_error;
  double area;
  double area_defect;        // |area - omega_n r^n|
  double area_defect_ratio;  // area_defect / (eps^3 omega_n r^n)
};

/// Thrown when certification is refused because Phi(r) >= 0 (no
/// counterexample is predicted at this radius).
class CertificationRefused : public Error {
 public:
  CertificationRefused(const std::string& what, double phi)
      : Error(what), phi(phi) {}
  double phi;
};

/// Certify a volume-gap counterexample at radius r with perturbation eps.
/// Requires Phi(r) < -1e-12 (strictly), eps within the cap, and agreement
/// of the flux and radial volumes within 1e-8 * max(1, volume).
CounterexampleCertificate certify(const WarpSpec& spec, double r, double eps,
                                  const QuadratureOptions& quad = {});

}  // namespace warpiso
