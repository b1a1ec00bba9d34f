#pragma once

#include <cmath>
#include <functional>
#include <limits>

namespace warpiso::testing {

/// Fourth-order central difference with step halving until two successive
/// estimates agree; the independent oracle for symbolic derivatives.
inline double fd_derivative(const std::function<double(double)>& f, double x) {
  double h = std::max(1.0, std::abs(x)) * 1e-2;
  double prev = std::numeric_limits<double>::quiet_NaN();
  for (int i = 0; i < 12; ++i) {
    const double d =
        (-f(x + 2 * h) + 8 * f(x + h) - 8 * f(x - h) + f(x - 2 * h)) / (12 * h);
    if (!std::isnan(prev) &&
        std::abs(d - prev) <= 1e-9 * std::max(1.0, std::abs(d))) {
      return d;
    }
    prev = d;
    h *= 0.5;
  }
  return prev;
}

inline double rel_err(double got, double want) {
  return std::abs(got - want) / std::max(1.0, std::abs(want));
}

// Frozen oracle values, computed independently with 40-digit quadrature
// before the build (shifted-reciprocal metric f^2 = 1 + 1/(r+1), n = 2):
//   \int_0^1 t^2 / f(t) dt
inline constexpr double kShellIntegralPaperN2R1 = 0.26543611792432717;
//   4 pi * the integral above
inline constexpr double kBallVolumePaperN2R1 = 3.3355686322738411;
//   \int_0^1 t^2 / sqrt(1 + t^2) dt = (sqrt 2 - asinh 1)/2
inline constexpr double kShellIntegralSpaceformN2R1 = 0.26641998767677601;
//   second-order volume coefficient 0.625 * 4 pi / (6 * 1.5^{3/2})
inline constexpr double kGapCoefficientPaperN2R1 = 0.71252768342325783;

}  // namespace warpiso::testing
