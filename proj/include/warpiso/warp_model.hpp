#pragma once

#include <optional>
#include <string>
#include <vector>

#include "warpiso/expr.hpp"

namespace warpiso {

/// A rotationally symmetric warped product metric on R^{n+1},
///
///   ds^2 = dr^2 / f^2(r) + r^2 (round metric on S^n),
///
/// described by a closed-form expression for f or f^2 over a validity
/// interval [r_min, r_max] with r_min > 0. The f^2 form is primary; when it
/// is supplied, f = sqrt(f^2) and f' = (f^2)'/(2f).
class WarpSpec {
 public:
  /// Throws SpecError if n < 1, the interval is invalid, or f (resp. f^2)
  /// fails to be positive on a dense grid over [r_min, r_max].
  WarpSpec(std::string expression_text, bool is_squared, expr::Bindings params,
           int n, double r_min, double r_max);

  const std::string& expression_text() const { return text_; }
  bool is_squared() const { return is_squared_; }
  const expr::Bindings& params() const { return params_; }
  int n() const { return n_; }
  double r_min() const { return r_min_; }
  double r_max() const { return r_max_; }

  bool contains(double r) const { return r >= r_min_ && r <= r_max_; }
  void require_in_interval(double r) const;

  /// f(r) > 0; throws if r is outside the validity interval.
  double f_value(double r) const;
  /// Symbolic derivative f'(r) (chain rule through sqrt when f^2 was given).
  double f_prime(double r) const;
  /// f^2(r) evaluated without squaring rounding when f^2 was supplied.
  double f2_value(double r) const;
  /// (f^2)'(r); equals 2 f f' symbolically.
  double f2_prime(double r) const;

  /// f(t) without the interval check, for integrals that reach below r_min
  /// (the volume weight integrates from 0, so the expression must stay
  /// positive on (0, r]). Still rejects f^2 <= 0.
  double f_raw(double t) const;

 private:
  double eval_f2(double r) const;

  std::string text_;
  bool is_squared_;
  expr::Bindings params_;
  int n_;
  double r_min_, r_max_;
  expr::Expression expr_;
  expr::Expression dexpr_;
};

/// Stability function of the metric,
///   Phi(r) = f f'/r + (1 - f^2)/r^2,
/// computed as (f^2)'/(2r) + (1 - f^2)/r^2 to avoid the sqrt round trip.
double phi_stability(const WarpSpec& spec, double r);

/// Value of (phi')^2 - phi'' phi for the arc-length form of the metric,
/// equal to f^2 - r f f'. Satisfies r^2 Phi(r) = 1 - value.
struct AlternateFormCondition {
  double r;
  double value;
};
AlternateFormCondition alternate_form_value(const WarpSpec& spec, double r);

struct Interval {
  double lo;
  double hi;
};

/// Sampled Phi profile with sign-change intervals refined by bisection.
struct PhiProfile {
  std::vector<double> grid;
  std::vector<double> phi;
  std::vector<Interval> violations;  // maximal sub-intervals where Phi < -tol
  bool holds() const { return violations.empty(); }
};

struct ConditionScanOptions {
  int grid_size = 512;
  double tol = 0.0;          // HOLDS means Phi >= -tol on the scan grid
  double bisect_rel_tol = 1e-10;  // interval-endpoint width, relative to span
};

/// Scan Phi over [lo, hi] (within the validity interval) and report where
/// the condition Phi >= -tol fails. Violating sub-interval endpoints are
/// refined by bisection on the sign of Phi + tol to a width of
/// bisect_rel_tol*(hi - lo).
PhiProfile glw_condition(const WarpSpec& spec, double lo, double hi,
                         const ConditionScanOptions& opts = {});

// --- Presets ---------------------------------------------------------------

/// euclidean          f = 1
/// spaceform(kappa)   f^2 = 1 + kappa r^2
/// ads(m, kappa)      f^2 = 1 - m/r + kappa r^2, valid past the largest
///                    root of f^2 = 0 (r_min is raised if needed)
/// paper(m)           f^2 = 1 + m/(r+1)
WarpSpec make_preset(const std::string& name, const expr::Bindings& params,
                     int n, double r_min, double r_max);

std::vector<std::string> preset_names();

}  // namespace warpiso
