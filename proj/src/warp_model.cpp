#include "warpiso/warp_model.hpp"

#include <cmath>

#include "warpiso/parallel.hpp"

namespace warpiso {

WarpSpec::WarpSpec(std::string expression_text, bool is_squared,
                   expr::Bindings params, int n, double r_min, double r_max)
    : text_(std::move(expression_text)),
      is_squared_(is_squared),
      params_(std::move(params)),
      n_(n),
      r_min_(r_min),
      r_max_(r_max) {
  if (n_ < 1) throw SpecError("hypersurface dimension n must be a positive integer");
  if (!(r_min_ > 0.0)) throw SpecError("r_min must be positive");
  if (!(r_min_ < r_max_)) throw SpecError("validity interval requires r_min < r_max");
  expr_ = expr::parse(text_);
  dexpr_ = expr_.derivative();

  // Positivity on a dense grid; also catches unbound parameters up front.
  constexpr int kGrid = 512;
  for (int i = 0; i <= kGrid; ++i) {
    const double r = r_min_ + (r_max_ - r_min_) * i / kGrid;
    double v;
    try {
      v = expr_.evaluate(r, params_);
    } catch (const EvalError& e) {
      throw SpecError("warping function rejected at r = " + std::to_string(r) +
                      ": " + e.what());
    }
    if (!(v > 0.0)) {
      throw SpecError((is_squared_ ? std::string("f^2") : std::string("f")) +
                      " is not positive at r = " + std::to_string(r));
    }
  }
}

void WarpSpec::require_in_interval(double r) const {
  if (!contains(r)) {
    throw EvalError("radius " + std::to_string(r) +
                    " outside the validity interval [" + std::to_string(r_min_) +
                    ", " + std::to_string(r_max_) + "]");
  }
}

double WarpSpec::eval_f2(double r) const {
  if (is_squared_) {
    const double f2 = expr_.evaluate(r, params_);
    if (!(f2 > 0.0)) throw EvalError("f^2 <= 0 at r = " + std::to_string(r));
    return f2;
  }
  const double f = expr_.evaluate(r, params_);
  if (!(f > 0.0)) throw EvalError("f <= 0 at r = " + std::to_string(r));
  return f * f;
}

double WarpSpec::f_value(double r) const {
  require_in_interval(r);
  return is_squared_ ? std::sqrt(eval_f2(r)) : expr_.evaluate(r, params_);
}

double WarpSpec::f2_value(double r) const {
  require_in_interval(r);
  return eval_f2(r);
}

double WarpSpec::f_prime(double r) const {
  require_in_interval(r);
  if (is_squared_) {
    return dexpr_.evaluate(r, params_) / (2.0 * std::sqrt(eval_f2(r)));
  }
  return dexpr_.evaluate(r, params_);
}

double WarpSpec::f2_prime(double r) const {
  require_in_interval(r);
  if (is_squared_) return dexpr_.evaluate(r, params_);
  return 2.0 * expr_.evaluate(r, params_) * dexpr_.evaluate(r, params_);
}

double WarpSpec::f_raw(double t) const {
  const double v = expr_.evaluate(t, params_);
  if (is_squared_) {
    if (!(v > 0.0)) throw EvalError("f^2 <= 0 at r = " + std::to_string(t));
    return std::sqrt(v);
  }
  if (!(v > 0.0)) throw EvalError("f <= 0 at r = " + std::to_string(t));
  return v;
}

double phi_stability(const WarpSpec& spec, double r) {
  spec.require_in_interval(r);
  const double f2 = spec.f2_value(r);
  const double f2p = spec.f2_prime(r);
  return f2p / (2.0 * r) + (1.0 - f2) / (r * r);
}

AlternateFormCondition alternate_form_value(const WarpSpec& spec, double r) {
  spec.require_in_interval(r);
  const double f2 = spec.f2_value(r);
  const double f2p = spec.f2_prime(r);
  return {r, f2 - r * f2p / 2.0};
}

namespace {

// Bisect h(r) = Phi(r) + tol over a bracket with h(a), h(b) of opposite
// signs (non-negative counts as the HOLDS side) until |b - a| <= width.
double bisect_sign_change(const WarpSpec& spec, double tol, double a, double b,
                          bool a_violates, double width) {
  while (b - a > width) {
    const double mid = 0.5 * (a + b);
    const bool mid_violates = phi_stability(spec, mid) + tol < 0.0;
    if (mid_violates == a_violates) {
      a = mid;
    } else {
      b = mid;
    }
  }
  return 0.5 * (a + b);
}

}  // namespace

PhiProfile glw_condition(const WarpSpec& spec, double lo, double hi,
                         const ConditionScanOptions& opts) {
  if (!(lo < hi)) throw SpecError("scan interval requires lo < hi");
  spec.require_in_interval(lo);
  spec.require_in_interval(hi);
  if (opts.grid_size < 2) throw SpecError("scan grid needs at least 2 points");

  PhiProfile profile;
  const int m = opts.grid_size;
  profile.grid.resize(m);
  profile.phi.resize(m);
  for (int i = 0; i < m; ++i) {
    profile.grid[i] = lo + (hi - lo) * i / (m - 1);
  }
  parallel_for(static_cast<std::size_t>(m), [&](std::size_t i) {
    profile.phi[i] = phi_stability(spec, profile.grid[i]);
  });

  const double width = opts.bisect_rel_tol * (hi - lo);
  int i = 0;
  while (i < m) {
    if (profile.phi[i] + opts.tol >= 0.0) {
      ++i;
      continue;
    }
    int j = i;
    while (j + 1 < m && profile.phi[j + 1] + opts.tol < 0.0) ++j;
    Interval iv{profile.grid[i], profile.grid[j]};
    if (i > 0) {
      iv.lo = bisect_sign_change(spec, opts.tol, profile.grid[i - 1],
                                 profile.grid[i], false, width);
    }
    if (j + 1 < m) {
      iv.hi = bisect_sign_change(spec, opts.tol, profile.grid[j],
                                 profile.grid[j + 1], true, width);
    }
    profile.violations.push_back(iv);
    i = j + 1;
  }
  return profile;
}

// ---------------------------------------------------------------------------
// Presets

namespace {

double binding_or(const expr::Bindings& params, const std::string& key,
                  double fallback) {
  auto it = params.find(key);
  return it == params.end() ? fallback : it->second;
}

// Largest root of f^2 = 1 - m/r + kappa r^2 in (0, hi), by a sign scan and
// bisection. Returns 0 when f^2 > 0 on the whole range.
double largest_f2_root(double m, double kappa, double hi) {
  auto f2 = [&](double r) { return 1.0 - m / r + kappa * r * r; };
  constexpr int kScan = 4096;
  const double lo = hi * 1e-9;
  double root = 0.0;
  double prev_r = lo;
  double prev_v = f2(lo);
  for (int i = 1; i <= kScan; ++i) {
    const double r = lo + (hi - lo) * i / kScan;
    const double v = f2(r);
    if ((prev_v <= 0.0) != (v <= 0.0)) {
      double a = prev_r, b = r;
      bool a_nonpos = prev_v <= 0.0;
      for (int it = 0; it < 200 && (b - a) > 1e-15 * hi; ++it) {
        const double mid = 0.5 * (a + b);
        if ((f2(mid) <= 0.0) == a_nonpos) {
          a = mid;
        } else {
          b = mid;
        }
      }
      root = b;
    }
    prev_r = r;
    prev_v = v;
  }
  return root;
}

}  // namespace

WarpSpec make_preset(const std::string& name, const expr::Bindings& params,
                     int n, double r_min, double r_max) {
  if (name == "euclidean") {
    return WarpSpec("1", true, {}, n, r_min, r_max);
  }
  if (name == "spaceform") {
    const double kappa = binding_or(params, "kappa", 1.0);
    return WarpSpec("1 + kappa*r^2", true, {{"kappa", kappa}}, n, r_min, r_max);
  }
  if (name == "ads") {
    const double m = binding_or(params, "m", 1.0);
    const double kappa = binding_or(params, "kappa", 1.0);
    const double root = largest_f2_root(m, kappa, r_max);
    double lo = r_min;
    if (root > 0.0 && lo <= root) {
      lo = root * (1.0 + 1e-6);
      if (lo >= r_max) {
        throw SpecError("ads validity interval is empty: f^2 vanishes at r = " +
                        std::to_string(root) + " >= r_max");
      }
    }
    return WarpSpec("1 - m/r + kappa*r^2", true, {{"m", m}, {"kappa", kappa}}, n,
                    lo, r_max);
  }
  if (name == "paper") {
    const double m = binding_or(params, "m", 1.0);
    return WarpSpec("1 + m/(r+1)", true, {{"m", m}}, n, r_min, r_max);
  }
  throw SpecError("unknown preset '" + name +
                  "' (known: euclidean, spaceform, ads, paper)");
}

std::vector<std::string> preset_names() {
  return {"euclidean", "spaceform", "ads", "paper"};
}

}  // namespace warpiso
