#include "warpiso/quadrature.hpp"

#include <cmath>
#include <map>
#include <mutex>

namespace warpiso {

namespace {

GaussLegendreRule compute_rule(int order) {
  GaussLegendreRule rule;
  rule.nodes.resize(order);
  rule.weights.resize(order);
  // Newton iteration on the Legendre polynomial P_order from the standard
  // Chebyshev-like initial guess; converges to machine precision in a few
  // steps for any practical order.
  for (int i = 0; i < order; ++i) {
    double x = std::cos(M_PI * (i + 0.75) / (order + 0.5));
    double p_deriv = 0.0;
    for (int iter = 0; iter < 64; ++iter) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= order; ++k) {
        const double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      p_deriv = order * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / p_deriv;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    rule.nodes[order - 1 - i] = x;
    rule.weights[order - 1 - i] = 2.0 / ((1.0 - x * x) * p_deriv * p_deriv);
  }
  return rule;
}

}  // namespace

const GaussLegendreRule& gauss_legendre(int order) {
  static std::mutex mutex;
  static std::map<int, GaussLegendreRule> cache;
  std::lock_guard<std::mutex> lock(mutex);
  auto it = cache.find(order);
  if (it == cache.end()) it = cache.emplace(order, compute_rule(order)).first;
  return it->second;
}

double integrate(const std::function<double(double)>& f, double a, double b,
                 const QuadratureOptions& opts) {
  if (a == b) return 0.0;
  double sign = 1.0;
  if (a > b) {
    std::swap(a, b);
    sign = -1.0;
  }
  const GaussLegendreRule& rule = gauss_legendre(opts.panel_order);

  auto estimate = [&](long panels) {
    const double width = (b - a) / static_cast<double>(panels);
    double total = 0.0;
    for (long p = 0; p < panels; ++p) {
      const double lo = a + width * static_cast<double>(p);
      const double mid = lo + 0.5 * width;
      const double half = 0.5 * width;
      double acc = 0.0;
      for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
        acc += rule.weights[i] * f(mid + half * rule.nodes[i]);
      }
      total += acc * half;
    }
    return total;
  };

  double prev = estimate(1);
  long panels = 1;
  for (int d = 0; d < opts.max_doublings; ++d) {
    panels *= 2;
    const double cur = estimate(panels);
    if (std::abs(cur - prev) <= opts.abs_tol + opts.rel_tol * std::abs(cur)) {
      return sign * cur;
    }
    prev = cur;
  }
  throw QuadratureError("quadrature did not converge after " +
                        std::to_string(panels) + " panels");
}

}  // namespace warpiso
