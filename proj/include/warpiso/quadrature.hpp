#pragma once

#include <functional>
#include <vector>

#include "warpiso/errors.hpp"

namespace warpiso {

/// Nodes and weights of the k-point Gauss-Legendre rule on [-1, 1].
struct GaussLegendreRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// Computed once per order and cached; thread-safe.
const GaussLegendreRule& gauss_legendre(int order);

struct QuadratureOptions {
  double abs_tol = 1e-12;
  double rel_tol = 1e-12;
  int panel_order = 16;
  int max_doublings = 16;  // up to 2^16 panels before giving up
};

/// Composite Gauss-Legendre with panel doubling: panel counts 1, 2, 4, ...
/// until two successive estimates differ by no more than
/// abs_tol + rel_tol*|I|. Endpoints are never evaluated (open nodes).
/// Handles a > b by orientation. Throws QuadratureError on non-convergence.
double integrate(const std::function<double(double)>& f, double a, double b,
                 const QuadratureOptions& opts = {});

}  // namespace warpiso
