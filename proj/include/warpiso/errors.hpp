#pragma once

#include <stdexcept>
#include <string>

namespace warpiso {

/// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Expression evaluation failed (division by zero, domain violation,
/// unbound parameter, non-finite result).
class EvalError : public Error {
 public:
  using Error::Error;
};

/// A metric specification was rejected at construction.
class SpecError : public Error {
 public:
  using Error::Error;
};

/// Adaptive quadrature failed to converge.
class QuadratureError : public Error {
 public:
  using Error::Error;
};

/// The perturbed surface is not a radial graph over the sphere.
class StarShapeError : public Error {
 public:
  StarShapeError(const std::string& what, double u_lo, double u_hi)
      : Error(what), u_lo(u_lo), u_hi(u_hi) {}
  double u_lo;  // failing u1 range
  double u_hi;
};

}  // namespace warpiso
