#pragma once

#include <stdexcept>
#include <string>

namespace osclab {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A quadrature node produced a NaN or infinite integrand value.
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// The operation needs metadata the function does not carry (a gradient,
/// a Lipschitz constant, a support radius, ...).
class UnsupportedFunction : public Error {
 public:
  using Error::Error;
};

}  // namespace osclab
