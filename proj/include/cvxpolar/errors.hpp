// Exception types shared across the toolkit.
#pragma once

#include <stdexcept>
#include <string>

namespace cvxpolar {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Malformed or inconsistent user input (files, vectors of wrong shape, ...).
struct InvalidInputError : Error {
  using Error::Error;
};

struct DimensionMismatchError : Error {
  using Error::Error;
};

/// Dehomogenization of a point at infinity.
struct IdealPointError : Error {
  using Error::Error;
};

struct SingularMatrixError : Error {
  using Error::Error;
};

struct MissingGradientsError : Error {
  using Error::Error;
};

/// Iterative solver exhausted its iteration budget.
struct NoConvergenceError : Error {
  using Error::Error;
};

/// Root bracketing failed; the requested dual point is outside the gradient range.
struct OutOfRangeError : Error {
  using Error::Error;
};

/// Interpolation query outside the sampled grid.
struct OutOfGridError : Error {
  using Error::Error;
};

}  // namespace cvxpolar
