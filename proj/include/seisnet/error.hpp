#pragma once

#include <stdexcept>
#include <string>

namespace seisnet {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// zeta^2 + sigma_eta^2 + sigma_eps^2 == 0.
class DegenerateVarianceError : public Error {
 public:
  using Error::Error;
};

/// Correlation matrix could not be made positive definite within the jitter cap.
class IllConditionedCorrelationError : public Error {
 public:
  using Error::Error;
};

class DimensionMismatchError : public Error {
 public:
  using Error::Error;
};

class UnknownNodeError : public Error {
 public:
  using Error::Error;
};

class NegativeWeightError : public Error {
 public:
  using Error::Error;
};

class EmptyTerminalSetError : public Error {
 public:
  using Error::Error;
};

/// Argument outside its documented domain (k out of range, bad config, ...).
class InvalidArgumentError : public Error {
 public:
  using Error::Error;
};

/// populate_level was asked to grow a population from zero seeds.
class CannotAdvanceLevelError : public Error {
 public:
  using Error::Error;
};

/// |rho| too close to one for the bivariate quadrature.
class NearSingularError : public Error {
 public:
  using Error::Error;
};

/// Malformed input file; the message names the violated rule.
class ValidationError : public Error {
 public:
  using Error::Error;
};

}  // namespace seisnet
