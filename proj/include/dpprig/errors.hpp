#ifndef DPPRIG_ERRORS_HPP
#define DPPRIG_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace dpprig {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Argument outside the range where a result is representable (overflow,
/// underflow, loss of all significant digits).
class RangeError : public Error {
 public:
  using Error::Error;
};

/// Parameters violate a documented precondition (e.g. Bessel order <= -1).
class ParameterError : public Error {
 public:
  using Error::Error;
};

/// Evaluation at a pole (e.g. log-gamma at a nonpositive integer).
class PoleError : public Error {
 public:
  using Error::Error;
};

/// Point or window outside the phase space of a kernel.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A computed quantity violates an invariant it must satisfy exactly
/// (negative intensity, probabilities not summing to one, ...).
class ConsistencyError : public Error {
 public:
  using Error::Error;
};

/// Discretization too coarse: eigenvalues left [0, 1] by more than the
/// clipping allowance.
class DiscretizationError : public Error {
 public:
  using Error::Error;
};

class SamplerError : public Error {
 public:
  using Error::Error;
};

class SizeError : public Error {
 public:
  using Error::Error;
};

/// Malformed or incomplete experiment configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace dpprig

#endif  // DPPRIG_ERRORS_HPP
