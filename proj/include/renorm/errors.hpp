#pragma once

#include <stdexcept>
#include <string>

namespace renorm {

/// Base class for every error raised by the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid grid or experiment configuration.
class ConfigurationError : public Error {
 public:
  using Error::Error;
};

/// Bad argument value (axis out of range, p < 1, mismatched grids, ...).
class ArgumentError : public Error {
 public:
  using Error::Error;
};

/// A requested scale is not representable on the grid.
class ResolutionError : public Error {
 public:
  using Error::Error;
};

/// Kernel support would wrap around the torus.
class DomainWrapError : public Error {
 public:
  using Error::Error;
};

/// Input outside the hypothesis of the estimate being checked.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// Renormalization exponent outside its admissible half-plane.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Mollification scale exceeds the temporal support margin of the test function.
class SupportMarginError : public Error {
 public:
  using Error::Error;
};

/// Blocks of a decomposition come from different source fields.
class ConsistencyError : public Error {
 public:
  using Error::Error;
};

/// Multiplier symbol undefined or inadmissible on a resolvable mode.
class SymbolError : public Error {
 public:
  using Error::Error;
};

/// Time step violates the hard CFL limit.
class CflError : public Error {
 public:
  using Error::Error;
};

/// Non-finite values appeared during time stepping.
class BlowUpError : public Error {
 public:
  BlowUpError(const std::string& what, long step) : Error(what), step_(step) {}
  [[nodiscard]] long step() const noexcept { return step_; }

 private:
  long step_;
};

}  // namespace renorm
