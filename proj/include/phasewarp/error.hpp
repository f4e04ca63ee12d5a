#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace phasewarp {

/// Base of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A caller-supplied argument violates an operation's precondition.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Input data could not be parsed or is unusable (empty file, bad line).
class DataError : public Error {
 public:
  using Error::Error;
};

/// A numerical invariant failed (non-monotone warp, mismatched flats, ...).
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// Two nonnegative densities do not share a flat structure, so no warp
/// carries one onto the other.
class PlateauMismatch : public NumericalError {
 public:
  PlateauMismatch(const std::string& what, std::size_t interval)
      : NumericalError(what), interval_(interval) {}

  std::size_t interval() const noexcept { return interval_; }

 private:
  std::size_t interval_;
};

}  // namespace phasewarp
