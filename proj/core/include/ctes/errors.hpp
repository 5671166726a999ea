#pragma once

#include <stdexcept>
#include <string>

namespace ctes {

// Base class for all toolkit errors. Subtypes map 1:1 onto the CLI exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A CSV column is missing, ill-typed, or a value violates a record invariant.
class SchemaError final : public Error {
 public:
  using Error::Error;
};

// Trace timestamps do not advance by one hour per record.
class ContinuityError final : public Error {
 public:
  using Error::Error;
};

// No electricity source is available in a record.
class AvailabilityError final : public Error {
 public:
  using Error::Error;
};

// Invalid user-supplied parameters (config values, CLI arguments).
class ParameterError final : public Error {
 public:
  using Error::Error;
};

// An argument is outside the mathematical domain of an operation.
class DomainError final : public Error {
 public:
  using Error::Error;
};

// A state variable is outside its admissible range.
class StateError final : public Error {
 public:
  using Error::Error;
};

// A policy returned an action the feasibility mask forbids.
class MaskingViolationError final : public Error {
 public:
  using Error::Error;
};

// Tensor/vector dimensions do not match.
class ShapeError final : public Error {
 public:
  using Error::Error;
};

// Input data is unusable (non-finite features, unreadable files).
class DataError final : public Error {
 public:
  using Error::Error;
};

// Training produced a non-finite loss.
class DivergenceError final : public Error {
 public:
  using Error::Error;
};

// A problem instance exceeds a hard size guard.
class SizeError final : public Error {
 public:
  using Error::Error;
};

// No sizing candidate achieved zero loss-of-load.
class InfeasibleSizingError final : public Error {
 public:
  using Error::Error;
};

// Internal consistency violation; indicates a bug, not bad input.
class InternalError final : public Error {
 public:
  using Error::Error;
};

}  // namespace ctes
