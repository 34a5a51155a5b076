#pragma once

#include <stdexcept>
#include <string>

namespace rdalloc {

/// Base class for all errors raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  /// Short machine-readable tag, e.g. "Infeasible".
  virtual const char* kind() const noexcept { return "Error"; }
};

#define RDALLOC_DEFINE_ERROR(Name)                                 \
  class Name : public Error {                                      \
   public:                                                         \
    using Error::Error;                                            \
    const char* kind() const noexcept override { return #Name; }   \
  }

// Unit or quantizer index outside the instance's domain.
RDALLOC_DEFINE_ERROR(IndexError);
// Coded-unit list violates the boundary/monotonicity/length rules.
RDALLOC_DEFINE_ERROR(InvalidSolution);
// No solution satisfies the rate budget.
RDALLOC_DEFINE_ERROR(Infeasible);
// Problem exceeds an enumeration or table-size cap.
RDALLOC_DEFINE_ERROR(TooLarge);
// Incremental table update diverged from a full recompute.
RDALLOC_DEFINE_ERROR(ConsistencyError);
// Malformed instance file.
RDALLOC_DEFINE_ERROR(ParseError);

#undef RDALLOC_DEFINE_ERROR

}  // namespace rdalloc
