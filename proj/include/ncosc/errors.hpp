#pragma once

#include <stdexcept>
#include <string>

namespace ncosc {

/// Raised when a value violates the invariant of the type that owns it.
class invalid_parameter : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Two operands were built over different truncated bases.
class basis_mismatch : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A computation could not reach its requested accuracy or produced
/// non-finite values.
class numerical_failure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace ncosc
