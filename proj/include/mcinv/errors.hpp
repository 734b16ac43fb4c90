#pragma once

#include <stdexcept>
#include <string>

namespace mcinv {

// Base for everything the library throws on purpose.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Argument outside an operation's domain, e.g. an assignment with m == n.
struct DomainError : Error {
  using Error::Error;
};

// Malformed user input (CSV cells, flags).
struct InputError : Error {
  using Error::Error;
};

// Well-formed input that cannot produce a meaningful answer, e.g. an alpha
// at or below the smallest attainable P-value.
struct PreconditionError : Error {
  using Error::Error;
};

// Incompatible components wired together (shape or scheme mismatch).
struct ContractError : Error {
  using Error::Error;
};

struct DegenerateWeightsError : Error {
  using Error::Error;
};

// Full-group enumeration refused because the group is too large.
struct TooLargeError : Error {
  using Error::Error;
};

}  // namespace mcinv
