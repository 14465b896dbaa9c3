#pragma once

#include <stdexcept>
#include <string>

namespace david {

// Invalid numeric parameter (non-positive std, correlation outside [-1, 1], ...).
class BadParam : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Correlation or covariance matrix is not positive semidefinite.
class NotPsd : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Malformed matching instance: slot out of range, duplicate list entry, shape mismatch.
class InvalidInstance : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Two students share a priority score at a slot and strict priorities were required.
class NonStrictPriorities : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A sub-college list violates the canonical form.
class InvalidSubRol : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// The demand indicator system hit an equality case or selected more than one option.
class AmbiguousDemand : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NotConverged : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Exhaustive search requested on an instance above the enumeration bound.
class TooLarge : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace david
