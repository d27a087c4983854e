#pragma once

#include <stdexcept>
#include <string>

namespace arlab {

// Malformed arguments: non-finite values, negative intensities, wrong lengths.
class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Data that admits no estimate, e.g. a constant series with a singular design.
class DegenerateInput : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A documented precondition of an operation does not hold.
class PreconditionViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace arlab
