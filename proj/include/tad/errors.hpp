#pragma once

#include <stdexcept>
#include <string>

namespace tad {

// Input violates a documented invariant (type, shape, or range).
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A serialized record could not be decoded.
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Inputs are well formed but the requested quantity is undefined for them.
class DegenerateError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace tad
