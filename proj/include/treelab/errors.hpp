#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace treelab {

// A tree or input is malformed relative to the ambient variable count
// (variable index out of range, repeated variable on a path, length mismatch).
class StructuralError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A membership query was issued against an examples-only oracle.
class AccessViolation : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Rejection sampling for a conditioned example exhausted its attempt budget.
class SamplingExhausted : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A search exceeded its configured subproblem cap.
class ResourceLimit : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Text input could not be parsed; carries the byte offset of the failure.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t position)
      : std::runtime_error(what + " (at offset " + std::to_string(position) + ")"),
        position_(position) {}

  std::size_t position() const { return position_; }

 private:
  std::size_t position_;
};

}  // namespace treelab
