#pragma once

#include <stdexcept>
#include <string>

namespace perch {

// Bad caller input: dimension mismatch, duplicate id, out-of-range parameter.
class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Operation applied to a node in the wrong structural state.
class InvalidOperation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

class EmptyTree : public std::runtime_error {
 public:
  EmptyTree() : std::runtime_error("tree is empty") {}
};

// Metric has no defined value (e.g. no same-class pairs).
class UndefinedMetric : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

class GenerationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// File loading / parsing failures. Messages carry the path and line number.
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace perch
