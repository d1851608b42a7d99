#pragma once

#include <stdexcept>
#include <string>

namespace chance {

// Input is structurally unusable (missing column, unreadable file).
class SchemaError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Input parses but contradicts itself (a fixture with three teams, ...).
class DataIntegrityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Argument outside the domain of an operation.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Unknown team, player, block or parameter key.
class LookupError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

// Overflow, singular matrices, non-finite densities.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A sampler found itself in a state it should never reach.
class InferenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace chance
