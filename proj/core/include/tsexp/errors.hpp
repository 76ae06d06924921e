#pragma once

#include <stdexcept>
#include <string>

namespace tsexp {

// Malformed input files: missing columns, unparseable values, bad JSON.
class SchemaError : public std::runtime_error {
 public:
  explicit SchemaError(const std::string& what) : std::runtime_error(what) {}
};

// Data that parses but violates a structural requirement of the methods
// (probabilities outside the open unit interval, length mismatches, ...).
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace tsexp
