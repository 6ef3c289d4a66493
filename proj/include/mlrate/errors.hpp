#pragma once

#include <stdexcept>
#include <string>

namespace mlrate {

// Input file/schema problems: a named column is absent, a model file has an
// unknown version, etc. The CLI maps these to exit code 2.
class SchemaError : public std::runtime_error {
  public:
    explicit SchemaError(const std::string& what) : std::runtime_error(what) {}
};

// A cell that cannot be read as the expected type. Carries the 1-based data
// row (header excluded) in the message.
class ParseError : public std::runtime_error {
  public:
    explicit ParseError(const std::string& what) : std::runtime_error(what) {}
};

// Well-formed input whose values violate a dataset invariant (treatment not
// in {0,1}, non-finite outcome, degenerate arm). Also exit code 2.
class ValidationError : public std::runtime_error {
  public:
    explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace mlrate
