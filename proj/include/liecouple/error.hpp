#pragma once

#include <stdexcept>
#include <string>

namespace liecouple {

/// Failure classes. The CLI maps these onto exit codes.
enum class ErrorKind {
  dimension,   // vector/matrix sizes disagree
  syntax,      // expression or config text is malformed
  evaluation,  // expression cannot be evaluated at the given point
  domain,      // point or path leaves the charts it was supposed to stay in
  config,      // semantic problem in a configuration document
  numeric,     // a numerical validation failed hard (singular matrix, ...)
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace liecouple
