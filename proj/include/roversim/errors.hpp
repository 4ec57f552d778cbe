#pragma once

#include <stdexcept>
#include <string>

namespace roversim {

// Invalid configuration or scenario content. `field()` names the offending
// parameter path, e.g. "detector.publish_hz".
class ValidationError : public std::invalid_argument {
public:
  ValidationError(std::string field, const std::string& what)
      : std::invalid_argument(field + ": " + what), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

private:
  std::string field_;
};

class DomainError : public std::domain_error {
public:
  using std::domain_error::domain_error;
};

class BoundsError : public std::out_of_range {
public:
  using std::out_of_range::out_of_range;
};

class UnreachableError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class RoutingError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class AllocationError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class LogIntegrityError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

}  // namespace roversim
