#pragma once

#include <stdexcept>
#include <string>

namespace oac {

// Rejected configuration value; the message names the offending field.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// A gradient index does not fit in the time-frequency grid.
class CapacityError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

// Exhaustive search requested on a problem that is too large.
class UnsupportedSizeError : public std::length_error {
 public:
  using std::length_error::length_error;
};

class PartitionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Training produced a non-finite loss.
class DivergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace oac
