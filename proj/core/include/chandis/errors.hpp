#pragma once

#include <stdexcept>
#include <string>

namespace chandis {

/// Dimension exceeds a configured cap (register size, Kraus count).
class SizeError : public std::length_error {
public:
  using std::length_error::length_error;
};

/// Operand shapes do not line up.
class ShapeError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// A documented precondition or postcondition was violated.
class ContractError : public std::logic_error {
public:
  using std::logic_error::logic_error;
};

/// Invalid user configuration (bad flag value, unknown config key).
class ConfigError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

}  // namespace chandis
