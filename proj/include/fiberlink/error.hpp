#pragma once

#include <stdexcept>
#include <string>

namespace fiberlink {

// Bad input: malformed state, out-of-range parameter, unresolved preset.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A configuration file that does not describe a runnable scenario.
class ConfigError : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

// The numerics could not produce a trustworthy answer.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace fiberlink
