#pragma once

#include <stdexcept>
#include <string>

namespace mfnc {

// Raised when a state or statistic leaves the finite range. Bounded rates make
// this unreachable for valid configurations, so it always indicates a bug or a
// parameter blow-up. The CLI maps it to exit code 3.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed configuration (unknown key, bad value). CLI exit code 1.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace mfnc
