#pragma once

#include <stdexcept>
#include <string>

namespace bp {

// Error taxonomy mirrored by the CLI exit codes:
//   InvalidInput     -> exit 1 (bad arguments, malformed files, violated preconditions)
//   Unconverged      -> exit 2 (iteration budget exhausted, marginal certificates)
//   NumericalFailure -> exit 3 (internal numerical breakdown)
struct InvalidInput : std::invalid_argument {
  explicit InvalidInput(const std::string& what) : std::invalid_argument(what) {}
};

struct Unconverged : std::runtime_error {
  explicit Unconverged(const std::string& what) : std::runtime_error(what) {}
};

struct NumericalFailure : std::runtime_error {
  explicit NumericalFailure(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace bp
