#pragma once

#include <stdexcept>
#include <string>

namespace spinsqz {

/// Invalid user-facing configuration (bad family parameters, sizes past the
/// memory guard, impossible thermal targets). Maps to CLI exit code 2.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

/// A numerical procedure failed to meet its contract (Krylov non-convergence,
/// undefined squeezing frame, optimum on the grid boundary). Exit code 3.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace spinsqz
