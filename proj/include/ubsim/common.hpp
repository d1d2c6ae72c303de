#pragma once

#include <stdexcept>
#include <string>

namespace ubsim {

inline constexpr const char* kEngineVersion = "0.1.0";

// Bad or inconsistent user configuration. The CLI maps this to exit code 2.
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Fatal numerical condition (singular volatility, degenerate averaging
// interval, non-PSD covariance). The CLI maps this to exit code 3.
struct NumericalError : std::runtime_error {
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace ubsim
