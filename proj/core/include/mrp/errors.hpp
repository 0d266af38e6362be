#pragma once

#include <stdexcept>
#include <string>

namespace mrp {

// Bad configuration: malformed formula text, invalid run config, missing
// referenced files. The CLI maps this to exit code 1.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Bad data: malformed CSV rows, unknown level labels, inconsistent counts.
// The CLI maps this to exit code 2.
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Numeric failure: non-finite objective, unreachable calibration target.
// The CLI maps this to exit code 3.
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace mrp
