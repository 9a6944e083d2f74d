#pragma once

#include <stdexcept>
#include <string>

namespace nesum {

/// Bad argument or misconfiguration detected before any work is done.
struct ArgumentError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Malformed or inconsistent input data (bad JSON line, tag/token
/// misalignment, unknown entity code, ...).
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Unreadable or unwritable file.
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Numeric divergence (NaN/Inf loss during training).
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace nesum
