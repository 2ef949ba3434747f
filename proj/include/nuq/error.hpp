#pragma once

#include <stdexcept>
#include <string>

namespace nuq {

/// Malformed configuration, bad arguments or violated preconditions.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Singular systems, broken spectra, non-finite values produced by a computation.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Unreadable or unwritable files, corrupt containers.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace nuq
