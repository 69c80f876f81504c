#pragma once

#include <stdexcept>
#include <string>

namespace polishsense {

/// Runtime failure: bad data on disk, numerical breakdown, I/O.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Caller supplied an invalid configuration or argument. The CLI maps this
/// to exit status 2.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace polishsense
