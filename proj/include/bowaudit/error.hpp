#pragma once

#include <stdexcept>
#include <string>

namespace bowaudit {

// Bad input data: unreadable files, malformed rows, inconsistent sizes.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Caller violated a documented precondition on parameters or configuration.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace bowaudit
