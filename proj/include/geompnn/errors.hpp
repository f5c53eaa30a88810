#pragma once

#include <stdexcept>
#include <string>

namespace geompnn {

/// Malformed or inconsistent input data (bad case file, invariant violation).
class data_error : public std::runtime_error {
 public:
  explicit data_error(const std::string& what) : std::runtime_error(what) {}
};

/// Numerical failure (NaN loss, diverged optimizer, failed gradient check).
class numerical_error : public std::runtime_error {
 public:
  explicit numerical_error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace geompnn
