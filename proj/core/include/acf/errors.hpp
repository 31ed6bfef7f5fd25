#pragma once

#include <stdexcept>
#include <string>

namespace acf {

// Thrown when an iterative solver fails to converge or a computed quantity
// comes out inconsistent (negative eigenvalue, ascending energy, ...).
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

// Thrown on malformed run configuration (unknown keys, bad types, bad values).
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Thrown when an output file cannot be written.
class IoError : public std::runtime_error {
 public:
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace acf
