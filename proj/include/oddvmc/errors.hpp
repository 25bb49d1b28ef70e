#pragma once

#include <stdexcept>
#include <string>

namespace oddvmc {

/// Raised when an evaluation hits a nodal surface or a singular point
/// (division by zero, log of a non-positive value, coincident particles).
class SingularEvaluation : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Raised for shape/dimension disagreements between operands.
class ShapeError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// Raised for invalid configuration; the message names the offending path.
class ConfigError : public std::invalid_argument {
public:
  ConfigError(const std::string& path, const std::string& what)
      : std::invalid_argument(path + ": " + what), path_(path) {}
  const std::string& path() const noexcept { return path_; }

private:
  std::string path_;
};

/// Raised when training produces too many consecutive non-finite steps.
class TrainingDiverged : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

} // namespace oddvmc
