#pragma once

#include <stdexcept>
#include <string>

namespace remeasure {

/// Malformed or inconsistent input (bad table, violated design invariant).
class InputError : public std::invalid_argument {
 public:
  explicit InputError(const std::string& what) : std::invalid_argument(what) {}
};

/// A numerical step could not be carried out (singular system, no root, ...).
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace remeasure
