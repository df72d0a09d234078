#pragma once

#include <stdexcept>
#include <string>

namespace drydown {

// Bad inputs or configuration (CLI exit code 2).
struct ValidationError : std::runtime_error {
  explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

// File system and parsing failures (CLI exit code 3).
struct IoError : std::runtime_error {
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

// No usable numerical result, e.g. no segmentation possible (CLI exit code 4).
struct NumericalError : std::runtime_error {
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace drydown
