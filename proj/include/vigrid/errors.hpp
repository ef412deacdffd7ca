#ifndef VIGRID_ERRORS_HPP
#define VIGRID_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace vigrid {

// Exit codes used by the CLI: 0 success, 1 validation, 2 numerical, 3 I/O.
struct ValidationError : std::runtime_error {
  explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

struct NumericalError : std::runtime_error {
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

struct IoError : std::runtime_error {
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace vigrid

#endif
