#pragma once

#include <stdexcept>
#include <string>

namespace mdg {

// Every error raised by the library derives from one of these three. The CLI
// maps them to exit codes 2 (usage), 3 (parse) and 4 (numeric).

class InvalidArgument : public std::invalid_argument {
 public:
  explicit InvalidArgument(const std::string& what) : std::invalid_argument(what) {}
};

class ParseError : public std::runtime_error {
 public:
  explicit ParseError(const std::string& what) : std::runtime_error(what) {}
};

class NumericError : public std::runtime_error {
 public:
  explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

/// Raised by the TPS solver when the L system cannot be inverted.
class SingularSystem : public NumericError {
 public:
  explicit SingularSystem(const std::string& what) : NumericError(what) {}
};

namespace detail {
[[noreturn]] void throw_invalid(const std::string& what);
}  // namespace detail

inline void require(bool condition, const char* message) {
  if (!condition) detail::throw_invalid(message);
}

}  // namespace mdg
