#pragma once

#include <stdexcept>
#include <string>

namespace kinemetric {

// Two failure families surface through the C API and the CLI exit code:
// bad input/configuration, and analyses that are mathematically undefined
// for the data given (zero variance, too few samples, degenerate limbs).
enum class ErrorKind { Input, Degenerate };

class Error : public std::runtime_error {
public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

private:
  ErrorKind kind_;
};

class InputError : public Error {
public:
  explicit InputError(const std::string& what) : Error(ErrorKind::Input, what) {}
};

class DegenerateError : public Error {
public:
  explicit DegenerateError(const std::string& what)
      : Error(ErrorKind::Degenerate, what) {}
};

}  // namespace kinemetric
