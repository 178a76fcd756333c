#pragma once

#include <stdexcept>
#include <string>

namespace gaf {

// Failure classes. The category decides the CLI exit code.
enum class ErrorCategory { argument, config, numeric, io };

// Structured error with a machine-parsable reason such as
// "zeros.contour_near_zero" and a human-readable message.
class Error : public std::runtime_error {
 public:
  Error(ErrorCategory category, std::string reason, const std::string& message)
      : std::runtime_error(message), category_(category), reason_(std::move(reason)) {}

  ErrorCategory category() const noexcept { return category_; }
  const std::string& reason() const noexcept { return reason_; }

 private:
  ErrorCategory category_;
  std::string reason_;
};

inline Error argument_error(std::string reason, const std::string& msg) {
  return Error(ErrorCategory::argument, std::move(reason), msg);
}
inline Error numeric_error(std::string reason, const std::string& msg) {
  return Error(ErrorCategory::numeric, std::move(reason), msg);
}
inline Error config_error(std::string reason, const std::string& msg) {
  return Error(ErrorCategory::config, std::move(reason), msg);
}
inline Error io_error(std::string reason, const std::string& msg) {
  return Error(ErrorCategory::io, std::move(reason), msg);
}

}  // namespace gaf
