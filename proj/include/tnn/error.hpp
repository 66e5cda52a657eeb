#pragma once

#include <stdexcept>
#include <string>

namespace tnn {

/// Base class for every error raised by the library. `code()` is a short
/// machine-readable token (used by the CLI's error line).
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& message)
      : std::runtime_error(message), code_(std::move(code)) {}

  const std::string& code() const noexcept { return code_; }

 private:
  std::string code_;
};

class InvalidArgument : public Error {
 public:
  explicit InvalidArgument(const std::string& message)
      : Error("invalid_argument", message) {}
};

class DimensionMismatch : public Error {
 public:
  explicit DimensionMismatch(const std::string& message)
      : Error("dimension_mismatch", message) {}
};

}  // namespace tnn
