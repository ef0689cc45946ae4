#pragma once

#include <stdexcept>
#include <string>

namespace aslap {

enum class ErrorKind {
  InvalidArgument,
  NumericDegeneracy,
  InvalidLocation,
  StuckRobot,
  Schema,
  EmptyInput,
  Normalization,
  InsufficientData,
  Io,
  Parse,
  Config,
};

const char* to_string(ErrorKind kind) noexcept;

/// Every failure raised by the library carries a kind so callers (and the
/// CLI exit path) can tell a stuck robot from a malformed input file.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message);

  ErrorKind kind() const noexcept { return kind_; }
  /// The message without the kind prefix that what() carries.
  const std::string& message() const noexcept { return message_; }

 private:
  ErrorKind kind_;
  std::string message_;
};

}  // namespace aslap
