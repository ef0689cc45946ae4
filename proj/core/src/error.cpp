#include "aslap/error.hpp"

namespace aslap {

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "invalid-argument";
    case ErrorKind::NumericDegeneracy: return "numeric-degeneracy";
    case ErrorKind::InvalidLocation: return "invalid-location";
    case ErrorKind::StuckRobot: return "stuck-robot";
    case ErrorKind::Schema: return "schema";
    case ErrorKind::EmptyInput: return "empty-input";
    case ErrorKind::Normalization: return "normalization";
    case ErrorKind::InsufficientData: return "insufficient-data";
    case ErrorKind::Io: return "io";
    case ErrorKind::Parse: return "parse";
    case ErrorKind::Config: return "config";
  }
  return "unknown";
}

Error::Error(ErrorKind kind, const std::string& message)
    : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind), message_(message) {}

}  // namespace aslap
