#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace nscop {

/// Error categories surfaced by the library and echoed verbatim by the CLI.
enum class ErrorKind {
  MalformedInput,
  InsufficientData,
  NoOverlap,
  InvalidParameter,
  DegeneratePairing,
  FitFailure,
  CalibrationFailure,
};

std::string_view to_string(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

inline std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::MalformedInput: return "MalformedInput";
    case ErrorKind::InsufficientData: return "InsufficientData";
    case ErrorKind::NoOverlap: return "NoOverlap";
    case ErrorKind::InvalidParameter: return "InvalidParameter";
    case ErrorKind::DegeneratePairing: return "DegeneratePairing";
    case ErrorKind::FitFailure: return "FitFailure";
    case ErrorKind::CalibrationFailure: return "CalibrationFailure";
  }
  return "Unknown";
}

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) {
  throw Error(kind, what);
}

}  // namespace nscop
