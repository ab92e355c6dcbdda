#pragma once

#include <stdexcept>
#include <string>

namespace lrvq {

enum class ErrorCode {
  InvalidInput,
  InvalidRank,
  InvalidConfig,
  NumericalFailure,
  InsufficientData,
  DegenerateInput,
  UnsupportedFormat,
  UnsupportedDepth,
  UnsupportedVersion,
  CorruptFile,
  CorruptStream,
  CodebookMismatch,
  InconsistentInput,
  IoError,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

  // Process exit class: 2 = input/format, 3 = consistency, 4 = numerical.
  int exitCode() const noexcept {
    switch (code_) {
      case ErrorCode::CodebookMismatch:
      case ErrorCode::InconsistentInput:
        return 3;
      case ErrorCode::NumericalFailure:
        return 4;
      default:
        return 2;
    }
  }

 private:
  ErrorCode code_;
};

}  // namespace lrvq
