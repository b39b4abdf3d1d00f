#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace bmp {

enum class ErrorCode {
  DegenerateRotation,
  NotARotation,
  DimensionMismatch,
  InvalidConfig,
  IoError,
  FormatError,
  InvariantViolation,
  NonPositiveSize,
  NonPositiveScale,
  ConfigMismatch,
  MissingRelation,
  LengthMismatch,
  ShapeMismatch,
  DegenerateConfiguration,
  NoVisibleKeypoints,
  TooFewPersons,
  NonPositiveArea,
  DivergedLoss,
};

std::string_view to_string(ErrorCode code);

// Every recoverable failure in the library is reported as an Error carrying
// one of the codes above; the CLI maps all of them to exit status 2.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

inline void require(bool condition, ErrorCode code, const std::string& what) {
  if (!condition) fail(code, what);
}

}  // namespace bmp
