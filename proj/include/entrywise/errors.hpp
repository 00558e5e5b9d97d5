#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace entrywise {

enum class ErrorCode {
  InvalidInput,
  NumericalFailure,
  DimensionMismatch,
  ZeroFunctional,
  IndexOutOfRange,
  SamePair,
  StatusMismatch,
  Infeasible,
  RankDeficient,
  SingularGram,
  NotOverdetermined,
  InvalidStep,
  NonConvergence,
  UnknownPreset,
  ShapeMismatch,
  ConfigError,
  IoError,
};

std::string_view to_string(ErrorCode code);

// Every failure raised by the library carries one of the codes above so that
// callers (the CLI in particular) can map them to exit codes without parsing
// messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code), detail_(what) {}

  ErrorCode code() const noexcept { return code_; }
  // The message without the code prefix.
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorCode code_;
  std::string detail_;
};

}  // namespace entrywise
