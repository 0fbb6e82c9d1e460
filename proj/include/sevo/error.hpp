#pragma once

#include <stdexcept>
#include <string>

namespace sevo {

/// Failure categories shared by every module. The numeric values are part of
/// the C ABI (see sevo.h) and must not be reordered.
enum class ErrorCode : int {
  InvalidArgument = 1,
  SingularSystem = 2,
  ConditionsUnmet = 3,
  NotSubcritical = 4,
  DomainError = 5,
  FitUnstable = 6,
  DataLeakage = 7,
  ConditionViolated = 8,
  InsufficientSnapshots = 9,
  EmptyWindow = 10,
  NonPositiveValues = 11,
  NoBlowUpAtCap = 12,
  BlowUpDuringDecayExperiment = 13,
  Io = 14,
  Usage = 15,
  Cancelled = 16,
};

const char* error_code_name(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace sevo
