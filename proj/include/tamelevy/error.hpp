#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace tamelevy {

enum class ErrorCode {
  ConfigError,
  WildRamification,
  NonDivisibleTower,
  NotIncreasing,
  LevelMismatch,
  TamenessViolated,
  OutOfBall,
  EnumerationCapExceeded,
  ZeroCoset,
  NonPositiveTime,
  InvalidLevels,
  ShellOutOfRange,
  AlphaTooSmall,
  Censored,
  ZeroBn,
  NumericalFailure,
};

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::WildRamification: return "WildRamification";
    case ErrorCode::NonDivisibleTower: return "NonDivisibleTower";
    case ErrorCode::NotIncreasing: return "NotIncreasing";
    case ErrorCode::LevelMismatch: return "LevelMismatch";
    case ErrorCode::TamenessViolated: return "TamenessViolated";
    case ErrorCode::OutOfBall: return "OutOfBall";
    case ErrorCode::EnumerationCapExceeded: return "EnumerationCapExceeded";
    case ErrorCode::ZeroCoset: return "ZeroCoset";
    case ErrorCode::NonPositiveTime: return "NonPositiveTime";
    case ErrorCode::InvalidLevels: return "InvalidLevels";
    case ErrorCode::ShellOutOfRange: return "ShellOutOfRange";
    case ErrorCode::AlphaTooSmall: return "AlphaTooSmall";
    case ErrorCode::Censored: return "Censored";
    case ErrorCode::ZeroBn: return "ZeroBn";
    case ErrorCode::NumericalFailure: return "NumericalFailure";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace tamelevy
