#pragma once

#include <stdexcept>
#include <string>

namespace chj {

enum class ErrorCode {
  InvalidArgument,
  ParseError,
  ConfigError,
  NoBracket,
  NonPositiveA,
  NotConverged,
  BlowUp,
  TurningPoint,
  InnerNotConverged,
  NoTrajectoryLanded,
  CapTooSmall,
  BracketFail,
  EpsilonUnderflow,
  NotNontrivial,
  SliceCountIncompatible,
  FlatObjective,
  TouchingViolated,
  AssumptionViolated,
};

const char* to_string(ErrorCode code) noexcept;

/// Every failure the library reports carries one of the codes above so the
/// runner can map it to an exit status.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace chj
