#include "chj/error.hpp"

namespace chj {

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::NoBracket: return "NoBracket";
    case ErrorCode::NonPositiveA: return "NonPositiveA";
    case ErrorCode::NotConverged: return "NotConverged";
    case ErrorCode::BlowUp: return "BlowUp";
    case ErrorCode::TurningPoint: return "TurningPoint";
    case ErrorCode::InnerNotConverged: return "InnerNotConverged";
    case ErrorCode::NoTrajectoryLanded: return "NoTrajectoryLanded";
    case ErrorCode::CapTooSmall: return "CapTooSmall";
    case ErrorCode::BracketFail: return "BracketFail";
    case ErrorCode::EpsilonUnderflow: return "EpsilonUnderflow";
    case ErrorCode::NotNontrivial: return "NotNontrivial";
    case ErrorCode::SliceCountIncompatible: return "SliceCountIncompatible";
    case ErrorCode::FlatObjective: return "FlatObjective";
    case ErrorCode::TouchingViolated: return "TouchingViolated";
    case ErrorCode::AssumptionViolated: return "AssumptionViolated";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

}  // namespace chj
