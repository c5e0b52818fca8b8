#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace truncbound {

enum class ErrorCode {
  // structural / validation
  DimensionMismatch,
  IndexOutOfRange,
  NegativeEntry,
  RowSumExceedsOne,
  RowSumNotOne,
  // numerical
  SingularInterior,
  FundamentalDiverges,
  ZeroRow,
  NotConverged,
  NotStationary,
  NotDominating,
  NotUniqueStationary,
  ZeroMass,
  NotNormalized,
  NegativeReward,
  // models
  InvalidState,
  InvalidModel,
  Unstable,
  Unavailable,
  // io / config
  ParseError,
  IoError,
  ConfigInvalid,
  ConfigSNotInA,
  VerifyFailed,
};

inline constexpr std::string_view error_code_name(ErrorCode c) noexcept {
  switch (c) {
    case ErrorCode::DimensionMismatch: return "DIMENSION_MISMATCH";
    case ErrorCode::IndexOutOfRange: return "INDEX_OUT_OF_RANGE";
    case ErrorCode::NegativeEntry: return "NEGATIVE_ENTRY";
    case ErrorCode::RowSumExceedsOne: return "ROW_SUM_EXCEEDS_ONE";
    case ErrorCode::RowSumNotOne: return "ROW_SUM_NOT_ONE";
    case ErrorCode::SingularInterior: return "NUMERIC_SINGULAR_INTERIOR";
    case ErrorCode::FundamentalDiverges: return "NUMERIC_FUNDAMENTAL_DIVERGES";
    case ErrorCode::ZeroRow: return "NUMERIC_ZERO_ROW";
    case ErrorCode::NotConverged: return "NUMERIC_NOT_CONVERGED";
    case ErrorCode::NotStationary: return "NUMERIC_NOT_STATIONARY";
    case ErrorCode::NotDominating: return "NOT_DOMINATING";
    case ErrorCode::NotUniqueStationary: return "NUMERIC_NOT_UNIQUE_STATIONARY";
    case ErrorCode::ZeroMass: return "NUMERIC_ZERO_MASS";
    case ErrorCode::NotNormalized: return "NUMERIC_NOT_NORMALIZED";
    case ErrorCode::NegativeReward: return "NEGATIVE_REWARD";
    case ErrorCode::InvalidState: return "INVALID_STATE";
    case ErrorCode::InvalidModel: return "INVALID_MODEL";
    case ErrorCode::Unstable: return "MODEL_UNSTABLE";
    case ErrorCode::Unavailable: return "UNAVAILABLE";
    case ErrorCode::ParseError: return "PARSE_ERROR";
    case ErrorCode::IoError: return "IO_ERROR";
    case ErrorCode::ConfigInvalid: return "CONFIG_INVALID";
    case ErrorCode::ConfigSNotInA: return "CONFIG_S_NOT_IN_A";
    case ErrorCode::VerifyFailed: return "VERIFY_FAILED";
  }
  return "UNKNOWN";
}

/// True for failures produced by the numerical pipeline (as opposed to bad
/// input or configuration).
inline constexpr bool is_numerical(ErrorCode c) noexcept {
  switch (c) {
    case ErrorCode::SingularInterior:
    case ErrorCode::FundamentalDiverges:
    case ErrorCode::ZeroRow:
    case ErrorCode::NotConverged:
    case ErrorCode::NotStationary:
    case ErrorCode::NotUniqueStationary:
    case ErrorCode::ZeroMass:
    case ErrorCode::NotNormalized:
      return true;
    default:
      return false;
  }
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
  throw Error(code, std::string(error_code_name(code)) + ": " + what);
}

}  // namespace truncbound
