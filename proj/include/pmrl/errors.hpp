#pragma once

#include <stdexcept>
#include <string>

namespace pmrl {

enum class ErrorCode {
  ZeroColumn,
  DimensionMismatch,
  NotSymmetric,
  NotConverged,
  NonFinite,
  EmptyBatch,
  NonUnitColumns,
  BatchTooSmall,
  LengthMismatch,
  BadAnchor,
  ShapeMismatch,
  StaleCache,
  BadConfig,
  ConfigInvalid,
  IoFailure,
  UnknownSuite,
  SingleClass,
};

constexpr const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::ZeroColumn: return "ZeroColumn";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::NotSymmetric: return "NotSymmetric";
    case ErrorCode::NotConverged: return "NotConverged";
    case ErrorCode::NonFinite: return "NonFinite";
    case ErrorCode::EmptyBatch: return "EmptyBatch";
    case ErrorCode::NonUnitColumns: return "NonUnitColumns";
    case ErrorCode::BatchTooSmall: return "BatchTooSmall";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::BadAnchor: return "BadAnchor";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::StaleCache: return "StaleCache";
    case ErrorCode::BadConfig: return "BadConfig";
    case ErrorCode::ConfigInvalid: return "ConfigInvalid";
    case ErrorCode::IoFailure: return "IoFailure";
    case ErrorCode::UnknownSuite: return "UnknownSuite";
    case ErrorCode::SingleClass: return "SingleClass";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace pmrl
