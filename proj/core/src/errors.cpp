// Copyright 2026 The DAR Authors
// SPDX-License-Identifier: Apache-2.0

#include "dar/errors.hpp"

namespace dar {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::ZeroVector: return "ZeroVector";
    case ErrorCode::DimMismatch: return "DimMismatch";
    case ErrorCode::DuplicateId: return "DuplicateId";
    case ErrorCode::UnknownId: return "UnknownId";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::FormatError: return "FormatError";
    case ErrorCode::Timeout: return "Timeout";
    case ErrorCode::BadStatus: return "BadStatus";
    case ErrorCode::MalformedResponse: return "MalformedResponse";
    case ErrorCode::EmptyCompletion: return "EmptyCompletion";
    case ErrorCode::BackendFailure: return "BackendFailure";
    case ErrorCode::SessionClosed: return "SessionClosed";
    case ErrorCode::TurnLimitExceeded: return "TurnLimitExceeded";
    case ErrorCode::NoTurns: return "NoTurns";
    case ErrorCode::UnknownTarget: return "UnknownTarget";
    case ErrorCode::UnknownSession: return "UnknownSession";
    case ErrorCode::StaleGrid: return "StaleGrid";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message, std::string detail)
    : std::runtime_error(std::string(to_string(code)) + ": " + message),
      code_(code),
      message_(message),
      detail_(std::move(detail)) {}

}  // namespace dar
