// Copyright 2026 The DAR Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace dar {

enum class ErrorCode {
  InvalidArgument,
  ZeroVector,
  DimMismatch,
  DuplicateId,
  UnknownId,
  IoError,
  FormatError,
  Timeout,
  BadStatus,
  MalformedResponse,
  EmptyCompletion,
  BackendFailure,
  SessionClosed,
  TurnLimitExceeded,
  NoTurns,
  UnknownTarget,
  UnknownSession,
  StaleGrid,
};

std::string_view to_string(ErrorCode code);

/// The single exception type thrown by the library. `code()` carries the
/// taxonomy; `detail()` is free-form context (file name, HTTP status, ...).
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message, std::string detail = {});

  ErrorCode code() const noexcept { return code_; }
  const std::string& message() const noexcept { return message_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorCode code_;
  std::string message_;
  std::string detail_;
};

}  // namespace dar
