// Copyright 2026 The DAR Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <functional>
#include <string_view>

namespace dar {

enum class LogLevel { Debug, Info, Warning, Error };

using LogSink = std::function<void(LogLevel, std::string_view)>;

/// Replaces the process-wide sink (default: warnings and errors to stderr).
/// Passing nullptr silences logging.
void set_log_sink(LogSink sink);
void log(LogLevel level, std::string_view message);

}  // namespace dar
