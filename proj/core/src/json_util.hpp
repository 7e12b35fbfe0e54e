// Copyright 2026 The DAR Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <limits>
#include <string>

#include <nlohmann/json.hpp>

#include "dar/errors.hpp"

namespace dar {

/// Integer JSON value that is >= 0 and fits T. Throws InvalidArgument.
template <typename T>
T json_count(const nlohmann::json& v, const std::string& key) {
  if (!v.is_number_integer() || (!v.is_number_unsigned() && v.get<std::int64_t>() < 0)) {
    throw Error(ErrorCode::InvalidArgument, "expected a non-negative integer", key);
  }
  const auto u = v.get<std::uint64_t>();
  if (u > std::numeric_limits<T>::max()) {
    throw Error(ErrorCode::InvalidArgument, "value out of range", key);
  }
  return static_cast<T>(u);
}

}  // namespace dar
