// Copyright 2026 The DAR Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <vector>

namespace dar {

struct QaTurn {
  std::string question;
  std::string answer;

  friend bool operator==(const QaTurn&, const QaTurn&) = default;
};

/// Initial description plus the ordered question/answer turns so far.
struct DialogueContext {
  std::string initial_description;
  std::vector<QaTurn> turns;

  /// Throws InvalidArgument on an empty description or more than `max_turns` turns.
  void validate(unsigned max_turns) const;

  friend bool operator==(const DialogueContext&, const DialogueContext&) = default;
};

}  // namespace dar
