// Copyright 2026 The DAR Authors
// SPDX-License-Identifier: Apache-2.0

// Prompt templates for the refinement, diffusion-prompt and questioner LLM
// calls. The shipped copies live in resources/templates/ and are compiled
// in; a directory with any of r1.txt, r2.txt, questioner.txt and
// r2_directives.txt (one directive per line, line k for variation k)
// overrides them.
//
// Placeholder grammar: {NAME} with NAME matching [A-Z][A-Z0-9_]* is replaced
// by its value; "{{" and "}}" produce literal braces; any other brace is
// copied through. Unknown names are an error. Known names: D0, TURNS, S_T,
// K_DIRECTIVE.

#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "dar/dialogue.hpp"

namespace dar {

// Section markers shared by the templates and the reference TemplateLlm.
inline constexpr std::string_view kInitialQuerySection = "[Initial Query]";
inline constexpr std::string_view kDialogueSection = "[Dialogue]";
inline constexpr std::string_view kNewQueryMarker = "[New Query]:";
inline constexpr std::string_view kRefinedQuerySection = "[Refined Query]";
inline constexpr std::string_view kDiffusionPromptMarker = "[Diffusion Prompt]:";
inline constexpr std::string_view kNextQuestionMarker = "[Next Question]:";
inline constexpr std::string_view kNoTurnsText = "(no follow-up turns yet)";

using TemplateValues = std::map<std::string, std::string, std::less<>>;

std::string render_template(std::string_view tmpl, const TemplateValues& values);

struct PromptTemplates {
  std::string r1;
  std::string r2;
  std::string questioner;
  std::vector<std::string> r2_directives;

  static const PromptTemplates& builtin();
  /// Files missing from `dir` fall back to the builtin copy. Throws IoError
  /// when `dir` is not a directory.
  static PromptTemplates load(const std::filesystem::path& dir);

  /// Variation directive for 1-based k; beyond the configured list a generic
  /// k-numbered directive is produced.
  std::string directive(unsigned k) const;
};

/// Collapses CR/LF to spaces so values cannot break the section layout.
std::string single_line(std::string_view text);

/// "Turn 1\nQ: ...\nA: ...\n\nTurn 2 ..." or kNoTurnsText.
std::string render_turns(const std::vector<QaTurn>& turns);

}  // namespace dar
