// Copyright 2026 The DAR Authors
// SPDX-License-Identifier: Apache-2.0

// Query reformulation: the dialogue-aware refinement of the whole context
// into one retrieval query, the expansion of that query into K distinct
// diffusion prompts, the plain concatenation baseline, and whitespace-token
// budgeting. The LLM-backed steps never fail: backend errors fall back to
// the concatenation baseline or to deterministic prompt variants.

#pragma once

#include <cstddef>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "dar/backends.hpp"
#include "dar/dialogue.hpp"
#include "dar/templates.hpp"

namespace dar {

enum class RefineMethod { R1, Concat };

std::string_view to_string(RefineMethod m);
RefineMethod parse_refine_method(std::string_view s);

struct RefinedQuery {
  std::string text;
  unsigned source_turn = 0;
  RefineMethod method = RefineMethod::Concat;

  friend bool operator==(const RefinedQuery&, const RefinedQuery&) = default;
};

struct PromptSet {
  std::vector<std::string> prompts;
  RefinedQuery source;
  /// Prompts that came from the fallback path instead of the LLM.
  unsigned fallbacks = 0;
};

struct ReformulateOptions {
  std::size_t token_budget = 77;
  double r1_temperature = 0.0;
  double r2_temperature = 0.7;
  int max_tokens = 128;
  std::shared_ptr<const PromptTemplates> templates;  // null: builtin

  const PromptTemplates& prompt_templates() const {
    return templates ? *templates : PromptTemplates::builtin();
  }
};

/// D0, then "Q A" for every turn, joined with ", ". Not budgeted.
RefinedQuery concat_context(const DialogueContext& c);

std::string build_r1_prompt(const DialogueContext& c,
                            const PromptTemplates& t = PromptTemplates::builtin());

/// LLM refinement of the context; on any backend failure or empty output
/// returns the (budgeted) concatenation with method Concat.
RefinedQuery reformulate_dialogue(const DialogueContext& c, const LlmCompleter& llm,
                                  const ReformulateOptions& opts = {});

/// Throws InvalidArgument unless 1 <= k <= K.
std::string build_r2_prompt(const RefinedQuery& s, unsigned k, unsigned K,
                            const PromptTemplates& t = PromptTemplates::builtin());

/// K pairwise-distinct, non-empty, budget-compliant prompts in k order.
/// Throws InvalidArgument when K == 0.
PromptSet generate_prompts(const RefinedQuery& s, unsigned K, const LlmCompleter& llm,
                           const ReformulateOptions& opts = {});

std::string build_question_prompt(const DialogueContext& c,
                                  const PromptTemplates& t = PromptTemplates::builtin());

/// Cuts `text` right after its `budget`-th whitespace-delimited token; text
/// within budget is returned unchanged. Throws InvalidArgument when budget == 0.
std::string truncate_to_budget(std::string_view text, std::size_t budget);

std::size_t count_tokens(std::string_view text);

}  // namespace dar
