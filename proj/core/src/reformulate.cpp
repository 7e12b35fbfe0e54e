// Copyright 2026 The DAR Authors
// SPDX-License-Identifier: Apache-2.0

#include "dar/reformulate.hpp"

#include <algorithm>
#include <array>
#include <set>

#include "dar/errors.hpp"
#include "dar/log.hpp"

namespace dar {

namespace {

constexpr std::string_view kSeparator = ", ";

constexpr std::array<std::string_view, 8> kFallbackStyles = {
    "photorealistic", "cinematic", "natural", "vivid",
    "detailed",       "soft-lit",  "wide-angle", "close-up"};

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; }

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && is_space(s[b])) ++b;
  while (e > b && is_space(s[e - 1])) --e;
  return std::string(s.substr(b, e - b));
}

bool starts_with_ci(std::string_view s, std::string_view prefix) {
  if (s.size() < prefix.size()) return false;
  for (std::size_t i = 0; i < prefix.size(); ++i) {
    if (std::tolower(static_cast<unsigned char>(s[i])) !=
        std::tolower(static_cast<unsigned char>(prefix[i]))) {
      return false;
    }
  }
  return true;
}

// First non-empty line, without an echoed section label or wrapping quotes.
std::string clean_completion(std::string_view raw) {
  std::string line;
  std::size_t pos = 0;
  while (pos <= raw.size()) {
    const auto nl = raw.find('\n', pos);
    line = trim(raw.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos));
    if (!line.empty() || nl == std::string_view::npos) break;
    pos = nl + 1;
  }
  for (std::string_view label : {"[New Query]:", "New Query:", "[Diffusion Prompt]:",
                                 "Diffusion Prompt:", "Prompt:", "[Next Question]:"}) {
    if (starts_with_ci(line, label)) {
      line = trim(std::string_view(line).substr(label.size()));
      break;
    }
  }
  if (line.size() >= 2 && line.front() == '"' && line.back() == '"') {
    line = trim(std::string_view(line).substr(1, line.size() - 2));
  }
  return line;
}

std::string with_suffix(std::string_view base, std::string_view token, std::size_t budget) {
  if (budget < 2) return std::string(token);
  std::string out = truncate_to_budget(base, budget - 1);
  if (!out.empty()) out += ' ';
  out += token;
  return out;
}

std::string fallback_prompt(const RefinedQuery& s, unsigned k, std::size_t budget) {
  std::string style(kFallbackStyles[(k - 1) % kFallbackStyles.size()]);
  if (k > kFallbackStyles.size()) style += "-" + std::to_string(k);
  return with_suffix(s.text, style, budget);
}

}  // namespace

std::string_view to_string(RefineMethod m) { return m == RefineMethod::R1 ? "r1" : "concat"; }

RefineMethod parse_refine_method(std::string_view s) {
  if (s == "r1") return RefineMethod::R1;
  if (s == "concat") return RefineMethod::Concat;
  throw Error(ErrorCode::InvalidArgument, "unknown reformulation method", std::string(s));
}

std::size_t count_tokens(std::string_view text) {
  std::size_t n = 0;
  bool in_token = false;
  for (char c : text) {
    if (is_space(c)) {
      in_token = false;
    } else if (!in_token) {
      in_token = true;
      ++n;
    }
  }
  return n;
}

std::string truncate_to_budget(std::string_view text, std::size_t budget) {
  if (budget == 0) throw Error(ErrorCode::InvalidArgument, "token budget must be >= 1");
  std::size_t seen = 0;
  bool in_token = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (is_space(text[i])) {
      if (in_token && seen == budget) return std::string(text.substr(0, i));
      in_token = false;
    } else if (!in_token) {
      in_token = true;
      ++seen;
    }
  }
  return std::string(text);
}

RefinedQuery concat_context(const DialogueContext& c) {
  std::string text = c.initial_description;
  for (const auto& turn : c.turns) {
    text += kSeparator;
    text += turn.question;
    text += ' ';
    text += turn.answer;
  }
  return {std::move(text), static_cast<unsigned>(c.turns.size()), RefineMethod::Concat};
}

std::string build_r1_prompt(const DialogueContext& c, const PromptTemplates& t) {
  return render_template(t.r1, {{"D0", single_line(c.initial_description)},
                                {"TURNS", render_turns(c.turns)}});
}

RefinedQuery reformulate_dialogue(const DialogueContext& c, const LlmCompleter& llm,
                                  const ReformulateOptions& opts) {
  const auto turn = static_cast<unsigned>(c.turns.size());
  try {
    const std::string out = clean_completion(
        llm.complete(build_r1_prompt(c, opts.prompt_templates()), opts.r1_temperature,
                     opts.max_tokens));
    if (out.empty()) throw Error(ErrorCode::EmptyCompletion, "refinement output is empty");
    return {truncate_to_budget(out, opts.token_budget), turn, RefineMethod::R1};
  } catch (const Error& e) {
    log(LogLevel::Warning,
        std::string("query refinement failed, using concatenation: ") + e.what());
  }
  RefinedQuery q = concat_context(c);
  q.text = truncate_to_budget(q.text, opts.token_budget);
  return q;
}

std::string build_r2_prompt(const RefinedQuery& s, unsigned k, unsigned K,
                            const PromptTemplates& t) {
  if (k < 1 || k > K) {
    throw Error(ErrorCode::InvalidArgument, "prompt index out of range",
                std::to_string(k) + " not in [1, " + std::to_string(K) + "]");
  }
  return render_template(t.r2, {{"S_T", single_line(s.text)}, {"K_DIRECTIVE", t.directive(k)}});
}

PromptSet generate_prompts(const RefinedQuery& s, unsigned K, const LlmCompleter& llm,
                           const ReformulateOptions& opts) {
  if (K == 0) throw Error(ErrorCode::InvalidArgument, "K must be >= 1");
  PromptSet set;
  set.source = s;
  set.prompts.reserve(K);
  for (unsigned k = 1; k <= K; ++k) {
    std::string prompt;
    try {
      prompt = clean_completion(llm.complete(build_r2_prompt(s, k, K, opts.prompt_templates()),
                                             opts.r2_temperature, opts.max_tokens));
      if (prompt.empty()) throw Error(ErrorCode::EmptyCompletion, "diffusion prompt is empty");
      prompt = truncate_to_budget(prompt, opts.token_budget);
    } catch (const Error& e) {
      log(LogLevel::Warning, "diffusion prompt " + std::to_string(k) +
                                 " failed, using fallback: " + e.what());
      prompt = fallback_prompt(s, k, opts.token_budget);
      ++set.fallbacks;
    }
    set.prompts.push_back(std::move(prompt));
  }

  std::set<std::string> seen;
  for (unsigned k = 1; k <= K; ++k) {
    std::string& p = set.prompts[k - 1];
    const std::string base = p;
    for (unsigned n = 1; seen.contains(p); ++n) {
      std::string token = "v" + std::to_string(k);
      if (n > 1) token += "-" + std::to_string(n);
      p = with_suffix(base, token, opts.token_budget);
    }
    seen.insert(p);
  }
  return set;
}

std::string build_question_prompt(const DialogueContext& c, const PromptTemplates& t) {
  return render_template(t.questioner, {{"D0", single_line(c.initial_description)},
                                        {"TURNS", render_turns(c.turns)}});
}

}  // namespace dar
