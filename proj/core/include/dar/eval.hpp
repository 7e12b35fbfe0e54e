// Copyright 2026 The DAR Authors
// SPDX-License-Identifier: Apache-2.0

// Dialogue benchmark replay and cumulative Hits@k curves.
//
// Curves follow the freeze rule: a dialogue stops being processed at the
// first turn its target ranks within k, and counts as a hit for that turn
// and every later one. h_t = |{d : first_hit(d) <= t}| / n.

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "dar/backends.hpp"
#include "dar/dialogue.hpp"
#include "dar/index.hpp"
#include "dar/session.hpp"

namespace dar {

struct DialogueEntry {
  std::string target_uri;
  ImageId target_id = 0;
  std::string d0;
  std::vector<QaTurn> turns;
};

struct DialogueDataset {
  std::vector<DialogueEntry> entries;

  /// Turns per dialogue (all entries share it); 0 for an empty dataset.
  unsigned turns() const noexcept;
};

/// Splits on the first '?': the question keeps the '?', the trimmed rest is
/// the answer. Without a '?' the whole string is the answer and the question
/// is kPlaceholderQuestion.
QaTurn split_qa(std::string_view text);

inline constexpr std::string_view kPlaceholderQuestion = "Anything else?";

/// JSON array of {"img": str, "dialog": [str, ...]}; "img" is matched
/// against index uris, then as a decimal id. Throws FormatError,
/// UnknownTarget.
DialogueDataset parse_dataset(const nlohmann::json& j, const EmbeddingIndex& ix);
/// Also throws IoError.
DialogueDataset load_dataset(const std::filesystem::path& path, const EmbeddingIndex& ix);

using FirstHit = std::optional<unsigned>;
using HitsCurve = std::vector<double>;
/// ranks[d][t]: target rank of dialogue d at turn t; std::nullopt marks a
/// turn that was never evaluated (after a hit, or after a failure).
using RankMatrix = std::vector<std::vector<std::optional<std::size_t>>>;

/// T + 1 values. `n` is the denominator (number of dialogues); n == 0 gives
/// an all-zero curve.
HitsCurve hits_at_k_curve(std::span<const FirstHit> first_hits, unsigned T, std::size_t n);

std::vector<FirstHit> first_hit_turns(const RankMatrix& ranks, std::size_t k);

/// Independent route: walks turns in order, keeping the set of dialogues
/// still in play and counting new hits as they happen.
HitsCurve curve_by_freeze(const RankMatrix& ranks, std::size_t k, unsigned T);

bool is_non_decreasing(const HitsCurve& c);

struct Variant {
  std::string name;
  RefineMethod reformulation = RefineMethod::R1;
  unsigned K = 3;

  /// Refinement plus K generated images.
  static Variant dar(unsigned K = 3) { return {"dar", RefineMethod::R1, K}; }
  /// Concatenated dialogue, text only.
  static Variant concat() { return {"concat", RefineMethod::Concat, 0}; }
};

struct VariantResult {
  std::string name;
  HitsCurve curve;
  std::vector<FirstHit> first_hit;
  RankMatrix ranks;
  std::vector<std::string> failures;  // per dialogue, empty when fine
  std::size_t excluded = 0;
  double seconds = 0.0;  // wall clock, not serialized by default

  friend bool operator==(const VariantResult&, const VariantResult&) = default;
};

struct RunReport {
  nlohmann::json config;
  unsigned k = 10;
  unsigned T = 0;
  std::size_t n = 0;
  std::vector<VariantResult> variants;
  double total_seconds = 0.0;

  friend bool operator==(const RunReport&, const RunReport&) = default;
};

struct BenchmarkOptions {
  /// Dialogues whose session hits a backend failure are dropped from the
  /// denominator instead of counting as misses.
  bool strict = false;
  std::string session_prefix = "d";
  /// When set, each session transcript is written to <dir>/<variant>/<d>.json.
  std::filesystem::path transcript_dir;
};

/// Replays every dialogue through a Session in evaluation mode per variant.
/// `cfg.hit_k` is k; `cfg.T` is taken from the dataset.
RunReport run_benchmark(const DialogueDataset& ds, std::shared_ptr<const EmbeddingIndex> ix,
                        SessionConfig cfg, const Backends& backends,
                        std::span<const Variant> variants, const BenchmarkOptions& opts = {});

enum class ReportFormat { Json, Csv };

nlohmann::json report_to_json(const RunReport& r, bool include_timing = false);
RunReport report_from_json(const nlohmann::json& j);
/// Columns variant,turn,hits_at_k,n; one row per variant and turn.
std::string report_to_csv(const RunReport& r);
/// Throws IoError.
void emit_report(const RunReport& r, const std::filesystem::path& path, ReportFormat format,
                 bool include_timing = false);

}  // namespace dar
