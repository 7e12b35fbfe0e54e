// Copyright 2026 The DAR Authors
// SPDX-License-Identifier: Apache-2.0

// One interactive retrieval dialogue. Every turn (turn 0 runs on the initial
// description alone) refines the dialogue into a query, expands it into K
// diffusion prompts, generates and encodes one image per prompt, fuses the
// text and image embeddings with the turn's weights and ranks the corpus
// against the fused vector. Each turn's full provenance is kept in a
// TurnRecord.
//
// Failure ladder: refinement and prompt failures fall back (see
// reformulate.hpp); a failed generation or image encoding drops that image
// and is recorded; only a text-encoder failure aborts the turn
// (BackendFailure).

#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "dar/backends.hpp"
#include "dar/embedding.hpp"
#include "dar/errors.hpp"
#include "dar/index.hpp"
#include "dar/reformulate.hpp"

namespace dar {

struct SessionConfig {
  unsigned K = 3;       // generated images per turn; 0 = text-only
  unsigned T = 10;      // maximum QA turns after turn 0
  unsigned hit_k = 10;  // rank threshold for a hit and ranking snapshot size
  WeightSchedule schedule = WeightSchedule::standard();
  Aggregation aggregation = Aggregation::Sum;
  std::size_t token_budget = 77;
  std::uint64_t seed_base = 0;
  RefineMethod reformulation = RefineMethod::R1;
  double r1_temperature = 0.0;
  double r2_temperature = 0.7;
  std::uint32_t image_width = 512;
  std::uint32_t image_height = 512;
  bool parallel_generation = false;
  std::shared_ptr<const PromptTemplates> templates;  // null: builtin; not serialized

  /// Throws InvalidArgument.
  void validate() const;
  ReformulateOptions reformulate_options() const;
};

struct GeneratedImage {
  unsigned k = 0;  // 1-based
  std::string prompt;
  std::uint64_t seed = 0;
  ImageRef image;
  Embedding embedding;  // L2-normalized encoder output
};

struct GenerationFailure {
  unsigned k = 0;
  std::string prompt;
  std::uint64_t seed = 0;
  ErrorCode code = ErrorCode::BackendFailure;
  std::string message;
};

struct TurnRecord {
  unsigned turn = 0;
  std::string question;  // empty for turn 0
  std::string answer;
  RefinedQuery refined;
  std::vector<std::string> prompts;
  std::vector<GeneratedImage> images;  // successes, k order
  std::vector<GenerationFailure> failures;
  Embedding text_embedding;  // L2-normalized
  FusionWeights weights;
  Embedding fused;
  RankedList ranking;  // top hit_k under `fused`
  std::optional<std::size_t> target_rank;
  bool hit = false;
};

enum class SessionStatus { Active, Hit, Exhausted };

std::string_view to_string(SessionStatus s);

class Session {
 public:
  /// Runs turn 0 on `d0`. With a target the session is in evaluation mode:
  /// it becomes Hit as soon as the target ranks within hit_k.
  /// Throws InvalidArgument (empty d0, empty index, bad config, unknown
  /// target) and BackendFailure.
  static Session create(std::string id, std::string d0, SessionConfig cfg,
                        std::shared_ptr<const EmbeddingIndex> index, Backends backends,
                        std::optional<ImageId> target = std::nullopt);

  /// Throws TurnLimitExceeded once T turns were taken, SessionClosed when
  /// the session is no longer active, BackendFailure.
  const TurnRecord& submit_turn(std::string question, std::string answer);

  /// Next clarifying question; never empty. Throws SessionClosed.
  std::string generate_question() const;

  /// Throws NoTurns.
  RankedList current_ranking(std::size_t k) const;
  /// Top-1 id under the latest fused vector. Throws NoTurns.
  ImageId finalize() const;

  /// Live-mode acceptance. Throws SessionClosed, UnknownId.
  void accept(ImageId image);

  const std::string& id() const noexcept { return id_; }
  const SessionConfig& config() const noexcept { return cfg_; }
  const DialogueContext& context() const noexcept { return context_; }
  const std::vector<TurnRecord>& records() const noexcept { return records_; }
  SessionStatus status() const noexcept { return status_; }
  std::optional<ImageId> target() const noexcept { return target_; }
  std::optional<ImageId> accepted() const noexcept { return accepted_; }
  const EmbeddingIndex& index() const noexcept { return *index_; }

 private:
  Session() = default;
  void run_turn(std::string question, std::string answer);
  std::vector<GeneratedImage> generate_images(const std::vector<std::string>& prompts,
                                              unsigned turn,
                                              std::vector<GenerationFailure>& failures) const;

  std::string id_;
  SessionConfig cfg_;
  std::shared_ptr<const EmbeddingIndex> index_;
  Backends backends_;
  std::optional<ImageId> target_;
  std::optional<ImageId> accepted_;
  DialogueContext context_;
  std::vector<TurnRecord> records_;
  SessionStatus status_ = SessionStatus::Active;
};

/// Recomputes a record's fused vector from its stored text/image embeddings
/// and weights.
Embedding recompute_fused(const TurnRecord& record, Aggregation aggregation);

nlohmann::json to_json(const SessionConfig& cfg);
/// Fields absent from `j` keep the values of `base`. Throws InvalidArgument.
SessionConfig session_config_from_json(const nlohmann::json& j, SessionConfig base = {});

nlohmann::json to_json(const TurnRecord& r, bool include_embeddings = true);

/// Transcript: id, config, status, context, target, accepted id and every
/// TurnRecord with embeddings. Generated image bytes are base64-encoded.
nlohmann::json transcript(const Session& s);

}  // namespace dar
