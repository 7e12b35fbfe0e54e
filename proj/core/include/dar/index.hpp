// Copyright 2026 The DAR Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "dar/embedding.hpp"

namespace dar {

using ImageId = std::uint64_t;

struct CorpusEntry {
  ImageId id = 0;
  std::string uri;
  Embedding embedding;
};

struct ScoredId {
  ImageId id = 0;
  double score = 0.0;

  friend bool operator==(const ScoredId&, const ScoredId&) = default;
};

/// Scores non-increasing, ties broken by ascending id.
using RankedList = std::vector<ScoredId>;

/// Immutable candidate corpus with exact (flat) cosine search.
///
/// Embeddings are L2-normalized when the index is built and stored as one
/// contiguous row-major float matrix ordered by ascending id. Scores are the
/// double-precision dot product of the normalized query with each row, so
/// top_k and rank_of agree exactly on every score and every tie.
class EmbeddingIndex {
 public:
  EmbeddingIndex() = default;

  std::uint32_t dim() const noexcept { return dim_; }
  std::size_t size() const noexcept { return ids_.size(); }
  bool empty() const noexcept { return ids_.empty(); }

  std::span<const ImageId> ids() const noexcept { return ids_; }
  ImageId id_at(std::size_t row) const { return ids_.at(row); }
  const std::string& uri_at(std::size_t row) const { return uris_.at(row); }
  std::span<const float> vector_at(std::size_t row) const;

  std::optional<std::size_t> find(ImageId id) const;
  std::optional<std::size_t> find_uri(std::string_view uri) const;
  const std::string& uri_of(ImageId id) const;

  /// Exactly min(k, size()) results. Throws DimMismatch, ZeroVector.
  RankedList top_k(const Embedding& query, std::size_t k) const;

  /// 1-based rank of `target` under the top_k ordering. Throws UnknownId.
  std::size_t rank_of(const Embedding& query, ImageId target) const;

  /// Every score, in row (ascending id) order.
  std::vector<double> scores(const Embedding& query) const;

  /// Compares dim, ids, uris and embedding bytes.
  friend bool operator==(const EmbeddingIndex& a, const EmbeddingIndex& b);

 private:
  friend EmbeddingIndex build_index(std::uint32_t, std::vector<CorpusEntry>);
  friend EmbeddingIndex load_index(const std::filesystem::path&);

  std::vector<double> normalized_query(const Embedding& query) const;

  std::uint32_t dim_ = 0;
  std::vector<ImageId> ids_;
  std::vector<std::string> uris_;
  std::vector<float> matrix_;
  std::unordered_map<std::string, std::size_t> uri_rows_;
};

/// Throws DimMismatch, DuplicateId, ZeroVector, InvalidArgument (uri longer
/// than 65535 bytes or dim 0).
EmbeddingIndex build_index(std::uint32_t dim, std::vector<CorpusEntry> entries);

// Binary layout, all integers little-endian, no padding:
//   "DARIDX01" | u16 version=1 | u32 dim | u64 count |
//   count x ( u64 id | u16 uri_len | uri bytes | dim x f32 )
void save_index(const EmbeddingIndex& ix, const std::filesystem::path& path);
EmbeddingIndex load_index(const std::filesystem::path& path);

}  // namespace dar
