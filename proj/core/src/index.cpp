// Copyright 2026 The DAR Authors
// SPDX-License-Identifier: Apache-2.0

#include "dar/index.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <queue>

#include "dar/errors.hpp"

namespace dar {

namespace {

constexpr std::array<char, 8> kMagic = {'D', 'A', 'R', 'I', 'D', 'X', '0', '1'};
constexpr std::uint16_t kVersion = 1;
constexpr double kUnitTolerance = 1e-5;

static_assert(std::endian::native == std::endian::little,
              "index I/O assumes a little-endian host");

// Four independent accumulators; the summation order is fixed so every
// caller in this file sees bit-identical scores for the same row.
inline double dot_row(const double* q, const float* row, std::size_t d) {
  double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
  std::size_t i = 0;
  for (; i + 4 <= d; i += 4) {
    s0 += q[i] * static_cast<double>(row[i]);
    s1 += q[i + 1] * static_cast<double>(row[i + 1]);
    s2 += q[i + 2] * static_cast<double>(row[i + 2]);
    s3 += q[i + 3] * static_cast<double>(row[i + 3]);
  }
  for (; i < d; ++i) s0 += q[i] * static_cast<double>(row[i]);
  return (s0 + s1) + (s2 + s3);
}

// true when (sa, ia) ranks strictly before (sb, ib)
inline bool ranks_before(double sa, ImageId ia, double sb, ImageId ib) {
  return sa > sb || (sa == sb && ia < ib);
}

template <typename T>
void put(std::ofstream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

class Reader {
 public:
  Reader(const std::vector<char>& buf, const std::string& name) : buf_(buf), name_(name) {}

  template <typename T>
  T get() {
    T v;
    std::memcpy(&v, take(sizeof(T)), sizeof(T));
    return v;
  }

  const char* take(std::size_t n) {
    if (buf_.size() - pos_ < n) {
      throw Error(ErrorCode::FormatError, "truncated index file", name_);
    }
    const char* p = buf_.data() + pos_;
    pos_ += n;
    return p;
  }

  bool done() const { return pos_ == buf_.size(); }

 private:
  const std::vector<char>& buf_;
  const std::string& name_;
  std::size_t pos_ = 0;
};

}  // namespace

std::span<const float> EmbeddingIndex::vector_at(std::size_t row) const {
  if (row >= size()) throw Error(ErrorCode::UnknownId, "row out of range");
  return {matrix_.data() + row * dim_, dim_};
}

std::optional<std::size_t> EmbeddingIndex::find(ImageId id) const {
  auto it = std::lower_bound(ids_.begin(), ids_.end(), id);
  if (it == ids_.end() || *it != id) return std::nullopt;
  return static_cast<std::size_t>(it - ids_.begin());
}

std::optional<std::size_t> EmbeddingIndex::find_uri(std::string_view uri) const {
  auto it = uri_rows_.find(std::string(uri));
  if (it == uri_rows_.end()) return std::nullopt;
  return it->second;
}

const std::string& EmbeddingIndex::uri_of(ImageId id) const {
  auto row = find(id);
  if (!row) throw Error(ErrorCode::UnknownId, "unknown image id", std::to_string(id));
  return uris_[*row];
}

std::vector<double> EmbeddingIndex::normalized_query(const Embedding& query) const {
  if (query.dim() != dim_) {
    throw Error(ErrorCode::DimMismatch, "query dim does not match index",
                std::to_string(query.dim()) + " vs " + std::to_string(dim_));
  }
  const double n = query.norm();
  if (n < 1e-12) throw Error(ErrorCode::ZeroVector, "zero query vector");
  std::vector<double> q(dim_);
  for (std::size_t i = 0; i < dim_; ++i) q[i] = static_cast<double>(query[i]) / n;
  return q;
}

std::vector<double> EmbeddingIndex::scores(const Embedding& query) const {
  const auto q = normalized_query(query);
  std::vector<double> out(size());
  for (std::size_t r = 0; r < size(); ++r) {
    out[r] = dot_row(q.data(), matrix_.data() + r * dim_, dim_);
  }
  return out;
}

RankedList EmbeddingIndex::top_k(const Embedding& query, std::size_t k) const {
  const auto q = normalized_query(query);
  k = std::min(k, size());
  if (k == 0) return {};

  // Min-heap on rank order: top() is the worst of the current best k.
  auto worse_first = [](const ScoredId& a, const ScoredId& b) {
    return ranks_before(a.score, a.id, b.score, b.id);
  };
  std::priority_queue<ScoredId, std::vector<ScoredId>, decltype(worse_first)> heap(
      worse_first);

  const float* row = matrix_.data();
  for (std::size_t r = 0; r < size(); ++r, row += dim_) {
    const double s = dot_row(q.data(), row, dim_);
    if (heap.size() < k) {
      heap.push({ids_[r], s});
    } else if (s > heap.top().score) {
      // Rows are scanned in ascending id order, so an equal score never
      // displaces an earlier (smaller) id.
      heap.pop();
      heap.push({ids_[r], s});
    }
  }

  RankedList out(heap.size());
  for (auto it = out.rbegin(); it != out.rend(); ++it) {
    *it = heap.top();
    heap.pop();
  }
  return out;
}

std::size_t EmbeddingIndex::rank_of(const Embedding& query, ImageId target) const {
  const auto target_row = find(target);
  if (!target_row) throw Error(ErrorCode::UnknownId, "unknown target id", std::to_string(target));
  const auto q = normalized_query(query);
  const double ts = dot_row(q.data(), matrix_.data() + *target_row * dim_, dim_);
  std::size_t rank = 1;
  const float* row = matrix_.data();
  for (std::size_t r = 0; r < size(); ++r, row += dim_) {
    if (r == *target_row) continue;
    if (ranks_before(dot_row(q.data(), row, dim_), ids_[r], ts, target)) ++rank;
  }
  return rank;
}

bool operator==(const EmbeddingIndex& a, const EmbeddingIndex& b) {
  return a.dim_ == b.dim_ && a.ids_ == b.ids_ && a.uris_ == b.uris_ &&
         a.matrix_.size() == b.matrix_.size() &&
         std::memcmp(a.matrix_.data(), b.matrix_.data(), a.matrix_.size() * sizeof(float)) == 0;
}

EmbeddingIndex build_index(std::uint32_t dim, std::vector<CorpusEntry> entries) {
  if (dim == 0) throw Error(ErrorCode::InvalidArgument, "index dim must be positive");
  std::sort(entries.begin(), entries.end(),
            [](const CorpusEntry& a, const CorpusEntry& b) { return a.id < b.id; });

  EmbeddingIndex ix;
  ix.dim_ = dim;
  ix.ids_.reserve(entries.size());
  ix.uris_.reserve(entries.size());
  ix.matrix_.reserve(entries.size() * dim);
  for (std::size_t i = 0; i < entries.size(); ++i) {
    auto& e = entries[i];
    if (i > 0 && entries[i - 1].id == e.id) {
      throw Error(ErrorCode::DuplicateId, "duplicate corpus id", std::to_string(e.id));
    }
    if (e.embedding.dim() != dim) {
      throw Error(ErrorCode::DimMismatch, "corpus entry dim does not match index",
                  "id " + std::to_string(e.id));
    }
    if (e.uri.size() > std::numeric_limits<std::uint16_t>::max()) {
      throw Error(ErrorCode::InvalidArgument, "uri too long", "id " + std::to_string(e.id));
    }
    const Embedding unit = l2_normalize(e.embedding);
    ix.ids_.push_back(e.id);
    ix.uri_rows_.emplace(e.uri, i);
    ix.uris_.push_back(std::move(e.uri));
    ix.matrix_.insert(ix.matrix_.end(), unit.values().begin(), unit.values().end());
  }
  return ix;
}

void save_index(const EmbeddingIndex& ix, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot open index for writing", path.string());

  out.write(kMagic.data(), kMagic.size());
  put<std::uint16_t>(out, kVersion);
  put<std::uint32_t>(out, ix.dim());
  put<std::uint64_t>(out, ix.size());
  for (std::size_t r = 0; r < ix.size(); ++r) {
    const auto& uri = ix.uri_at(r);
    put<std::uint64_t>(out, ix.id_at(r));
    put<std::uint16_t>(out, static_cast<std::uint16_t>(uri.size()));
    out.write(uri.data(), static_cast<std::streamsize>(uri.size()));
    const auto v = ix.vector_at(r);
    out.write(reinterpret_cast<const char*>(v.data()),
              static_cast<std::streamsize>(v.size() * sizeof(float)));
  }
  out.flush();
  if (!out) throw Error(ErrorCode::IoError, "failed writing index", path.string());
}

EmbeddingIndex load_index(const std::filesystem::path& path) {
  const std::string name = path.string();
  std::ifstream in(path, std::ios::binary | std::ios::ate);
  if (!in) throw Error(ErrorCode::IoError, "cannot open index for reading", name);
  const auto size = static_cast<std::size_t>(in.tellg());
  std::vector<char> buf(size);
  in.seekg(0);
  if (!in.read(buf.data(), static_cast<std::streamsize>(size))) {
    throw Error(ErrorCode::IoError, "failed reading index", name);
  }

  Reader rd(buf, name);
  if (std::memcmp(rd.take(kMagic.size()), kMagic.data(), kMagic.size()) != 0) {
    throw Error(ErrorCode::FormatError, "bad magic", name);
  }
  if (rd.get<std::uint16_t>() != kVersion) {
    throw Error(ErrorCode::FormatError, "unsupported index version", name);
  }
  const auto dim = rd.get<std::uint32_t>();
  const auto count = rd.get<std::uint64_t>();
  if (dim == 0) throw Error(ErrorCode::FormatError, "zero dim", name);
  // Each record needs at least 10 + 4*dim bytes; reject absurd counts early.
  if (count > size / (10 + 4ULL * dim)) {
    throw Error(ErrorCode::FormatError, "truncated index file", name);
  }

  EmbeddingIndex ix;
  ix.dim_ = dim;
  ix.ids_.reserve(count);
  ix.uris_.reserve(count);
  ix.matrix_.resize(count * dim);
  for (std::uint64_t r = 0; r < count; ++r) {
    const auto id = rd.get<std::uint64_t>();
    if (r > 0 && id <= ix.ids_.back()) {
      throw Error(ErrorCode::FormatError, "ids not strictly ascending", name);
    }
    const auto uri_len = rd.get<std::uint16_t>();
    std::string uri(rd.take(uri_len), uri_len);
    float* dst = ix.matrix_.data() + r * dim;
    std::memcpy(dst, rd.take(dim * sizeof(float)), dim * sizeof(float));
    double ss = 0.0;
    for (std::uint32_t i = 0; i < dim; ++i) {
      if (!std::isfinite(dst[i])) throw Error(ErrorCode::FormatError, "non-finite component", name);
      ss += static_cast<double>(dst[i]) * dst[i];
    }
    if (std::abs(std::sqrt(ss) - 1.0) > kUnitTolerance) {
      throw Error(ErrorCode::FormatError, "stored embedding is not unit-norm", name);
    }
    ix.ids_.push_back(id);
    ix.uri_rows_.emplace(uri, static_cast<std::size_t>(r));
    ix.uris_.push_back(std::move(uri));
  }
  if (!rd.done()) throw Error(ErrorCode::FormatError, "trailing bytes after last record", name);
  return ix;
}

}  // namespace dar
