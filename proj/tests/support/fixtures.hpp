// Copyright 2026 The DAR Authors
// SPDX-License-Identifier: Apache-2.0

// Small shared corpora and fault-injecting backends.

#pragma once

#include <atomic>
#include <functional>
#include <memory>

#include "dar/backends.hpp"
#include "dar/corpus.hpp"
#include "dar/errors.hpp"
#include "dar/index.hpp"

namespace dar::testing {

/// Twelve everyday-scene captions, ids 0..11, indexed through `backends`.
std::vector<Caption> scene_captions();
std::shared_ptr<const EmbeddingIndex> scene_index(const Backends& backends, std::uint32_t dim);

class FailingGenerator final : public ImageGenerator {
 public:
  /// Without an inner generator or predicate every request fails; otherwise
  /// requests matching `fail_if` fail and the rest go to `inner`.
  explicit FailingGenerator(std::shared_ptr<const ImageGenerator> inner = nullptr,
                            std::function<bool(const GenerationRequest&)> fail_if = {})
      : inner_(std::move(inner)), fail_if_(std::move(fail_if)) {}
  ImageRef generate_image(const GenerationRequest& r) const override {
    if (!inner_ || !fail_if_ || fail_if_(r)) {
      calls_++;
      throw Error(ErrorCode::BadStatus, "generator down", "status 503");
    }
    return inner_->generate_image(r);
  }
  mutable std::atomic<int> calls_{0};

 private:
  std::shared_ptr<const ImageGenerator> inner_;
  std::function<bool(const GenerationRequest&)> fail_if_;
};

class FailingLlmBackend final : public LlmCompleter {
 public:
  std::string complete(std::string_view, double, int) const override {
    throw Error(ErrorCode::Timeout, "llm unavailable");
  }
};

class FailingTextEncoder final : public TextEncoder {
 public:
  Embedding encode_text(std::string_view) const override {
    throw Error(ErrorCode::Timeout, "encoder unavailable");
  }
};

}  // namespace dar::testing
