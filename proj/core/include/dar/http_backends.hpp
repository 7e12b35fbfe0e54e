// Copyright 2026 The DAR Authors
// SPDX-License-Identifier: Apache-2.0

// JSON-over-HTTP clients for a model server exposing
//   POST /v1/encode/text   {"text"}                              -> {"embedding": [f]}
//   POST /v1/encode/image  {"image_b64","media_type"} | {"uri"}  -> {"embedding": [f]}
//   POST /v1/complete      {"prompt","temperature","max_tokens"} -> {"text"}
//   POST /v1/generate      {"prompt","seed","width","height"}    -> {"image_b64","media_type"} | {"uri"}
//
// Timeouts and 5xx responses are retried up to `retries` extra times; 4xx,
// malformed bodies and dim mismatches fail immediately. A connection that
// cannot be established is reported as BadStatus with HTTP status 0.

#pragma once

#include "dar/backends.hpp"

namespace dar {

class HttpTextEncoder final : public TextEncoder {
 public:
  explicit HttpTextEncoder(BackendConfig cfg);
  Embedding encode_text(std::string_view text) const override;

 private:
  BackendConfig cfg_;
};

class HttpImageEncoder final : public ImageEncoder {
 public:
  explicit HttpImageEncoder(BackendConfig cfg);
  Embedding encode_image(const ImageRef& image) const override;

 private:
  BackendConfig cfg_;
};

class HttpLlm final : public LlmCompleter {
 public:
  explicit HttpLlm(BackendConfig cfg);
  std::string complete(std::string_view prompt, double temperature,
                       int max_tokens = 256) const override;

 private:
  BackendConfig cfg_;
};

class HttpGenerator final : public ImageGenerator {
 public:
  explicit HttpGenerator(BackendConfig cfg);
  ImageRef generate_image(const GenerationRequest& request) const override;

 private:
  BackendConfig cfg_;
};

}  // namespace dar
