// Copyright 2026 The DAR Authors
// SPDX-License-Identifier: Apache-2.0

// The four external model roles used by a retrieval session: text encoder,
// image encoder, LLM completer and image generator. Implementations must be
// safe to call concurrently; all calls report failures by throwing
// dar::Error with a backend error code (Timeout, BadStatus, DimMismatch,
// MalformedResponse, EmptyCompletion).

#pragma once

#include <chrono>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dar/embedding.hpp"

namespace dar {

enum class BackendRole { TextEncoder, ImageEncoder, Llm, Generator };

std::string_view to_string(BackendRole role);
BackendRole parse_backend_role(std::string_view s);

struct BackendConfig {
  BackendRole role = BackendRole::TextEncoder;
  std::string endpoint;  // http://host:port (no TLS)
  std::chrono::milliseconds timeout{30000};
  unsigned retries = 2;  // extra attempts after the first, at most 5
  std::uint32_t dim = 0;  // expected embedding dim for encoder roles

  /// Throws InvalidArgument.
  void validate() const;
};

struct GenerationProvenance {
  std::string prompt;
  std::uint64_t seed = 0;
  unsigned turn = 0;
  unsigned k = 0;

  friend bool operator==(const GenerationProvenance&, const GenerationProvenance&) = default;
};

/// Either inline bytes (with media type) or a URI, never both.
struct ImageRef {
  std::vector<std::uint8_t> bytes;
  std::string media_type;
  std::string uri;
  std::optional<GenerationProvenance> provenance;

  static ImageRef from_bytes(std::vector<std::uint8_t> bytes, std::string media_type);
  static ImageRef from_uri(std::string uri);

  bool is_inline() const noexcept { return uri.empty(); }

  friend bool operator==(const ImageRef&, const ImageRef&) = default;
};

struct GenerationRequest {
  std::string prompt;
  std::uint64_t seed = 0;
  std::uint32_t width = 512;
  std::uint32_t height = 512;

  /// Throws InvalidArgument.
  void validate() const;
};

class TextEncoder {
 public:
  virtual ~TextEncoder() = default;
  virtual Embedding encode_text(std::string_view text) const = 0;
};

class ImageEncoder {
 public:
  virtual ~ImageEncoder() = default;
  virtual Embedding encode_image(const ImageRef& image) const = 0;
};

class LlmCompleter {
 public:
  virtual ~LlmCompleter() = default;
  virtual std::string complete(std::string_view prompt, double temperature,
                               int max_tokens = 256) const = 0;
};

class ImageGenerator {
 public:
  virtual ~ImageGenerator() = default;
  virtual ImageRef generate_image(const GenerationRequest& request) const = 0;
};

struct Backends {
  std::shared_ptr<const TextEncoder> text;
  std::shared_ptr<const ImageEncoder> image;
  std::shared_ptr<const LlmCompleter> llm;
  std::shared_ptr<const ImageGenerator> generator;
};

}  // namespace dar
