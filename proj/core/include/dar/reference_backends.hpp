// Copyright 2026 The DAR Authors
// SPDX-License-Identifier: Apache-2.0

// Deterministic in-process backends for offline, reproducible runs.
//
// HashEncoder: lowercase the text (ASCII), split it into maximal runs of
// alphanumeric bytes (bytes >= 0x80 count as alphanumeric so UTF-8 words stay
// whole), and for each token add sign(h) to component h mod dim, where
// h = hash64(token, seed) and sign is -1 when bit 63 of h is set. The count
// vector is L2-normalized. Text without any token has no embedding
// (ZeroVector).
//
// EchoGenerator: the "image" is a container that stores the prompt
// losslessly:  "DARECHO1" | u64 seed | u32 width | u32 height | prompt bytes
// (integers little-endian), media type application/x-dar-echo.
//
// EchoImageEncoder: decodes an echo artifact and returns
// normalize(hash_embed(prompt) + sigma * g), where g has i.i.d. N(0, 1/dim)
// components: seeded_gaussian(hash_combine(noise_seed, artifact seed), dim)
// scaled by 1/sqrt(dim). The noise therefore has expected norm sigma relative
// to the unit signal at any dim. sigma == 0 gives exactly hash_embed(prompt).
//
// TemplateLlm: rule-based completer that understands the shipped prompt
// templates (see templates.hpp).

#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "dar/backends.hpp"

namespace dar {

inline constexpr std::string_view kEchoMediaType = "application/x-dar-echo";

std::vector<std::string> hash_tokens(std::string_view text);

/// Unit-norm feature-hash embedding; throws ZeroVector when `text` has no tokens.
Embedding hash_embed(std::string_view text, std::uint32_t dim, std::uint64_t seed = 0);

class HashEncoder final : public TextEncoder {
 public:
  explicit HashEncoder(std::uint32_t dim, std::uint64_t seed = 0) : dim_(dim), seed_(seed) {}
  Embedding encode_text(std::string_view text) const override;
  std::uint32_t dim() const noexcept { return dim_; }

 private:
  std::uint32_t dim_;
  std::uint64_t seed_;
};

struct EchoArtifact {
  std::string prompt;
  std::uint64_t seed = 0;
  std::uint32_t width = 0;
  std::uint32_t height = 0;
};

std::vector<std::uint8_t> encode_echo_artifact(const EchoArtifact& a);
/// Throws InvalidArgument if the bytes are not an echo artifact.
EchoArtifact decode_echo_artifact(std::span<const std::uint8_t> bytes);

class EchoGenerator final : public ImageGenerator {
 public:
  ImageRef generate_image(const GenerationRequest& request) const override;
};

class EchoImageEncoder final : public ImageEncoder {
 public:
  EchoImageEncoder(std::uint32_t dim, double sigma, std::uint64_t hash_seed = 0,
                   std::uint64_t noise_seed = 0)
      : dim_(dim), sigma_(sigma), hash_seed_(hash_seed), noise_seed_(noise_seed) {}

  /// Accepts inline echo artifacts only; anything else is InvalidArgument.
  Embedding encode_image(const ImageRef& image) const override;

 private:
  std::uint32_t dim_;
  double sigma_;
  std::uint64_t hash_seed_;
  std::uint64_t noise_seed_;
};

/// Rules, keyed on the section markers of the shipped templates:
///   refinement prompt  -> initial query followed by every non-empty answer,
///                         joined with ", "
///   diffusion prompt   -> "<adjective for variation k> <refined query>. Style: photorealistic."
///   questioner prompt  -> a fixed question chosen by the number of turns so far
///   anything else      -> the first non-empty line of the prompt
/// Temperature is ignored; output depends on the prompt only.
class TemplateLlm final : public LlmCompleter {
 public:
  std::string complete(std::string_view prompt, double temperature,
                       int max_tokens = 256) const override;
};

/// HashEncoder + EchoImageEncoder + TemplateLlm + EchoGenerator.
Backends make_reference_backends(std::uint32_t dim, double sigma, std::uint64_t hash_seed = 0,
                                 std::uint64_t noise_seed = 0);

}  // namespace dar
