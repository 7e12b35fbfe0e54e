// Copyright 2026 The DAR Authors
// SPDX-License-Identifier: Apache-2.0

// Caption-derived corpora: each caption is rendered by the configured
// generator (seed = image id) and the result is encoded by the image
// encoder, so corpus vectors live in the same space as generated images.

#pragma once

#include <functional>
#include <span>
#include <string>

#include "dar/backends.hpp"
#include "dar/index.hpp"

namespace dar {

struct Caption {
  ImageId id = 0;
  std::string uri;
  std::string text;
};

inline constexpr std::uint32_t kCorpusImageSize = 512;

/// Generates and encodes one caption image.
Embedding embed_caption(const Backends& backends, const Caption& caption,
                        ImageRef* image_out = nullptr);

/// Captions without a uri get "img/<id>.dar". `on_image` sees every
/// generated image and may rewrite the caption's uri (e.g. after saving the
/// asset). Throws what the
/// backends or build_index throw.
EmbeddingIndex build_caption_index(
    std::uint32_t dim, std::span<const Caption> captions, const Backends& backends,
    const std::function<void(Caption&, const ImageRef&)>& on_image = {});

}  // namespace dar
