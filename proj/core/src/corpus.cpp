// Copyright 2026 The DAR Authors
// SPDX-License-Identifier: Apache-2.0

#include "dar/corpus.hpp"

#include "dar/errors.hpp"

namespace dar {

Embedding embed_caption(const Backends& backends, const Caption& caption, ImageRef* image_out) {
  if (!backends.generator || !backends.image) {
    throw Error(ErrorCode::InvalidArgument, "caption corpora need a generator and an image encoder");
  }
  ImageRef image = backends.generator->generate_image(
      {caption.text, caption.id, kCorpusImageSize, kCorpusImageSize});
  Embedding e = backends.image->encode_image(image);
  if (image_out) *image_out = std::move(image);
  return e;
}

EmbeddingIndex build_caption_index(std::uint32_t dim, std::span<const Caption> captions,
                                   const Backends& backends,
                                   const std::function<void(Caption&, const ImageRef&)>& on_image) {
  std::vector<CorpusEntry> entries;
  entries.reserve(captions.size());
  for (const auto& c : captions) {
    Caption cur = c;
    ImageRef image;
    Embedding e = embed_caption(backends, cur, &image);
    if (on_image) on_image(cur, image);
    if (cur.uri.empty()) cur.uri = "img/" + std::to_string(cur.id) + ".dar";
    entries.push_back({cur.id, std::move(cur.uri), std::move(e)});
  }
  return build_index(dim, std::move(entries));
}

}  // namespace dar
