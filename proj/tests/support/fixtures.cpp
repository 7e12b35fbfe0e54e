// Copyright 2026 The DAR Authors
// SPDX-License-Identifier: Apache-2.0

#include "fixtures.hpp"

namespace dar::testing {

std::vector<Caption> scene_captions() {
  const char* texts[] = {
      "a red bus parked on a city street at night",
      "a brown dog catching a frisbee in a park",
      "two people riding horses on a sandy beach",
      "a bowl of fruit on a wooden kitchen table",
      "a snowy mountain with a small wooden cabin",
      "a black cat sleeping on a windowsill",
      "a yellow taxi driving through heavy rain",
      "a child flying a kite in a green field",
      "a white sailboat on a calm blue lake",
      "a plate of pasta with tomato sauce",
      "a giraffe eating leaves from a tall tree",
      "a man riding a bicycle across a bridge at sunset",
  };
  std::vector<Caption> out;
  for (ImageId i = 0; i < 12; ++i) out.push_back({i, "img/" + std::to_string(i) + ".dar", texts[i]});
  return out;
}

std::shared_ptr<const EmbeddingIndex> scene_index(const Backends& backends, std::uint32_t dim) {
  const auto caps = scene_captions();
  return std::make_shared<const EmbeddingIndex>(build_caption_index(dim, caps, backends));
}

}  // namespace dar::testing
