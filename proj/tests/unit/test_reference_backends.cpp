// Copyright 2026 The DAR Authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>

#include <gtest/gtest.h>

#include "dar/hashing.hpp"
#include "dar/reference_backends.hpp"
#include "dar/reformulate.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

namespace dar {
namespace {

using testing::expect_code;

using testing::oracle_hash_embed;

TEST(HashEncoder, MatchesOracle) {
  for (const char* text : {"red car", "A Red CAR!", "two dogs, one frisbee", "caf\xc3\xa9 au lait",
                           "x", "the the the the"}) {
    for (std::uint32_t dim : {8u, 64u, 512u}) {
      const auto e = HashEncoder(dim, 3).encode_text(text);
      const auto o = oracle_hash_embed(text, dim, 3);
      for (std::size_t i = 0; i < dim; ++i) ASSERT_NEAR(e[i], o[i], 1e-7) << text;
      EXPECT_NEAR(e.norm(), 1.0, 1e-6);
      EXPECT_EQ(e.dim(), dim);
    }
  }
}

TEST(HashEncoder, DeterministicAndCaseInsensitive) {
  const HashEncoder enc(64);
  EXPECT_EQ(enc.encode_text("red car"), enc.encode_text("red car"));
  EXPECT_EQ(enc.encode_text("red car"), enc.encode_text("RED, car."));
  EXPECT_NE(enc.encode_text("red car"), HashEncoder(64, 1).encode_text("red car"));
}

TEST(HashEncoder, NoTokens) {
  expect_code(ErrorCode::ZeroVector, [] { HashEncoder(16).encode_text("?! ..."); });
  expect_code(ErrorCode::InvalidArgument, [] { HashEncoder(16).encode_text(""); });
}

TEST(HashEncoder, Tokens) {
  EXPECT_EQ(hash_tokens("Soft-lit, 3D photo!"),
            (std::vector<std::string>{"soft", "lit", "3d", "photo"}));
}

TEST(EchoGenerator, DeterministicAndLossless) {
  const EchoGenerator gen;
  const auto a = gen.generate_image({"a dog", 1, 512, 512});
  const auto b = gen.generate_image({"a dog", 1, 512, 512});
  EXPECT_EQ(a.bytes, b.bytes);
  EXPECT_EQ(a.media_type, kEchoMediaType);
  ASSERT_TRUE(a.provenance.has_value());
  EXPECT_EQ(a.provenance->prompt, "a dog");
  EXPECT_EQ(a.provenance->seed, 1u);
  for (const std::string& p : {std::string("a dog"), std::string("\xe7\x8c\xab on a mat"), std::string("nul\0byte", 8)}) {
    const auto img = gen.generate_image({p, 77, 64, 32});
    const auto art = decode_echo_artifact(img.bytes);
    EXPECT_EQ(art.prompt, p);
    EXPECT_EQ(art.seed, 77u);
    EXPECT_EQ(art.width, 64u);
    EXPECT_EQ(art.height, 32u);
  }
  expect_code(ErrorCode::InvalidArgument, [&] { gen.generate_image({"", 1, 512, 512}); });
  expect_code(ErrorCode::InvalidArgument, [&] { gen.generate_image({"x", 1, 0, 512}); });
}

TEST(EchoImageEncoder, ZeroNoiseClosesTheLoop) {
  const EchoGenerator gen;
  for (const char* p : {"a red car", "a brown dog catching a frisbee"}) {
    const auto img = gen.generate_image({p, 5, 512, 512});
    EXPECT_EQ(EchoImageEncoder(128, 0.0).encode_image(img), HashEncoder(128).encode_text(p));
  }
}

TEST(EchoImageEncoder, NoisyMatchesOracle) {
  const EchoGenerator gen;
  const std::uint32_t dim = 256;
  const double sigma = 0.1;
  const auto img = gen.generate_image({"a red car on a bridge", 42, 512, 512});
  const auto e = EchoImageEncoder(dim, sigma, 0, 9).encode_image(img);

  const auto clean = oracle_hash_embed("a red car on a bridge", dim, 0);
  const auto noise = seeded_gaussian(hash_combine(9, 42), dim);
  std::vector<long double> v(dim);
  for (std::size_t i = 0; i < dim; ++i) {
    v[i] = clean[i] + sigma / std::sqrt(static_cast<long double>(dim)) * noise[i];
  }
  const auto o = testing::oracle_normalize(v);
  for (std::size_t i = 0; i < dim; ++i) ASSERT_NEAR(e[i], o[i], 1e-6);

  EXPECT_EQ(e, EchoImageEncoder(dim, sigma, 0, 9).encode_image(img));
  EXPECT_NE(e, EchoImageEncoder(dim, sigma, 0, 10).encode_image(img));
  // Noise of expected norm sigma leaves the signal dominant.
  EXPECT_GT(cosine_similarity(e, HashEncoder(dim).encode_text("a red car on a bridge")), 0.98);
}

TEST(EchoImageEncoder, RejectsForeignImages) {
  const EchoImageEncoder enc(16, 0.1);
  expect_code(ErrorCode::InvalidArgument, [&] { enc.encode_image(ImageRef::from_uri("http://x/y.png")); });
  expect_code(ErrorCode::InvalidArgument,
              [&] { enc.encode_image(ImageRef::from_bytes({1, 2, 3}, "image/png")); });
  expect_code(ErrorCode::InvalidArgument,
              [&] { enc.encode_image(ImageRef::from_bytes({1, 2, 3}, std::string(kEchoMediaType))); });
}

DialogueContext sample_context() {
  return {"a dog in a park",
          {{"what color is the dog?", "brown"}, {"is it playing?", ""}, {"with what?", "a frisbee"}}};
}

TEST(TemplateLlm, RefinementRule) {
  const TemplateLlm llm;
  EXPECT_EQ(llm.complete(build_r1_prompt(sample_context()), 0.0),
            "a dog in a park, brown, a frisbee");
  EXPECT_EQ(llm.complete(build_r1_prompt({"a red car", {}}), 0.0), "a red car");
}

TEST(TemplateLlm, DiffusionRule) {
  const TemplateLlm llm;
  const RefinedQuery s{"a dog in a park, brown.", 2, RefineMethod::R1};
  const char* adjectives[] = {"detailed", "vivid", "natural", "candid",
                              "cinematic", "bright", "soft-lit", "sharp"};
  for (unsigned k = 1; k <= 10; ++k) {
    std::string adj = adjectives[(k - 1) % 8];
    if (k > 8) adj += "-" + std::to_string(k);
    EXPECT_EQ(llm.complete(build_r2_prompt(s, k, 10), 0.7),
              adj + " a dog in a park, brown. Style: photorealistic.");
  }
}

TEST(TemplateLlm, QuestionRuleDeterministic) {
  const TemplateLlm llm;
  const auto q0 = llm.complete(build_question_prompt({"a dog", {}}), 0.0);
  const auto q1 = llm.complete(build_question_prompt({"a dog", {{"q", "a"}}}), 0.0);
  EXPECT_EQ(q0, "What is the main subject doing?");
  EXPECT_EQ(q1, "What colors stand out in the image?");
  EXPECT_EQ(q0, llm.complete(build_question_prompt({"a dog", {}}), 0.0));
}

TEST(TemplateLlm, FallbackAndEmpty) {
  const TemplateLlm llm;
  EXPECT_EQ(llm.complete("\n  \nhello there\nmore", 0.0), "hello there");
  expect_code(ErrorCode::EmptyCompletion, [&] { llm.complete(" \n ", 0.0); });
}

TEST(ReferenceBackends, Bundle) {
  const auto b = make_reference_backends(32, 0.0);
  ASSERT_TRUE(b.text && b.image && b.llm && b.generator);
  const auto img = b.generator->generate_image({"a cat", 3, 512, 512});
  EXPECT_EQ(b.image->encode_image(img), b.text->encode_text("a cat"));
}

}  // namespace
}  // namespace dar
