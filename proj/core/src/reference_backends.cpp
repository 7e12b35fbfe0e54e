// Copyright 2026 The DAR Authors
// SPDX-License-Identifier: Apache-2.0

#include "dar/reference_backends.hpp"

#include <array>
#include <cmath>
#include <cstring>
#include <sstream>

#include "dar/errors.hpp"
#include "dar/hashing.hpp"
#include "dar/templates.hpp"

namespace dar {

namespace {

constexpr std::array<char, 8> kEchoMagic = {'D', 'A', 'R', 'E', 'C', 'H', 'O', '1'};
constexpr std::size_t kEchoHeader = 8 + 8 + 4 + 4;

bool is_token_byte(unsigned char c) {
  return (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c >= 0x80;
}

template <typename T>
void append_le(std::vector<std::uint8_t>& out, T v) {
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
}

template <typename T>
T read_le(const std::uint8_t* p) {
  T v = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) v |= static_cast<T>(p[i]) << (8 * i);
  return v;
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

bool starts_with(std::string_view s, std::string_view p) { return s.substr(0, p.size()) == p; }

std::vector<std::string> lines_of(std::string_view text) {
  std::vector<std::string> out;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) out.push_back(trim(line));
  return out;
}

// Lines of the section that starts right after `header`, up to the first
// blank line.
std::vector<std::string> section(const std::vector<std::string>& lines, std::string_view header) {
  std::vector<std::string> out;
  bool in = false;
  for (const auto& l : lines) {
    if (!in) {
      in = l == header;
      continue;
    }
    if (l.empty()) {
      if (out.empty()) continue;
      break;
    }
    out.push_back(l);
  }
  return out;
}

// The dialogue section may contain blank lines between turns; it ends at the
// first line that is not part of a turn block.
std::vector<std::string> dialogue_lines(const std::vector<std::string>& lines) {
  std::vector<std::string> out;
  bool in = false;
  for (const auto& l : lines) {
    if (!in) {
      in = l == kDialogueSection;
      continue;
    }
    if (l.empty()) continue;
    if (starts_with(l, "Turn ") || starts_with(l, "Q:") || starts_with(l, "A:") ||
        l == kNoTurnsText) {
      out.push_back(l);
    } else {
      break;
    }
  }
  return out;
}

std::string join(const std::vector<std::string>& parts, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i > 0) out += sep;
    out += parts[i];
  }
  return out;
}

std::string refine_rule(const std::vector<std::string>& lines) {
  std::vector<std::string> parts;
  const auto initial = section(lines, kInitialQuerySection);
  if (!initial.empty()) parts.push_back(join(initial, " "));
  for (const auto& l : dialogue_lines(lines)) {
    if (starts_with(l, "A:")) {
      auto answer = trim(std::string_view(l).substr(2));
      if (!answer.empty()) parts.push_back(std::move(answer));
    }
  }
  return join(parts, ", ");
}

constexpr std::array<std::string_view, 8> kAdjectives = {
    "detailed", "vivid", "natural", "candid", "cinematic", "bright", "soft-lit", "sharp"};

unsigned variation_index(std::string_view prompt) {
  constexpr std::string_view tag = "[Variation ";
  const auto pos = prompt.find(tag);
  if (pos == std::string_view::npos) return 1;
  unsigned n = 0;
  for (std::size_t i = pos + tag.size(); i < prompt.size() && std::isdigit(static_cast<unsigned char>(prompt[i])); ++i) {
    n = n * 10 + static_cast<unsigned>(prompt[i] - '0');
  }
  return n == 0 ? 1 : n;
}

std::string diffusion_rule(std::string_view prompt, const std::vector<std::string>& lines) {
  const auto query = join(section(lines, kRefinedQuerySection), " ");
  const unsigned k = variation_index(prompt);
  std::string adjective(kAdjectives[(k - 1) % kAdjectives.size()]);
  if (k > kAdjectives.size()) adjective += "-" + std::to_string(k);
  std::string body = query;
  while (!body.empty() && (body.back() == '.' || body.back() == ' ')) body.pop_back();
  return adjective + " " + body + ". Style: photorealistic.";
}

constexpr std::array<std::string_view, 10> kQuestions = {
    "What is the main subject doing?",
    "What colors stand out in the image?",
    "Where was the photo taken?",
    "Are there any people in the image?",
    "What is in the background?",
    "Is it indoors or outdoors?",
    "What time of day does it appear to be?",
    "Are there any animals or vehicles?",
    "What objects are near the main subject?",
    "Is there any text or signage visible?",
};

std::string question_rule(const std::vector<std::string>& lines) {
  std::size_t turns = 0;
  for (const auto& l : dialogue_lines(lines)) {
    if (starts_with(l, "Turn ")) ++turns;
  }
  return std::string(kQuestions[turns % kQuestions.size()]);
}

}  // namespace

std::vector<std::string> hash_tokens(std::string_view text) {
  std::vector<std::string> tokens;
  std::string cur;
  for (char ch : text) {
    auto c = static_cast<unsigned char>(ch);
    if (c >= 'A' && c <= 'Z') c = static_cast<unsigned char>(c - 'A' + 'a');
    if (is_token_byte(c)) {
      cur.push_back(static_cast<char>(c));
    } else if (!cur.empty()) {
      tokens.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) tokens.push_back(std::move(cur));
  return tokens;
}

Embedding hash_embed(std::string_view text, std::uint32_t dim, std::uint64_t seed) {
  if (dim == 0) throw Error(ErrorCode::InvalidArgument, "hash embedding dim must be positive");
  std::vector<double> counts(dim, 0.0);
  for (const auto& tok : hash_tokens(text)) {
    const std::uint64_t h = hash64(tok, seed);
    counts[h % dim] += (h >> 63) ? -1.0 : 1.0;
  }
  double ss = 0.0;
  for (double c : counts) ss += c * c;
  if (ss == 0.0) throw Error(ErrorCode::ZeroVector, "text has no hashable tokens");
  const double n = std::sqrt(ss);
  for (double& c : counts) c /= n;
  return Embedding::from_doubles(counts);
}

Embedding HashEncoder::encode_text(std::string_view text) const {
  if (text.empty()) throw Error(ErrorCode::InvalidArgument, "text is empty");
  return hash_embed(text, dim_, seed_);
}

std::vector<std::uint8_t> encode_echo_artifact(const EchoArtifact& a) {
  std::vector<std::uint8_t> out(kEchoMagic.begin(), kEchoMagic.end());
  out.reserve(kEchoHeader + a.prompt.size());
  append_le<std::uint64_t>(out, a.seed);
  append_le<std::uint32_t>(out, a.width);
  append_le<std::uint32_t>(out, a.height);
  out.insert(out.end(), a.prompt.begin(), a.prompt.end());
  return out;
}

EchoArtifact decode_echo_artifact(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < kEchoHeader ||
      std::memcmp(bytes.data(), kEchoMagic.data(), kEchoMagic.size()) != 0) {
    throw Error(ErrorCode::InvalidArgument, "not an echo artifact");
  }
  EchoArtifact a;
  a.seed = read_le<std::uint64_t>(bytes.data() + 8);
  a.width = read_le<std::uint32_t>(bytes.data() + 16);
  a.height = read_le<std::uint32_t>(bytes.data() + 20);
  a.prompt.assign(reinterpret_cast<const char*>(bytes.data()) + kEchoHeader,
                  bytes.size() - kEchoHeader);
  return a;
}

ImageRef EchoGenerator::generate_image(const GenerationRequest& request) const {
  request.validate();
  auto ref = ImageRef::from_bytes(
      encode_echo_artifact({request.prompt, request.seed, request.width, request.height}),
      std::string(kEchoMediaType));
  ref.provenance = GenerationProvenance{request.prompt, request.seed, 0, 0};
  return ref;
}

Embedding EchoImageEncoder::encode_image(const ImageRef& image) const {
  if (!image.is_inline() || image.media_type != kEchoMediaType) {
    throw Error(ErrorCode::InvalidArgument, "echo encoder only reads inline echo artifacts");
  }
  const auto artifact = decode_echo_artifact(image.bytes);
  Embedding clean = hash_embed(artifact.prompt, dim_, hash_seed_);
  if (sigma_ == 0.0) return clean;

  const auto noise = seeded_gaussian(hash_combine(noise_seed_, artifact.seed), dim_);
  const double scale = sigma_ / std::sqrt(static_cast<double>(dim_));
  std::vector<double> v(dim_);
  for (std::size_t i = 0; i < dim_; ++i) v[i] = static_cast<double>(clean[i]) + scale * noise[i];
  double ss = 0.0;
  for (double x : v) ss += x * x;
  const double n = std::sqrt(ss);
  if (n < 1e-12) throw Error(ErrorCode::ZeroVector, "noisy echo embedding vanished");
  for (double& x : v) x /= n;
  return Embedding::from_doubles(v);
}

std::string TemplateLlm::complete(std::string_view prompt, double, int) const {
  const auto lines = lines_of(prompt);
  std::string out;
  if (prompt.find(kNewQueryMarker) != std::string_view::npos) {
    out = refine_rule(lines);
  } else if (prompt.find(kDiffusionPromptMarker) != std::string_view::npos) {
    out = diffusion_rule(prompt, lines);
  } else if (prompt.find(kNextQuestionMarker) != std::string_view::npos) {
    out = question_rule(lines);
  } else {
    for (const auto& l : lines) {
      if (!l.empty()) {
        out = l;
        break;
      }
    }
  }
  if (out.empty()) throw Error(ErrorCode::EmptyCompletion, "template llm produced no text");
  return out;
}

Backends make_reference_backends(std::uint32_t dim, double sigma, std::uint64_t hash_seed,
                                 std::uint64_t noise_seed) {
  Backends b;
  b.text = std::make_shared<HashEncoder>(dim, hash_seed);
  b.image = std::make_shared<EchoImageEncoder>(dim, sigma, hash_seed, noise_seed);
  b.llm = std::make_shared<TemplateLlm>();
  b.generator = std::make_shared<EchoGenerator>();
  return b;
}

}  // namespace dar
