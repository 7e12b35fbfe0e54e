// Copyright 2026 The DAR Authors
// SPDX-License-Identifier: Apache-2.0

#include "dar/http_backends.hpp"

#include <chrono>
#include <cmath>
#include <optional>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "dar/base64.hpp"
#include "dar/errors.hpp"

namespace dar {

namespace {

using json = nlohmann::json;
using Clock = std::chrono::steady_clock;

constexpr std::chrono::milliseconds kRetryBackoff{20};

struct Attempt {
  std::optional<std::string> body;  // set on HTTP 200
  std::optional<Error> error;
  bool retry = false;
};

Attempt attempt(const BackendConfig& cfg, const std::string& path, const std::string& payload) {
  httplib::Client client(cfg.endpoint);
  const auto secs = std::chrono::duration_cast<std::chrono::seconds>(cfg.timeout);
  const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(cfg.timeout - secs);
  client.set_connection_timeout(secs.count(), usecs.count());
  client.set_read_timeout(secs.count(), usecs.count());
  client.set_write_timeout(secs.count(), usecs.count());

  const auto start = Clock::now();
  auto res = client.Post(path, payload, "application/json");
  if (!res) {
    const auto err = res.error();
    const auto elapsed = Clock::now() - start;
    const bool timed_out = err == httplib::Error::ConnectionTimeout ||
                           ((err == httplib::Error::Read || err == httplib::Error::Write) &&
                            elapsed >= cfg.timeout * 9 / 10);
    if (timed_out) {
      return {std::nullopt,
              Error(ErrorCode::Timeout, "backend did not answer in time", cfg.endpoint + path),
              true};
    }
    return {std::nullopt,
            Error(ErrorCode::BadStatus, "backend request failed: " + httplib::to_string(err),
                  "status 0 " + cfg.endpoint + path),
            true};
  }
  if (res->status != 200) {
    // Client errors will not change on retry.
    return {std::nullopt,
            Error(ErrorCode::BadStatus, "backend returned HTTP " + std::to_string(res->status),
                  "status " + std::to_string(res->status) + " " + cfg.endpoint + path),
            res->status >= 500};
  }
  return {std::move(res->body), std::nullopt, false};
}

std::string post(const BackendConfig& cfg, const std::string& path, const json& body) {
  const std::string payload = body.dump();
  for (unsigned i = 0;; ++i) {
    Attempt a = attempt(cfg, path, payload);
    if (a.body) return std::move(*a.body);
    if (!a.retry || i >= cfg.retries) throw *a.error;
    std::this_thread::sleep_for(kRetryBackoff * (1u << i));
  }
}

json parse_object(const std::string& body, const BackendConfig& cfg) {
  json j = json::parse(body, nullptr, /*allow_exceptions=*/false);
  if (j.is_discarded() || !j.is_object()) {
    throw Error(ErrorCode::MalformedResponse, "response is not a JSON object", cfg.endpoint);
  }
  return j;
}

Embedding parse_embedding(const std::string& body, const BackendConfig& cfg) {
  const json j = parse_object(body, cfg);
  auto it = j.find("embedding");
  if (it == j.end() || !it->is_array() || it->empty()) {
    throw Error(ErrorCode::MalformedResponse, "missing \"embedding\" array", cfg.endpoint);
  }
  std::vector<float> values;
  values.reserve(it->size());
  for (const auto& x : *it) {
    if (!x.is_number()) {
      throw Error(ErrorCode::MalformedResponse, "embedding has a non-numeric entry", cfg.endpoint);
    }
    const double v = x.get<double>();
    if (!std::isfinite(v)) {
      throw Error(ErrorCode::MalformedResponse, "embedding has a non-finite entry", cfg.endpoint);
    }
    values.push_back(static_cast<float>(v));
  }
  if (values.size() != cfg.dim) {
    throw Error(ErrorCode::DimMismatch, "backend embedding has the wrong dim",
                std::to_string(values.size()) + " vs " + std::to_string(cfg.dim));
  }
  return Embedding(std::move(values));
}

const std::string& string_field(const json& j, const char* key, const BackendConfig& cfg) {
  auto it = j.find(key);
  if (it == j.end() || !it->is_string()) {
    throw Error(ErrorCode::MalformedResponse, std::string("missing string field \"") + key + "\"",
                cfg.endpoint);
  }
  return it->get_ref<const std::string&>();
}

BackendConfig checked(BackendConfig cfg, BackendRole role) {
  cfg.role = role;
  cfg.validate();
  return cfg;
}

}  // namespace

HttpTextEncoder::HttpTextEncoder(BackendConfig cfg)
    : cfg_(checked(std::move(cfg), BackendRole::TextEncoder)) {}

Embedding HttpTextEncoder::encode_text(std::string_view text) const {
  if (text.empty()) throw Error(ErrorCode::InvalidArgument, "text is empty");
  return parse_embedding(post(cfg_, "/v1/encode/text", {{"text", text}}), cfg_);
}

HttpImageEncoder::HttpImageEncoder(BackendConfig cfg)
    : cfg_(checked(std::move(cfg), BackendRole::ImageEncoder)) {}

Embedding HttpImageEncoder::encode_image(const ImageRef& image) const {
  json body;
  if (image.is_inline()) {
    body = {{"image_b64", base64_encode(image.bytes)}, {"media_type", image.media_type}};
  } else {
    body = {{"uri", image.uri}};
  }
  return parse_embedding(post(cfg_, "/v1/encode/image", body), cfg_);
}

HttpLlm::HttpLlm(BackendConfig cfg) : cfg_(checked(std::move(cfg), BackendRole::Llm)) {}

std::string HttpLlm::complete(std::string_view prompt, double temperature, int max_tokens) const {
  if (prompt.empty()) throw Error(ErrorCode::InvalidArgument, "prompt is empty");
  if (temperature < 0.0) throw Error(ErrorCode::InvalidArgument, "temperature must be >= 0");
  const std::string body = post(
      cfg_, "/v1/complete",
      {{"prompt", prompt}, {"temperature", temperature}, {"max_tokens", max_tokens}});
  if (body.find_first_not_of(" \t\r\n") == std::string::npos) {
    throw Error(ErrorCode::EmptyCompletion, "backend returned an empty body", cfg_.endpoint);
  }
  const json j = parse_object(body, cfg_);
  const std::string& text = string_field(j, "text", cfg_);
  if (text.find_first_not_of(" \t\r\n") == std::string::npos) {
    throw Error(ErrorCode::EmptyCompletion, "backend returned empty text", cfg_.endpoint);
  }
  return text;
}

HttpGenerator::HttpGenerator(BackendConfig cfg)
    : cfg_(checked(std::move(cfg), BackendRole::Generator)) {}

ImageRef HttpGenerator::generate_image(const GenerationRequest& request) const {
  request.validate();
  const json j = parse_object(post(cfg_, "/v1/generate",
                                   {{"prompt", request.prompt},
                                    {"seed", request.seed},
                                    {"width", request.width},
                                    {"height", request.height}}),
                              cfg_);
  ImageRef ref;
  if (j.contains("uri")) {
    const auto& uri = string_field(j, "uri", cfg_);
    if (uri.empty()) throw Error(ErrorCode::MalformedResponse, "empty image uri", cfg_.endpoint);
    ref = ImageRef::from_uri(uri);
  } else {
    auto bytes = base64_decode(string_field(j, "image_b64", cfg_));
    if (!bytes || bytes->empty()) {
      throw Error(ErrorCode::MalformedResponse, "image_b64 is not valid base64", cfg_.endpoint);
    }
    ref = ImageRef::from_bytes(std::move(*bytes), string_field(j, "media_type", cfg_));
  }
  ref.provenance = GenerationProvenance{request.prompt, request.seed, 0, 0};
  return ref;
}

}  // namespace dar
