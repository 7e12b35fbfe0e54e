// Copyright 2026 The DAR Authors
// SPDX-License-Identifier: Apache-2.0

#include "dar/backends.hpp"

#include <string>

#include "dar/errors.hpp"

namespace dar {

std::string_view to_string(BackendRole role) {
  switch (role) {
    case BackendRole::TextEncoder: return "text_encoder";
    case BackendRole::ImageEncoder: return "image_encoder";
    case BackendRole::Llm: return "llm";
    case BackendRole::Generator: return "generator";
  }
  return "unknown";
}

BackendRole parse_backend_role(std::string_view s) {
  if (s == "text_encoder") return BackendRole::TextEncoder;
  if (s == "image_encoder") return BackendRole::ImageEncoder;
  if (s == "llm") return BackendRole::Llm;
  if (s == "generator") return BackendRole::Generator;
  throw Error(ErrorCode::InvalidArgument, "unknown backend role", std::string(s));
}

void BackendConfig::validate() const {
  if (endpoint.empty()) {
    throw Error(ErrorCode::InvalidArgument, "backend endpoint is empty",
                std::string(to_string(role)));
  }
  if (endpoint.rfind("http://", 0) != 0) {
    throw Error(ErrorCode::InvalidArgument, "backend endpoint must be an http:// URL", endpoint);
  }
  if (timeout.count() <= 0) {
    throw Error(ErrorCode::InvalidArgument, "backend timeout must be positive");
  }
  if (retries > 5) throw Error(ErrorCode::InvalidArgument, "backend retries must be <= 5");
  const bool encoder = role == BackendRole::TextEncoder || role == BackendRole::ImageEncoder;
  if (encoder && dim == 0) {
    throw Error(ErrorCode::InvalidArgument, "encoder backend needs an expected dim");
  }
}

ImageRef ImageRef::from_bytes(std::vector<std::uint8_t> bytes, std::string media_type) {
  if (bytes.empty()) throw Error(ErrorCode::InvalidArgument, "inline image has no bytes");
  ImageRef r;
  r.bytes = std::move(bytes);
  r.media_type = std::move(media_type);
  return r;
}

ImageRef ImageRef::from_uri(std::string uri) {
  if (uri.empty()) throw Error(ErrorCode::InvalidArgument, "image uri is empty");
  ImageRef r;
  r.uri = std::move(uri);
  return r;
}

void GenerationRequest::validate() const {
  if (prompt.empty()) throw Error(ErrorCode::InvalidArgument, "generation prompt is empty");
  if (width == 0 || height == 0) {
    throw Error(ErrorCode::InvalidArgument, "generation size must be positive");
  }
}

}  // namespace dar
