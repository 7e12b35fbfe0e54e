// Copyright 2026 The DAR Authors
// SPDX-License-Identifier: Apache-2.0

// HTTP front door: sessions, rankings, generated-image provenance, corpus
// assets and the static UI bundle. All routes live under /api; errors use
// the envelope {"code", "message", "detail"}.
//
//   POST /api/sessions                              {"d0", "config_overrides"?, "target_id"?}
//   GET  /api/sessions/{id}
//   POST /api/sessions/{id}/turns                   {"answer", "question"?}
//   GET  /api/sessions/{id}/question
//   GET  /api/sessions/{id}/ranking?k=10
//   GET  /api/sessions/{id}/turns/{t}/generated
//   GET  /api/sessions/{id}/turns/{t}/generated/{k}/image
//   POST /api/sessions/{id}/accept                  {"image_id"}
//   GET  /api/corpus/images/{id}
//   GET  /api/health
//
// "target_id" is only accepted in demo mode, where turn summaries also carry
// the target's rank. Requests on one session are serialized; different
// sessions proceed in parallel.

#pragma once

#include <memory>
#include <string>

#include "dar/backends.hpp"
#include "dar/config.hpp"
#include "dar/errors.hpp"
#include "dar/index.hpp"

namespace dar {

/// HTTP status for an error code: 400, 404, 409, 502 or 500.
int http_status(ErrorCode code);

class Service {
 public:
  /// Throws InvalidArgument when the index dim differs from cfg.dim.
  Service(AppConfig cfg, std::shared_ptr<const EmbeddingIndex> index, Backends backends);
  ~Service();
  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  /// Binds cfg.service.host:port; port 0 picks a free port. Returns the
  /// bound port. Throws IoError.
  int bind();
  /// Serves until stop(); in-flight requests finish first.
  void run();
  /// Safe to call from any thread.
  void stop();

  std::size_t session_count() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace dar
