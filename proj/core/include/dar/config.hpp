// Copyright 2026 The DAR Authors
// SPDX-License-Identifier: Apache-2.0

// Application configuration file shared by the CLI and the service.
//
//   {
//     "dim": 512,
//     "index": "corpus.idx",
//     "templates_dir": "templates",
//     "session": { "K": 3, "T": 10, ... },
//     "backends": {
//       "reference": { "sigma": 0.1, "hash_seed": 0, "noise_seed": 0 },
//       "text_encoder": { "endpoint": "http://host:port", "timeout_ms": 30000, "retries": 2 },
//       "image_encoder": {...}, "llm": {...}, "generator": {...}
//     },
//     "service": { "host": "127.0.0.1", "port": 8080, "static_dir": "ui",
//                  "asset_dir": "assets", "demo_mode": false, "snapshot_dir": "" }
//   }
//
// Every key is optional. A backend role without an entry uses the in-process
// reference backend. Relative paths resolve against the config file's
// directory. Unknown keys are rejected.

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>

#include <nlohmann/json_fwd.hpp>

#include "dar/backends.hpp"
#include "dar/session.hpp"

namespace dar {

struct ReferenceOptions {
  double sigma = 0.1;
  std::uint64_t hash_seed = 0;
  std::uint64_t noise_seed = 0;
};

struct ServiceOptions {
  std::string host = "127.0.0.1";
  int port = 8080;
  std::filesystem::path static_dir;
  std::filesystem::path asset_dir;
  bool demo_mode = false;
  std::filesystem::path snapshot_dir;
};

struct AppConfig {
  std::uint32_t dim = 512;
  std::filesystem::path index;
  std::filesystem::path templates_dir;
  SessionConfig session;
  ReferenceOptions reference;
  std::map<BackendRole, BackendConfig> http;
  ServiceOptions service;
};

/// Throws InvalidArgument.
AppConfig parse_app_config(const nlohmann::json& j, const std::filesystem::path& base_dir = {});
/// Throws IoError, FormatError, InvalidArgument.
AppConfig load_app_config(const std::filesystem::path& path);

/// Applies DAR_PORT and DAR_INDEX when set. Throws InvalidArgument.
void apply_env_overrides(AppConfig& cfg);

/// Loads templates_dir into cfg.session when set.
SessionConfig resolved_session_config(const AppConfig& cfg);

Backends make_backends(const AppConfig& cfg);

}  // namespace dar
