// Copyright 2026 The DAR Authors
// SPDX-License-Identifier: Apache-2.0

#include "dar/config.hpp"

#include <cstdlib>
#include <fstream>
#include <initializer_list>
#include <memory>

#include <nlohmann/json.hpp>

#include "json_util.hpp"
#include "dar/errors.hpp"
#include "dar/http_backends.hpp"
#include "dar/reference_backends.hpp"
#include "dar/templates.hpp"

namespace dar {

namespace {

using json = nlohmann::json;

void check_keys(const json& j, std::string_view where, std::initializer_list<std::string_view> keys) {
  if (!j.is_object()) throw Error(ErrorCode::InvalidArgument, "expected an object", std::string(where));
  for (const auto& [k, v] : j.items()) {
    bool known = false;
    for (auto key : keys) known = known || key == k;
    if (!known) {
      throw Error(ErrorCode::InvalidArgument, "unknown config key", std::string(where) + "." + k);
    }
  }
}

std::filesystem::path resolve(const json& v, const std::filesystem::path& base) {
  std::filesystem::path p = v.get<std::string>();
  if (p.empty() || p.is_absolute() || base.empty()) return p;
  return base / p;
}

BackendConfig parse_backend(const json& j, BackendRole role, std::uint32_t dim) {
  const std::string where = "backends." + std::string(to_string(role));
  check_keys(j, where, {"endpoint", "timeout_ms", "retries"});
  BackendConfig b;
  b.role = role;
  b.endpoint = j.at("endpoint").get<std::string>();
  if (j.contains("timeout_ms")) {
    b.timeout = std::chrono::milliseconds(json_count<std::int64_t>(j["timeout_ms"], where + ".timeout_ms"));
  }
  if (j.contains("retries")) b.retries = json_count<unsigned>(j["retries"], where + ".retries");
  if (role == BackendRole::TextEncoder || role == BackendRole::ImageEncoder) b.dim = dim;
  b.validate();
  return b;
}

}  // namespace

AppConfig parse_app_config(const json& j, const std::filesystem::path& base_dir) {
  AppConfig cfg;
  try {
    check_keys(j, "config", {"dim", "index", "templates_dir", "session", "backends", "service"});
    if (j.contains("dim")) cfg.dim = json_count<std::uint32_t>(j["dim"], "dim");
    if (cfg.dim == 0) throw Error(ErrorCode::InvalidArgument, "dim must be positive");
    if (j.contains("index")) cfg.index = resolve(j["index"], base_dir);
    if (j.contains("templates_dir")) cfg.templates_dir = resolve(j["templates_dir"], base_dir);
    if (j.contains("session")) cfg.session = session_config_from_json(j["session"]);

    if (j.contains("backends")) {
      const auto& b = j["backends"];
      check_keys(b, "backends", {"reference", "text_encoder", "image_encoder", "llm", "generator"});
      if (b.contains("reference")) {
        const auto& r = b["reference"];
        check_keys(r, "backends.reference", {"sigma", "hash_seed", "noise_seed"});
        cfg.reference.sigma = r.value("sigma", cfg.reference.sigma);
        if (r.contains("hash_seed")) cfg.reference.hash_seed = json_count<std::uint64_t>(r["hash_seed"], "hash_seed");
        if (r.contains("noise_seed")) cfg.reference.noise_seed = json_count<std::uint64_t>(r["noise_seed"], "noise_seed");
        if (!(cfg.reference.sigma >= 0.0)) {
          throw Error(ErrorCode::InvalidArgument, "sigma must be non-negative");
        }
      }
      for (auto role : {BackendRole::TextEncoder, BackendRole::ImageEncoder, BackendRole::Llm,
                        BackendRole::Generator}) {
        const std::string key(to_string(role));
        if (b.contains(key)) cfg.http[role] = parse_backend(b[key], role, cfg.dim);
      }
    }

    if (j.contains("service")) {
      const auto& s = j["service"];
      check_keys(s, "service",
                 {"host", "port", "static_dir", "asset_dir", "demo_mode", "snapshot_dir"});
      cfg.service.host = s.value("host", cfg.service.host);
      cfg.service.port = s.value("port", cfg.service.port);
      if (s.contains("static_dir")) cfg.service.static_dir = resolve(s["static_dir"], base_dir);
      if (s.contains("asset_dir")) cfg.service.asset_dir = resolve(s["asset_dir"], base_dir);
      if (s.contains("snapshot_dir")) cfg.service.snapshot_dir = resolve(s["snapshot_dir"], base_dir);
      cfg.service.demo_mode = s.value("demo_mode", false);
      if (cfg.service.port < 0 || cfg.service.port > 65535) {
        throw Error(ErrorCode::InvalidArgument, "port out of range",
                    std::to_string(cfg.service.port));
      }
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidArgument, "bad config value", e.what());
  }
  return cfg;
}

AppConfig load_app_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open config", path.string());
  json j = json::parse(in, nullptr, false);
  if (j.is_discarded()) throw Error(ErrorCode::FormatError, "config is not valid JSON", path.string());
  return parse_app_config(j, path.parent_path());
}

void apply_env_overrides(AppConfig& cfg) {
  if (const char* port = std::getenv("DAR_PORT"); port && *port) {
    char* end = nullptr;
    const long v = std::strtol(port, &end, 10);
    if (*end != '\0' || v < 0 || v > 65535) {
      throw Error(ErrorCode::InvalidArgument, "DAR_PORT is not a valid port", port);
    }
    cfg.service.port = static_cast<int>(v);
  }
  if (const char* index = std::getenv("DAR_INDEX"); index && *index) cfg.index = index;
}

SessionConfig resolved_session_config(const AppConfig& cfg) {
  SessionConfig s = cfg.session;
  if (!cfg.templates_dir.empty()) {
    s.templates = std::make_shared<const PromptTemplates>(PromptTemplates::load(cfg.templates_dir));
  }
  return s;
}

Backends make_backends(const AppConfig& cfg) {
  Backends b = make_reference_backends(cfg.dim, cfg.reference.sigma, cfg.reference.hash_seed,
                                       cfg.reference.noise_seed);
  if (auto it = cfg.http.find(BackendRole::TextEncoder); it != cfg.http.end()) {
    b.text = std::make_shared<HttpTextEncoder>(it->second);
  }
  if (auto it = cfg.http.find(BackendRole::ImageEncoder); it != cfg.http.end()) {
    b.image = std::make_shared<HttpImageEncoder>(it->second);
  }
  if (auto it = cfg.http.find(BackendRole::Llm); it != cfg.http.end()) {
    b.llm = std::make_shared<HttpLlm>(it->second);
  }
  if (auto it = cfg.http.find(BackendRole::Generator); it != cfg.http.end()) {
    b.generator = std::make_shared<HttpGenerator>(it->second);
  }
  return b;
}

}  // namespace dar
