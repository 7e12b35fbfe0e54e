// Copyright 2026 The DAR Authors
// SPDX-License-Identifier: Apache-2.0

#include "dar/service.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <fstream>
#include <map>
#include <mutex>
#include <shared_mutex>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "dar/log.hpp"
#include "dar/session.hpp"

namespace dar {

namespace {

using json = nlohmann::json;

constexpr const char* kJson = "application/json";

struct SessionEntry {
  std::mutex mu;
  Session session;
  explicit SessionEntry(Session s) : session(std::move(s)) {}
};

void send_json(httplib::Response& res, const json& body, int status = 200) {
  res.status = status;
  res.set_content(body.dump(), kJson);
}

void send_error(httplib::Response& res, int status, std::string_view code, std::string_view message,
                std::string_view detail) {
  send_json(res, {{"code", code}, {"message", message}, {"detail", detail}}, status);
}

void send_error(httplib::Response& res, const Error& e) {
  send_error(res, http_status(e.code()), to_string(e.code()), e.message(), e.detail());
}

json parse_body(const httplib::Request& req) {
  json j = json::parse(req.body, nullptr, false);
  if (j.is_discarded() || !j.is_object()) {
    throw Error(ErrorCode::InvalidArgument, "request body must be a JSON object");
  }
  return j;
}

template <typename T>
T field(const json& j, const char* key) {
  if (!j.contains(key)) throw Error(ErrorCode::InvalidArgument, "missing field", key);
  try {
    return j[key].get<T>();
  } catch (const json::exception&) {
    throw Error(ErrorCode::InvalidArgument, "field has the wrong type", key);
  }
}

std::uint64_t parse_u64(const std::string& s, std::string_view what) {
  std::uint64_t v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || p != s.data() + s.size()) {
    throw Error(ErrorCode::InvalidArgument, "expected a non-negative integer",
                std::string(what) + "=" + s);
  }
  return v;
}

json ranking_json(const RankedList& ranking, const EmbeddingIndex& ix) {
  json out = json::array();
  for (const auto& s : ranking) {
    out.push_back({{"id", s.id}, {"uri", ix.uri_of(s.id)}, {"score", s.score}});
  }
  return out;
}

std::string image_path(const std::string& sid, unsigned turn, unsigned k) {
  return "/api/sessions/" + sid + "/turns/" + std::to_string(turn) + "/generated/" +
         std::to_string(k) + "/image";
}

json generated_json(const Session& s, const TurnRecord& r) {
  json out = json::array();
  for (const auto& img : r.images) {
    out.push_back({{"k", img.k},
                   {"prompt", img.prompt},
                   {"seed", img.seed},
                   {"image_uri", image_path(s.id(), r.turn, img.k)}});
  }
  return out;
}

json turn_summary(const Session& s, const TurnRecord& r, bool demo) {
  json failures = json::array();
  for (const auto& f : r.failures) {
    failures.push_back({{"k", f.k}, {"code", to_string(f.code)}, {"message", f.message}});
  }
  json out = {{"turn", r.turn},
              {"question", r.question},
              {"answer", r.answer},
              {"refined_query", r.refined.text},
              {"refine_method", to_string(r.refined.method)},
              {"prompts", r.prompts},
              {"generated", generated_json(s, r)},
              {"failures", failures},
              {"weights", {{"alpha", r.weights.alpha}, {"beta", r.weights.beta}}},
              {"ranking", ranking_json(r.ranking, s.index())}};
  if (demo) {
    out["target_rank"] = r.target_rank ? json(*r.target_rank) : json(nullptr);
    out["hit"] = r.hit;
  }
  return out;
}

json session_summary(const Session& s, bool demo) {
  json turns = json::array();
  for (const auto& r : s.records()) turns.push_back(turn_summary(s, r, demo));
  json out = {{"session_id", s.id()},
              {"status", to_string(s.status())},
              {"config", to_json(s.config())},
              {"d0", s.context().initial_description},
              {"turns", turns},
              {"accepted_image_id", s.accepted() ? json(*s.accepted()) : json(nullptr)}};
  if (demo) out["target_id"] = s.target() ? json(*s.target()) : json(nullptr);
  return out;
}

std::string media_type_for(const std::filesystem::path& p) {
  static const std::map<std::string, std::string> types = {
      {".png", "image/png"},   {".jpg", "image/jpeg"}, {".jpeg", "image/jpeg"},
      {".gif", "image/gif"},   {".webp", "image/webp"}, {".svg", "image/svg+xml"},
      {".dar", "application/x-dar-echo"}};
  auto it = types.find(p.extension().string());
  return it == types.end() ? "application/octet-stream" : it->second;
}

bool is_remote(std::string_view uri) {
  return uri.rfind("http://", 0) == 0 || uri.rfind("https://", 0) == 0;
}

}  // namespace

int http_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument:
    case ErrorCode::ZeroVector:
    case ErrorCode::FormatError:
      return 400;
    case ErrorCode::UnknownId:
    case ErrorCode::UnknownTarget:
    case ErrorCode::UnknownSession:
      return 404;
    case ErrorCode::DuplicateId:
    case ErrorCode::SessionClosed:
    case ErrorCode::TurnLimitExceeded:
    case ErrorCode::NoTurns:
    case ErrorCode::StaleGrid:
      return 409;
    case ErrorCode::DimMismatch:
    case ErrorCode::Timeout:
    case ErrorCode::BadStatus:
    case ErrorCode::MalformedResponse:
    case ErrorCode::EmptyCompletion:
    case ErrorCode::BackendFailure:
      return 502;
    case ErrorCode::IoError:
      return 500;
  }
  return 500;
}

struct Service::Impl {
  AppConfig cfg;
  SessionConfig session_defaults;
  std::shared_ptr<const EmbeddingIndex> index;
  Backends backends;
  httplib::Server server;

  mutable std::shared_mutex sessions_mu;
  std::map<std::string, std::shared_ptr<SessionEntry>> sessions;
  std::atomic<std::uint64_t> next_id{1};

  Impl(AppConfig c, std::shared_ptr<const EmbeddingIndex> ix, Backends b)
      : cfg(std::move(c)),
        session_defaults(resolved_session_config(cfg)),
        index(std::move(ix)),
        backends(std::move(b)) {}

  std::shared_ptr<SessionEntry> lookup(const std::string& id) const {
    std::shared_lock lock(sessions_mu);
    auto it = sessions.find(id);
    if (it == sessions.end()) throw Error(ErrorCode::UnknownSession, "no such session", id);
    return it->second;
  }

  void snapshot(const Session& s) const {
    if (cfg.service.snapshot_dir.empty()) return;
    try {
      std::filesystem::create_directories(cfg.service.snapshot_dir);
      std::ofstream out(cfg.service.snapshot_dir / (s.id() + ".json"), std::ios::trunc);
      out << transcript(s).dump() << '\n';
      if (!out) throw std::runtime_error("write failed");
    } catch (const std::exception& e) {
      log(LogLevel::Warning, "snapshot of session " + s.id() + " failed: " + e.what());
    }
  }

  const TurnRecord& record_at(const Session& s, const std::string& t) const {
    const auto turn = parse_u64(t, "turn");
    if (turn >= s.records().size()) {
      throw Error(ErrorCode::UnknownId, "no such turn", std::to_string(turn));
    }
    return s.records()[turn];
  }

  void create_session(const httplib::Request& req, httplib::Response& res) {
    const json body = parse_body(req);
    const auto d0 = field<std::string>(body, "d0");
    SessionConfig scfg = session_defaults;
    if (body.contains("config_overrides")) {
      scfg = session_config_from_json(body["config_overrides"], scfg);
    }
    std::optional<ImageId> target;
    if (body.contains("target_id") && !body["target_id"].is_null()) {
      if (!cfg.service.demo_mode) {
        throw Error(ErrorCode::InvalidArgument, "target_id requires demo mode");
      }
      target = field<ImageId>(body, "target_id");
      if (!index->find(*target)) {
        throw Error(ErrorCode::UnknownTarget, "target is not in the corpus",
                    std::to_string(*target));
      }
    }
    const std::string id = "s" + std::to_string(next_id++);
    auto entry = std::make_shared<SessionEntry>(
        Session::create(id, d0, scfg, index, backends, target));
    json out = {{"session_id", id},
                {"turn0", turn_summary(entry->session, entry->session.records().front(),
                                       cfg.service.demo_mode)}};
    snapshot(entry->session);
    {
      std::unique_lock lock(sessions_mu);
      sessions.emplace(id, std::move(entry));
    }
    send_json(res, out, 201);
  }

  void get_session(const httplib::Request& req, httplib::Response& res) {
    auto e = lookup(req.path_params.at("id"));
    std::lock_guard lock(e->mu);
    send_json(res, session_summary(e->session, cfg.service.demo_mode));
  }

  void submit_turn(const httplib::Request& req, httplib::Response& res) {
    const json body = parse_body(req);
    const auto answer = field<std::string>(body, "answer");
    auto e = lookup(req.path_params.at("id"));
    std::lock_guard lock(e->mu);
    std::string question;
    if (body.contains("question") && !body["question"].is_null()) {
      question = field<std::string>(body, "question");
    } else {
      question = e->session.generate_question();
    }
    const auto& rec = e->session.submit_turn(std::move(question), answer);
    json out = turn_summary(e->session, rec, cfg.service.demo_mode);
    out["status"] = to_string(e->session.status());
    snapshot(e->session);
    send_json(res, out);
  }

  void next_question(const httplib::Request& req, httplib::Response& res) {
    auto e = lookup(req.path_params.at("id"));
    std::lock_guard lock(e->mu);
    send_json(res, {{"question", e->session.generate_question()}});
  }

  void ranking(const httplib::Request& req, httplib::Response& res) {
    auto e = lookup(req.path_params.at("id"));
    std::lock_guard lock(e->mu);
    std::size_t k = e->session.config().hit_k;
    if (req.has_param("k")) k = parse_u64(req.get_param_value("k"), "k");
    if (k == 0) throw Error(ErrorCode::InvalidArgument, "k must be positive");
    send_json(res, ranking_json(e->session.current_ranking(k), *index));
  }

  void generated(const httplib::Request& req, httplib::Response& res) {
    auto e = lookup(req.path_params.at("id"));
    std::lock_guard lock(e->mu);
    send_json(res, generated_json(e->session, record_at(e->session, req.path_params.at("t"))));
  }

  void generated_image(const httplib::Request& req, httplib::Response& res) {
    auto e = lookup(req.path_params.at("id"));
    std::lock_guard lock(e->mu);
    const auto& rec = record_at(e->session, req.path_params.at("t"));
    const auto k = parse_u64(req.path_params.at("k"), "k");
    for (const auto& img : rec.images) {
      if (img.k != k) continue;
      if (img.image.is_inline()) {
        res.set_content(reinterpret_cast<const char*>(img.image.bytes.data()),
                        img.image.bytes.size(), img.image.media_type);
        res.set_header("X-Dar-Seed", std::to_string(img.seed));
      } else {
        res.set_redirect(img.image.uri);
      }
      return;
    }
    throw Error(ErrorCode::UnknownId, "no generated image for this k", std::to_string(k));
  }

  void accept(const httplib::Request& req, httplib::Response& res) {
    const json body = parse_body(req);
    const auto image = field<ImageId>(body, "image_id");
    auto e = lookup(req.path_params.at("id"));
    std::lock_guard lock(e->mu);
    if (!index->find(image)) {
      throw Error(ErrorCode::UnknownId, "image is not in the corpus", std::to_string(image));
    }
    const auto grid = e->session.current_ranking(e->session.config().hit_k);
    const bool shown = std::any_of(grid.begin(), grid.end(),
                                   [&](const ScoredId& s) { return s.id == image; });
    if (!shown) {
      throw Error(ErrorCode::StaleGrid, "image is not in the current ranking",
                  std::to_string(image));
    }
    e->session.accept(image);
    snapshot(e->session);
    send_json(res, {{"session_id", e->session.id()},
                    {"status", to_string(e->session.status())},
                    {"accepted_image_id", image}});
  }

  void corpus_image(const httplib::Request& req, httplib::Response& res) {
    const auto id = parse_u64(req.path_params.at("id"), "id");
    if (!index->find(id)) throw Error(ErrorCode::UnknownId, "no such image", std::to_string(id));
    const auto& uri = index->uri_of(id);
    if (is_remote(uri)) {
      res.set_redirect(uri);
      return;
    }
    const std::filesystem::path rel(uri);
    bool escapes = rel.is_absolute();
    for (const auto& part : rel) escapes = escapes || part == "..";
    if (cfg.service.asset_dir.empty() || escapes) {
      throw Error(ErrorCode::UnknownId, "image asset is not available", uri);
    }
    const auto path = cfg.service.asset_dir / rel;
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::UnknownId, "image asset is not available", uri);
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    res.set_content(std::move(bytes), media_type_for(path));
  }

  void health(const httplib::Request&, httplib::Response& res) {
    send_json(res, {{"status", "ok"}, {"corpus_count", index->size()}, {"dim", index->dim()}});
  }

  template <typename Fn>
  httplib::Server::Handler wrap(Fn fn) {
    return [this, fn](const httplib::Request& req, httplib::Response& res) {
      try {
        (this->*fn)(req, res);
      } catch (const Error& e) {
        send_error(res, e);
      }
    };
  }

  void routes() {
    server.Post("/api/sessions", wrap(&Impl::create_session));
    server.Get("/api/sessions/:id", wrap(&Impl::get_session));
    server.Post("/api/sessions/:id/turns", wrap(&Impl::submit_turn));
    server.Get("/api/sessions/:id/question", wrap(&Impl::next_question));
    server.Get("/api/sessions/:id/ranking", wrap(&Impl::ranking));
    server.Get("/api/sessions/:id/turns/:t/generated", wrap(&Impl::generated));
    server.Get("/api/sessions/:id/turns/:t/generated/:k/image", wrap(&Impl::generated_image));
    server.Post("/api/sessions/:id/accept", wrap(&Impl::accept));
    server.Get("/api/corpus/images/:id", wrap(&Impl::corpus_image));
    server.Get("/api/health", wrap(&Impl::health));

    server.set_exception_handler(
        [](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
          std::string what = "unknown exception";
          try {
            std::rethrow_exception(ep);
          } catch (const std::exception& e) {
            what = e.what();
          } catch (...) {
          }
          log(LogLevel::Error, "unhandled exception: " + what);
          send_error(res, 500, "Internal", "internal error", what);
        });
    server.set_error_handler([](const httplib::Request& req, httplib::Response& res) {
      if (!res.body.empty()) return;
      if (res.status == 404) {
        send_error(res, 404, "UnknownRoute", "no such route", req.path);
      } else {
        send_error(res, res.status, "Http", httplib::status_message(res.status), req.path);
      }
    });

    if (!cfg.service.static_dir.empty()) {
      if (!server.set_mount_point("/", cfg.service.static_dir.string())) {
        log(LogLevel::Warning, "static directory not found: " + cfg.service.static_dir.string());
      }
    }
  }
};

Service::Service(AppConfig cfg, std::shared_ptr<const EmbeddingIndex> index, Backends backends) {
  if (!index || index->empty()) throw Error(ErrorCode::InvalidArgument, "service needs a non-empty index");
  if (index->dim() != cfg.dim) {
    throw Error(ErrorCode::InvalidArgument, "index dim differs from config dim",
                std::to_string(index->dim()) + " vs " + std::to_string(cfg.dim));
  }
  impl_ = std::make_unique<Impl>(std::move(cfg), std::move(index), std::move(backends));
  impl_->routes();
}

Service::~Service() { stop(); }

int Service::bind() {
  const auto& s = impl_->cfg.service;
  if (s.port == 0) {
    const int port = impl_->server.bind_to_any_port(s.host);
    if (port < 0) throw Error(ErrorCode::IoError, "cannot bind", s.host);
    return port;
  }
  if (!impl_->server.bind_to_port(s.host, s.port)) {
    throw Error(ErrorCode::IoError, "cannot bind", s.host + ":" + std::to_string(s.port));
  }
  return s.port;
}

void Service::run() { impl_->server.listen_after_bind(); }

void Service::stop() {
  if (impl_) impl_->server.stop();
}

std::size_t Service::session_count() const {
  std::shared_lock lock(impl_->sessions_mu);
  return impl_->sessions.size();
}

}  // namespace dar
