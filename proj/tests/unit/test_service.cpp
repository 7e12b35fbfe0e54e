// Copyright 2026 The DAR Authors
// SPDX-License-Identifier: Apache-2.0

#include <fstream>
#include <set>
#include <thread>

#include <gtest/gtest.h>
#include <httplib.h>
#include <nlohmann/json.hpp>

#include "dar/log.hpp"
#include "dar/reference_backends.hpp"
#include "dar/service.hpp"
#include "fixtures.hpp"
#include "test_util.hpp"

namespace dar {
namespace {

using json = nlohmann::json;
constexpr std::uint32_t kDim = 96;

class ServiceTest : public ::testing::Test {
 protected:
  void SetUp() override { set_log_sink(nullptr); }

  void start(bool demo = false) {
    AppConfig cfg;
    cfg.dim = kDim;
    cfg.service.port = 0;
    cfg.service.demo_mode = demo;
    cfg.service.asset_dir = assets_.path();
    cfg.service.snapshot_dir = assets_ / "snapshots";
    backends_ = make_reference_backends(kDim, 0.1);
    index_ = testing::scene_index(backends_, kDim);
    service_ = std::make_unique<Service>(cfg, index_, backends_);
    port_ = service_->bind();
    thread_ = std::thread([this] { service_->run(); });
  }

  void TearDown() override {
    if (service_) service_->stop();
    if (thread_.joinable()) thread_.join();
  }

  httplib::Client client() const {
    httplib::Client c("127.0.0.1", port_);
    c.set_read_timeout(10, 0);
    return c;
  }

  std::pair<int, json> post(const std::string& path, const json& body) {
    auto r = client().Post(path, body.dump(), "application/json");
    if (!r) return {0, nullptr};
    return {r->status, json::parse(r->body, nullptr, false)};
  }

  std::pair<int, json> get(const std::string& path) {
    auto r = client().Get(path);
    if (!r) return {0, nullptr};
    return {r->status, json::parse(r->body, nullptr, false)};
  }

  std::string create(const std::string& d0 = "a dog in a park", json extra = json::object()) {
    extra["d0"] = d0;
    auto [status, body] = post("/api/sessions", extra);
    EXPECT_EQ(status, 201) << body.dump();
    return body.value("session_id", "");
  }

  testing::TempDir assets_;
  Backends backends_;
  std::shared_ptr<const EmbeddingIndex> index_;
  std::unique_ptr<Service> service_;
  std::thread thread_;
  int port_ = 0;
};

TEST(HttpStatus, Mapping) {
  EXPECT_EQ(http_status(ErrorCode::InvalidArgument), 400);
  EXPECT_EQ(http_status(ErrorCode::UnknownSession), 404);
  EXPECT_EQ(http_status(ErrorCode::StaleGrid), 409);
  EXPECT_EQ(http_status(ErrorCode::TurnLimitExceeded), 409);
  EXPECT_EQ(http_status(ErrorCode::BackendFailure), 502);
  EXPECT_EQ(http_status(ErrorCode::IoError), 500);
}

TEST_F(ServiceTest, RejectsDimMismatch) {
  auto b = make_reference_backends(16, 0.1);
  AppConfig cfg;
  EXPECT_THROW(Service(cfg, testing::scene_index(b, 16), b), Error);
}

TEST_F(ServiceTest, Health) {
  start();
  auto [status, body] = get("/api/health");
  EXPECT_EQ(status, 200);
  EXPECT_EQ(body["status"], "ok");
  EXPECT_EQ(body["corpus_count"], 12);
  EXPECT_EQ(body["dim"], kDim);
}

TEST_F(ServiceTest, FullSessionRoundTrip) {
  start();
  auto [status, created] = post("/api/sessions", {{"d0", "a dog in a park"}});
  ASSERT_EQ(status, 201);
  const std::string id = created["session_id"];
  const auto& t0 = created["turn0"];
  EXPECT_EQ(t0["turn"], 0);
  EXPECT_EQ(t0["refined_query"], "a dog in a park");
  EXPECT_EQ(t0["prompts"].size(), 3u);
  EXPECT_EQ(t0["generated"].size(), 3u);
  EXPECT_EQ(t0["ranking"].size(), 10u);
  EXPECT_EQ(t0["ranking"][0]["id"], 1);
  EXPECT_DOUBLE_EQ(t0["weights"]["alpha"].get<double>(), 0.7);
  EXPECT_FALSE(t0.contains("target_rank"));

  auto [qs, q] = get("/api/sessions/" + id + "/question");
  EXPECT_EQ(qs, 200);
  EXPECT_EQ(q["question"], "What is the main subject doing?");

  auto [ts, turn] = post("/api/sessions/" + id + "/turns", {{"answer", "catching a frisbee"}});
  ASSERT_EQ(ts, 200) << turn.dump();
  EXPECT_EQ(turn["turn"], 1);
  EXPECT_EQ(turn["question"], "What is the main subject doing?");
  EXPECT_EQ(turn["refined_query"], "a dog in a park, catching a frisbee");
  EXPECT_EQ(turn["status"], "active");

  auto [ts2, turn2] =
      post("/api/sessions/" + id + "/turns", {{"question", "color?"}, {"answer", "brown"}});
  ASSERT_EQ(ts2, 200);
  EXPECT_EQ(turn2["question"], "color?");

  auto [rs, ranking] = get("/api/sessions/" + id + "/ranking?k=4");
  ASSERT_EQ(rs, 200);
  ASSERT_EQ(ranking.size(), 4u);
  EXPECT_EQ(ranking[0]["uri"], "img/1.dar");
  for (std::size_t i = 1; i < ranking.size(); ++i) {
    EXPECT_GE(ranking[i - 1]["score"].get<double>(), ranking[i]["score"].get<double>());
  }

  auto [gs, gen] = get("/api/sessions/" + id + "/turns/2/generated");
  ASSERT_EQ(gs, 200);
  ASSERT_EQ(gen.size(), 3u);
  EXPECT_EQ(gen[1]["k"], 2);
  auto img = client().Get(gen[1]["image_uri"].get<std::string>());
  ASSERT_TRUE(img);
  EXPECT_EQ(img->status, 200);
  EXPECT_EQ(img->get_header_value("Content-Type"), "application/x-dar-echo");
  EXPECT_EQ(img->get_header_value("X-Dar-Seed"), std::to_string(gen[1]["seed"].get<std::uint64_t>()));
  const std::vector<std::uint8_t> bytes(img->body.begin(), img->body.end());
  EXPECT_EQ(decode_echo_artifact(bytes).prompt, gen[1]["prompt"]);

  auto [ss, session] = get("/api/sessions/" + id);
  ASSERT_EQ(ss, 200);
  EXPECT_EQ(session["turns"].size(), 3u);
  EXPECT_EQ(session["status"], "active");
  EXPECT_TRUE(session["accepted_image_id"].is_null());

  auto [as, acc] = post("/api/sessions/" + id + "/accept", {{"image_id", 1}});
  ASSERT_EQ(as, 200) << acc.dump();
  EXPECT_EQ(acc["status"], "hit");
  auto [cs, closed] = post("/api/sessions/" + id + "/turns", {{"answer", "more"}});
  EXPECT_EQ(cs, 409);
  EXPECT_EQ(closed["code"], "SessionClosed");

  std::ifstream snap(assets_ / "snapshots" / (id + ".json"));
  ASSERT_TRUE(snap);
  const auto tx = json::parse(snap);
  EXPECT_EQ(tx["records"].size(), 3u);
  EXPECT_EQ(tx["accepted_image_id"], 1);
  EXPECT_EQ(service_->session_count(), 1u);
}

TEST_F(ServiceTest, ErrorEnvelope) {
  start();
  auto r = client().Post("/api/sessions", "{not json", "application/json");
  ASSERT_TRUE(r);
  EXPECT_EQ(r->status, 400);
  const auto body = json::parse(r->body);
  EXPECT_EQ(body["code"], "InvalidArgument");
  EXPECT_TRUE(body.contains("message"));
  EXPECT_TRUE(body.contains("detail"));

  EXPECT_EQ(post("/api/sessions", json::object()).first, 400);
  EXPECT_EQ(post("/api/sessions", {{"d0", 5}}).first, 400);
  EXPECT_EQ(post("/api/sessions", {{"d0", ""}}).first, 400);
  EXPECT_EQ(post("/api/sessions", {{"d0", "x"}, {"config_overrides", {{"bogus", 1}}}}).first, 400);
  EXPECT_EQ(post("/api/sessions", {{"d0", "x"}, {"target_id", 1}}).first, 400);

  auto [s404, unknown] = get("/api/sessions/s999");
  EXPECT_EQ(s404, 404);
  EXPECT_EQ(unknown["code"], "UnknownSession");
  auto [r404, route] = get("/api/nothing/here");
  EXPECT_EQ(r404, 404);
  EXPECT_EQ(route["code"], "UnknownRoute");

  const auto id = create();
  EXPECT_EQ(get("/api/sessions/" + id + "/ranking?k=0").first, 400);
  EXPECT_EQ(get("/api/sessions/" + id + "/ranking?k=abc").first, 400);
  EXPECT_EQ(get("/api/sessions/" + id + "/turns/5/generated").first, 404);
  EXPECT_EQ(get("/api/sessions/" + id + "/turns/0/generated/9/image").first, 404);
  EXPECT_EQ(post("/api/sessions/" + id + "/turns", {{"question", "q?"}}).first, 400);
  EXPECT_EQ(post("/api/sessions/" + id + "/accept", {{"image_id", 4242}}).first, 404);
}

TEST_F(ServiceTest, AcceptOutsideGridIsStale) {
  start();
  const auto id = create("a dog in a park", {{"config_overrides", {{"hit_k", 2}}}});
  auto [s, ranking] = get("/api/sessions/" + id + "/ranking?k=12");
  ASSERT_EQ(s, 200);
  const auto last = ranking.back()["id"].get<ImageId>();
  auto [status, body] = post("/api/sessions/" + id + "/accept", {{"image_id", last}});
  EXPECT_EQ(status, 409);
  EXPECT_EQ(body["code"], "StaleGrid");
}

TEST_F(ServiceTest, TurnLimit) {
  start();
  const auto id = create("a dog", {{"config_overrides", {{"T", 1}}}});
  auto [s1, t1] = post("/api/sessions/" + id + "/turns", {{"answer", "running"}});
  EXPECT_EQ(s1, 200);
  EXPECT_EQ(t1["status"], "exhausted");
  auto [s2, t2] = post("/api/sessions/" + id + "/turns", {{"answer", "again"}});
  EXPECT_EQ(s2, 409);
}

TEST_F(ServiceTest, DemoModeReportsTargetRank) {
  start(true);
  auto [status, created] = post("/api/sessions", {{"d0", "a dog in a park"}, {"target_id", 1}});
  ASSERT_EQ(status, 201) << created.dump();
  EXPECT_EQ(created["turn0"]["target_rank"], 1);
  EXPECT_EQ(created["turn0"]["hit"], true);
  EXPECT_EQ(post("/api/sessions", {{"d0", "x"}, {"target_id", 77}}).first, 404);
}

TEST_F(ServiceTest, CorpusImages) {
  start();
  std::filesystem::create_directories(assets_ / "img");
  std::ofstream(assets_ / "img" / "3.dar", std::ios::binary) << "ECHO";
  auto r = client().Get("/api/corpus/images/3");
  ASSERT_TRUE(r);
  EXPECT_EQ(r->status, 200);
  EXPECT_EQ(r->body, "ECHO");
  EXPECT_EQ(r->get_header_value("Content-Type"), "application/x-dar-echo");
  EXPECT_EQ(get("/api/corpus/images/4").first, 404);
  EXPECT_EQ(get("/api/corpus/images/99").first, 404);
  EXPECT_EQ(get("/api/corpus/images/x").first, 400);
}

TEST_F(ServiceTest, ConcurrentSessions) {
  start();
  constexpr int kClients = 6;
  std::vector<std::thread> workers;
  std::vector<std::string> ids(kClients);
  std::vector<int> ok(kClients, 0);
  for (int c = 0; c < kClients; ++c) {
    workers.emplace_back([&, c] {
      auto cl = client();
      auto r = cl.Post("/api/sessions", json{{"d0", "a red bus " + std::to_string(c)}}.dump(),
                       "application/json");
      if (!r || r->status != 201) return;
      ids[c] = json::parse(r->body)["session_id"];
      for (int t = 0; t < 3; ++t) {
        auto tr = cl.Post("/api/sessions/" + ids[c] + "/turns", json{{"answer", "at night"}}.dump(),
                          "application/json");
        if (tr && tr->status == 200) ++ok[c];
      }
    });
  }
  for (auto& w : workers) w.join();
  std::set<std::string> unique(ids.begin(), ids.end());
  EXPECT_EQ(unique.size(), static_cast<std::size_t>(kClients));
  for (int c = 0; c < kClients; ++c) EXPECT_EQ(ok[c], 3) << c;
  EXPECT_EQ(service_->session_count(), static_cast<std::size_t>(kClients));
  for (const auto& id : ids) EXPECT_EQ(get("/api/sessions/" + id).second["turns"].size(), 4u);
}

TEST_F(ServiceTest, ConcurrentTurnsOnOneSessionSerialize) {
  start();
  const auto id = create("a dog", {{"config_overrides", {{"T", 4}}}});
  std::vector<std::thread> workers;
  std::atomic<int> ok{0}, conflict{0};
  for (int c = 0; c < 6; ++c) {
    workers.emplace_back([&] {
      auto r = client().Post("/api/sessions/" + id + "/turns", json{{"answer", "yes"}}.dump(),
                             "application/json");
      if (r && r->status == 200) ++ok;
      if (r && r->status == 409) ++conflict;
    });
  }
  for (auto& w : workers) w.join();
  EXPECT_EQ(ok.load(), 4);
  EXPECT_EQ(conflict.load(), 2);
  const auto s = get("/api/sessions/" + id).second;
  for (std::size_t t = 0; t < s["turns"].size(); ++t) EXPECT_EQ(s["turns"][t]["turn"], t);
}

}  // namespace
}  // namespace dar
