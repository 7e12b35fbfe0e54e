// Copyright 2026 The DAR Authors
// SPDX-License-Identifier: Apache-2.0

#include <cstdlib>
#include <fstream>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "dar/config.hpp"
#include "dar/http_backends.hpp"
#include "dar/reference_backends.hpp"
#include "test_util.hpp"

namespace dar {
namespace {

using testing::expect_code;
using json = nlohmann::json;

TEST(AppConfig, Defaults) {
  const auto c = parse_app_config(json::object());
  EXPECT_EQ(c.dim, 512u);
  EXPECT_TRUE(c.index.empty());
  EXPECT_EQ(c.session.K, 3u);
  EXPECT_EQ(c.service.port, 8080);
  EXPECT_EQ(c.service.host, "127.0.0.1");
  EXPECT_FALSE(c.service.demo_mode);
  EXPECT_TRUE(c.http.empty());
  const auto b = make_backends(c);
  EXPECT_TRUE(std::dynamic_pointer_cast<const HashEncoder>(b.text));
  EXPECT_TRUE(std::dynamic_pointer_cast<const EchoImageEncoder>(b.image));
  EXPECT_TRUE(std::dynamic_pointer_cast<const TemplateLlm>(b.llm));
  EXPECT_TRUE(std::dynamic_pointer_cast<const EchoGenerator>(b.generator));
}

TEST(AppConfig, FullDocument) {
  const json j = {
      {"dim", 64},
      {"index", "corpus.idx"},
      {"session", {{"K", 2}, {"hit_k", 5}}},
      {"backends",
       {{"reference", {{"sigma", 0.2}, {"noise_seed", 4}}},
        {"text_encoder", {{"endpoint", "http://127.0.0.1:9000"}, {"timeout_ms", 500}, {"retries", 1}}},
        {"generator", {{"endpoint", "http://127.0.0.1:9001"}}}}},
      {"service", {{"port", 0}, {"asset_dir", "/abs/assets"}, {"static_dir", "ui"}, {"demo_mode", true}}}};
  const auto c = parse_app_config(j, "/etc/dar");
  EXPECT_EQ(c.dim, 64u);
  EXPECT_EQ(c.index, std::filesystem::path("/etc/dar/corpus.idx"));
  EXPECT_EQ(c.session.K, 2u);
  EXPECT_EQ(c.session.hit_k, 5u);
  EXPECT_DOUBLE_EQ(c.reference.sigma, 0.2);
  EXPECT_EQ(c.reference.noise_seed, 4u);
  ASSERT_EQ(c.http.size(), 2u);
  const auto& te = c.http.at(BackendRole::TextEncoder);
  EXPECT_EQ(te.endpoint, "http://127.0.0.1:9000");
  EXPECT_EQ(te.timeout.count(), 500);
  EXPECT_EQ(te.retries, 1u);
  EXPECT_EQ(te.dim, 64u);
  EXPECT_EQ(c.http.at(BackendRole::Generator).dim, 0u);
  EXPECT_EQ(c.service.port, 0);
  EXPECT_EQ(c.service.asset_dir, std::filesystem::path("/abs/assets"));
  EXPECT_EQ(c.service.static_dir, std::filesystem::path("/etc/dar/ui"));
  EXPECT_TRUE(c.service.demo_mode);

  const auto b = make_backends(c);
  EXPECT_TRUE(std::dynamic_pointer_cast<const HttpTextEncoder>(b.text));
  EXPECT_TRUE(std::dynamic_pointer_cast<const HttpGenerator>(b.generator));
  EXPECT_TRUE(std::dynamic_pointer_cast<const EchoImageEncoder>(b.image));
  EXPECT_TRUE(std::dynamic_pointer_cast<const TemplateLlm>(b.llm));
}

TEST(AppConfig, Rejections) {
  expect_code(ErrorCode::InvalidArgument, [] { parse_app_config({{"dims", 3}}); });
  expect_code(ErrorCode::InvalidArgument, [] { parse_app_config({{"dim", 0}}); });
  expect_code(ErrorCode::InvalidArgument, [] { parse_app_config({{"dim", "big"}}); });
  expect_code(ErrorCode::InvalidArgument, [] { parse_app_config({{"service", {{"port", 70000}}}}); });
  expect_code(ErrorCode::InvalidArgument, [] { parse_app_config({{"service", {{"colour", 1}}}}); });
  expect_code(ErrorCode::InvalidArgument,
              [] { parse_app_config({{"backends", {{"reference", {{"sigma", -1}}}}}}); });
  expect_code(ErrorCode::InvalidArgument,
              [] { parse_app_config({{"backends", {{"llm", {{"timeout_ms", 10}}}}}}); });
  expect_code(ErrorCode::InvalidArgument,
              [] { parse_app_config({{"backends", {{"llm", {{"endpoint", "ftp://x"}}}}}}); });
  expect_code(ErrorCode::InvalidArgument,
              [] { parse_app_config({{"session", {{"K", -1}}}}); });
}

TEST(AppConfig, LoadFromFile) {
  testing::TempDir dir;
  std::ofstream(dir / "dar.json") << R"({"index": "c.idx", "dim": 32})";
  const auto c = load_app_config(dir / "dar.json");
  EXPECT_EQ(c.index, dir.path() / "c.idx");
  EXPECT_EQ(c.dim, 32u);
  expect_code(ErrorCode::IoError, [&] { load_app_config(dir / "none.json"); });
  std::ofstream(dir / "bad.json") << "{";
  expect_code(ErrorCode::FormatError, [&] { load_app_config(dir / "bad.json"); });
}

TEST(AppConfig, EnvOverrides) {
  AppConfig c;
  ::setenv("DAR_PORT", "9123", 1);
  ::setenv("DAR_INDEX", "/tmp/x.idx", 1);
  apply_env_overrides(c);
  EXPECT_EQ(c.service.port, 9123);
  EXPECT_EQ(c.index, std::filesystem::path("/tmp/x.idx"));
  ::setenv("DAR_PORT", "eighty", 1);
  expect_code(ErrorCode::InvalidArgument, [&] { apply_env_overrides(c); });
  ::unsetenv("DAR_PORT");
  ::unsetenv("DAR_INDEX");
}

TEST(AppConfig, TemplatesDirectory) {
  testing::TempDir dir;
  AppConfig c;
  EXPECT_EQ(resolved_session_config(c).templates, nullptr);
  c.templates_dir = dir / "missing";
  EXPECT_THROW(resolved_session_config(c), Error);
}

}  // namespace
}  // namespace dar
