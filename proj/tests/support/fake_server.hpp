// Copyright 2026 The DAR Authors
// SPDX-License-Identifier: Apache-2.0

// Loopback HTTP server that replays scripted responses per path. Each path
// has a queue of replies; the last reply repeats once the queue is drained.

#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

namespace httplib {
class Server;
}

namespace dar::testing {

struct Reply {
  int status = 200;
  std::string body;
  int delay_ms = 0;
  std::string content_type = "application/json";

  /// {"status": int?, "body": json | "raw": string, "delay_ms": int?}
  static Reply from_json(const nlohmann::json& j);
};

class FakeModelServer {
 public:
  FakeModelServer();
  ~FakeModelServer();
  FakeModelServer(const FakeModelServer&) = delete;
  FakeModelServer& operator=(const FakeModelServer&) = delete;

  void script(const std::string& path, std::vector<Reply> replies);
  std::string endpoint() const;
  int port() const { return port_; }

  std::size_t hits(const std::string& path) const;
  std::vector<nlohmann::json> requests(const std::string& path) const;

 private:
  std::unique_ptr<httplib::Server> server_;
  std::thread thread_;
  int port_ = 0;
  mutable std::mutex mu_;
  std::map<std::string, std::vector<Reply>> replies_;
  std::map<std::string, std::vector<nlohmann::json>> requests_;
};

/// Recorded responses shipped in tests/data/wire_recordings.json.
const nlohmann::json& wire_recordings();

}  // namespace dar::testing
