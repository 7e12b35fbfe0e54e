// Copyright 2026 The DAR Authors
// SPDX-License-Identifier: Apache-2.0

#include "commands.hpp"

#include <pthread.h>
#include <signal.h>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "dar/config.hpp"
#include "dar/corpus.hpp"
#include "dar/errors.hpp"
#include "dar/eval.hpp"
#include "dar/index.hpp"
#include "dar/log.hpp"
#include "dar/service.hpp"
#include "dar/session.hpp"

namespace dar::cli {

namespace {

using json = nlohmann::json;

struct CorpusRecord {
  ImageId id = 0;
  std::string uri;
  std::string caption;
  std::optional<std::vector<float>> embedding;
};

CorpusRecord record_from_json(const json& j, std::size_t line) {
  const std::string where = "record " + std::to_string(line);
  if (!j.is_object() || !j.contains("id")) {
    throw Error(ErrorCode::FormatError, "record needs an \"id\"", where);
  }
  try {
    CorpusRecord r;
    r.id = j["id"].get<ImageId>();
    r.uri = j.value("uri", "");
    r.caption = j.value("caption", "");
    if (j.contains("embedding")) r.embedding = j["embedding"].get<std::vector<float>>();
    if (!r.embedding && r.caption.empty()) {
      throw Error(ErrorCode::FormatError, "record needs a caption or an embedding", where);
    }
    return r;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::FormatError, "bad record", where + ": " + e.what());
  }
}

std::vector<CorpusRecord> read_corpus(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open corpus input", path.string());
  std::vector<CorpusRecord> out;
  const auto ext = path.extension().string();
  if (ext == ".json") {
    json j = json::parse(in, nullptr, false);
    if (j.is_discarded() || !j.is_array()) {
      throw Error(ErrorCode::FormatError, "expected a JSON array of records", path.string());
    }
    for (std::size_t i = 0; i < j.size(); ++i) out.push_back(record_from_json(j[i], i));
    return out;
  }
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    if (ext == ".jsonl") {
      json j = json::parse(line, nullptr, false);
      if (j.is_discarded()) throw Error(ErrorCode::FormatError, "bad JSON line", std::to_string(n));
      out.push_back(record_from_json(j, n));
    } else {
      if (line.back() == '\r') line.pop_back();
      out.push_back({static_cast<ImageId>(out.size()), "", line, std::nullopt});
    }
  }
  return out;
}

AppConfig config_or_default(const std::string& path) {
  return path.empty() ? AppConfig{} : load_app_config(path);
}

std::shared_ptr<const EmbeddingIndex> load_checked_index(const std::string& path,
                                                         const AppConfig& cfg) {
  auto ix = std::make_shared<const EmbeddingIndex>(load_index(path));
  if (ix->dim() != cfg.dim) {
    throw Error(ErrorCode::DimMismatch, "index dim differs from config dim",
                std::to_string(ix->dim()) + " vs " + std::to_string(cfg.dim));
  }
  return ix;
}

void print_ranking(const RankedList& ranking, const EmbeddingIndex& ix) {
  std::size_t pos = 1;
  for (const auto& s : ranking) {
    std::cout << "  " << std::setw(3) << pos++ << "  " << std::setw(8) << s.id << "  "
              << std::fixed << std::setprecision(4) << s.score << "  " << ix.uri_of(s.id) << '\n';
  }
  std::cout.unsetf(std::ios::floatfield);
}

void print_turn(const TurnRecord& r, const EmbeddingIndex& ix) {
  std::cout << "turn " << r.turn << "  query: " << r.refined.text << '\n';
  for (const auto& img : r.images) std::cout << "  prompt " << img.k << ": " << img.prompt << '\n';
  for (const auto& f : r.failures) {
    std::cout << "  prompt " << f.k << " failed: " << f.message << '\n';
  }
  print_ranking(r.ranking, ix);
}

}  // namespace

int index_build(const IndexBuildArgs& a) {
  AppConfig cfg = config_or_default(a.config);
  auto records = read_corpus(a.input);
  if (records.empty()) throw Error(ErrorCode::InvalidArgument, "corpus input is empty", a.input);

  if (a.dim) {
    cfg.dim = *a.dim;
  } else if (a.config.empty() && records.front().embedding) {
    cfg.dim = static_cast<std::uint32_t>(records.front().embedding->size());
  }
  if (a.sigma) cfg.reference.sigma = *a.sigma;
  for (auto& [role, b] : cfg.http) {
    if (role == BackendRole::TextEncoder || role == BackendRole::ImageEncoder) b.dim = cfg.dim;
  }

  const Backends backends = make_backends(cfg);
  if (!a.assets.empty()) std::filesystem::create_directories(a.assets);

  std::vector<CorpusEntry> entries;
  entries.reserve(records.size());
  for (auto& r : records) {
    CorpusEntry e;
    e.id = r.id;
    if (r.embedding) {
      e.embedding = Embedding(std::move(*r.embedding));
      e.uri = r.uri.empty() ? "img/" + std::to_string(r.id) : r.uri;
    } else {
      ImageRef image;
      e.embedding = embed_caption(backends, {r.id, r.uri, r.caption}, &image);
      if (!image.is_inline()) {
        e.uri = r.uri.empty() ? image.uri : r.uri;
      } else {
        e.uri = r.uri.empty() ? "img/" + std::to_string(r.id) + ".dar" : r.uri;
        if (!a.assets.empty()) {
          const std::filesystem::path rel(e.uri);
          bool escapes = rel.is_absolute();
          for (const auto& part : rel) escapes = escapes || part == "..";
          if (escapes) throw Error(ErrorCode::InvalidArgument, "asset uri leaves the asset directory", e.uri);
          const auto path = std::filesystem::path(a.assets) / rel;
          if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
          std::ofstream out(path, std::ios::binary | std::ios::trunc);
          out.write(reinterpret_cast<const char*>(image.bytes.data()),
                    static_cast<std::streamsize>(image.bytes.size()));
          if (!out) throw Error(ErrorCode::IoError, "cannot write asset", path.string());
        }
      }
    }
    entries.push_back(std::move(e));
  }
  const auto ix = build_index(cfg.dim, std::move(entries));
  save_index(ix, a.out);
  std::cerr << "indexed " << ix.size() << " images (dim " << ix.dim() << ") -> " << a.out << '\n';
  return 0;
}

int serve(const std::string& config) {
  std::string path = config;
  if (path.empty()) {
    if (const char* env = std::getenv("DAR_CONFIG"); env && *env) path = env;
  }
  if (path.empty()) {
    std::cerr << "dar serve: a config file is required (argument or DAR_CONFIG)\n";
    return 2;
  }
  AppConfig cfg = load_app_config(path);
  apply_env_overrides(cfg);
  if (cfg.index.empty()) throw Error(ErrorCode::InvalidArgument, "config has no index path");
  auto ix = load_checked_index(cfg.index.string(), cfg);
  const Backends backends = make_backends(cfg);

  // Signals are handled by a dedicated thread; block them everywhere else
  // before the server's worker threads are spawned.
  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);

  Service service(cfg, ix, backends);
  const int port = service.bind();
  std::cerr << "dar: serving " << ix->size() << " images on http://" << cfg.service.host << ":"
            << port << '\n';

  std::thread waiter([&] {
    int sig = 0;
    sigwait(&signals, &sig);
    std::cerr << "dar: shutting down\n";
    service.stop();
  });
  service.run();
  // run() can also return on its own (e.g. listener failure); wake the waiter.
  pthread_kill(waiter.native_handle(), SIGTERM);
  waiter.join();
  return 0;
}

int eval_run(const EvalArgs& a) {
  const AppConfig cfg = load_app_config(a.config);
  auto ix = load_checked_index(a.index, cfg);
  const auto ds = load_dataset(a.dataset, *ix);

  SessionConfig scfg = resolved_session_config(cfg);
  if (a.k) scfg.hit_k = *a.k;

  std::vector<Variant> variants;
  const std::vector<std::string> names =
      a.variants.empty() ? std::vector<std::string>{"dar", "concat"} : a.variants;
  for (const auto& n : names) variants.push_back(n == "dar" ? Variant::dar(scfg.K) : Variant::concat());

  BenchmarkOptions opts;
  opts.strict = a.strict;
  opts.transcript_dir = a.transcripts;
  const RunReport report = run_benchmark(ds, ix, scfg, make_backends(cfg), variants, opts);

  if (a.out.empty()) {
    std::cout << report_to_json(report, a.timing).dump(2) << '\n';
  } else {
    emit_report(report, a.out, ReportFormat::Json, a.timing);
  }
  if (!a.csv.empty()) emit_report(report, a.csv, ReportFormat::Csv);

  for (const auto& v : report.variants) {
    std::cerr << v.name << ": Hits@" << report.k << " at turn " << report.T << " = "
              << (v.curve.empty() ? 0.0 : v.curve.back()) << " (n=" << report.n - v.excluded;
    std::size_t failed = 0;
    for (const auto& f : v.failures) failed += f.empty() ? 0 : 1;
    if (failed) std::cerr << ", " << failed << " failed";
    std::cerr << ")\n";
  }
  return 0;
}

int session_repl(const std::string& index, const std::string& config) {
  const AppConfig cfg = load_app_config(config);
  auto ix = load_checked_index(index, cfg);
  const SessionConfig scfg = resolved_session_config(cfg);
  const Backends backends = make_backends(cfg);

  std::cout << "Describe the image you are looking for:\n> " << std::flush;
  std::string d0;
  if (!std::getline(std::cin, d0)) return 0;
  Session s = Session::create("repl", d0, scfg, ix, backends);
  print_turn(s.records().back(), *ix);

  std::cout << "Answer each question; ':accept ID' selects an image, ':quit' or an empty line "
               "ends the session.\n";
  while (s.status() == SessionStatus::Active && s.records().size() <= scfg.T) {
    const std::string question = s.generate_question();
    std::cout << "Q: " << question << "\n> " << std::flush;
    std::string line;
    if (!std::getline(std::cin, line) || line.empty() || line == ":quit") break;
    if (line.rfind(":accept ", 0) == 0) {
      const auto id = static_cast<ImageId>(std::stoull(line.substr(8)));
      s.accept(id);
      std::cout << "accepted " << id << " (" << ix->uri_of(id) << ")\n";
      return 0;
    }
    print_turn(s.submit_turn(question, line), *ix);
  }
  const ImageId best = s.finalize();
  std::cout << "best match: " << best << " (" << ix->uri_of(best) << ")\n";
  return 0;
}

int report(const ReportArgs& a) {
  std::ifstream in(a.run);
  if (!in) throw Error(ErrorCode::IoError, "cannot open report", a.run);
  json j = json::parse(in, nullptr, false);
  if (j.is_discarded()) throw Error(ErrorCode::FormatError, "report is not valid JSON", a.run);
  const RunReport r = report_from_json(j);
  if (a.csv) {
    std::cout << report_to_csv(r);
    return 0;
  }
  std::cout << "Hits@" << r.k << " over " << r.n << " dialogues\n";
  std::cout << std::left << std::setw(10) << "turn";
  for (const auto& v : r.variants) std::cout << std::setw(12) << v.name;
  std::cout << '\n';
  for (unsigned t = 0; t <= r.T; ++t) {
    std::cout << std::setw(10) << t;
    for (const auto& v : r.variants) {
      std::ostringstream cell;
      cell << std::fixed << std::setprecision(4) << (t < v.curve.size() ? v.curve[t] : 0.0);
      std::cout << std::setw(12) << cell.str();
    }
    std::cout << '\n';
  }
  return 0;
}

}  // namespace dar::cli
