// Copyright 2026 The DAR Authors
// SPDX-License-Identifier: Apache-2.0

#include "dar/eval.hpp"

#include <charconv>
#include <chrono>
#include <fstream>
#include <set>

#include "dar/errors.hpp"
#include "dar/log.hpp"

namespace dar {

namespace {

using json = nlohmann::json;

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::optional<ImageId> parse_id(std::string_view s) {
  ImageId v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size() || s.empty()) return std::nullopt;
  return v;
}

std::string format_double(double v) {
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, p);
}

json optional_json(const std::optional<unsigned>& v) { return v ? json(*v) : json(nullptr); }

}  // namespace

unsigned DialogueDataset::turns() const noexcept {
  return entries.empty() ? 0 : static_cast<unsigned>(entries.front().turns.size());
}

QaTurn split_qa(std::string_view text) {
  const auto q = text.find('?');
  if (q == std::string_view::npos) return {std::string(kPlaceholderQuestion), trim(text)};
  return {trim(text.substr(0, q + 1)), trim(text.substr(q + 1))};
}

DialogueDataset parse_dataset(const json& j, const EmbeddingIndex& ix) {
  if (!j.is_array()) throw Error(ErrorCode::FormatError, "dataset must be a JSON array");
  DialogueDataset ds;
  ds.entries.reserve(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) {
    const auto& e = j[i];
    const std::string where = "entry " + std::to_string(i);
    if (!e.is_object() || !e.contains("img") || !e.contains("dialog")) {
      throw Error(ErrorCode::FormatError, "entry needs \"img\" and \"dialog\"", where);
    }
    const auto& dialog = e["dialog"];
    if (!dialog.is_array() || dialog.empty()) {
      throw Error(ErrorCode::FormatError, "\"dialog\" must be a non-empty array", where);
    }
    DialogueEntry entry;
    if (e["img"].is_string()) {
      entry.target_uri = e["img"].get<std::string>();
    } else if (e["img"].is_number_integer() && e["img"].get<std::int64_t>() >= 0) {
      entry.target_uri = std::to_string(e["img"].get<ImageId>());
    } else {
      throw Error(ErrorCode::FormatError, "\"img\" must be a string or an id", where);
    }
    if (auto row = ix.find_uri(entry.target_uri)) {
      entry.target_id = ix.id_at(*row);
    } else if (auto id = parse_id(entry.target_uri); id && ix.find(*id)) {
      entry.target_id = *id;
    } else {
      throw Error(ErrorCode::UnknownTarget, "target image is not in the corpus",
                  where + ": " + entry.target_uri);
    }
    for (std::size_t t = 0; t < dialog.size(); ++t) {
      if (!dialog[t].is_string()) {
        throw Error(ErrorCode::FormatError, "dialog elements must be strings", where);
      }
      const auto& s = dialog[t].get_ref<const std::string&>();
      if (t == 0) {
        entry.d0 = trim(s);
      } else {
        entry.turns.push_back(split_qa(s));
      }
    }
    if (entry.d0.empty()) throw Error(ErrorCode::FormatError, "empty initial description", where);
    if (!ds.entries.empty() && entry.turns.size() != ds.turns()) {
      throw Error(ErrorCode::FormatError, "dialogues have different turn counts", where);
    }
    ds.entries.push_back(std::move(entry));
  }
  return ds;
}

DialogueDataset load_dataset(const std::filesystem::path& path, const EmbeddingIndex& ix) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open dataset", path.string());
  json j = json::parse(in, nullptr, /*allow_exceptions=*/false);
  if (j.is_discarded()) throw Error(ErrorCode::FormatError, "dataset is not valid JSON", path.string());
  return parse_dataset(j, ix);
}

HitsCurve hits_at_k_curve(std::span<const FirstHit> first_hits, unsigned T, std::size_t n) {
  std::vector<std::size_t> new_hits(T + 1, 0);
  for (const auto& f : first_hits) {
    if (f && *f <= T) ++new_hits[*f];
  }
  HitsCurve curve(T + 1, 0.0);
  if (n == 0) return curve;
  std::size_t cumulative = 0;
  for (unsigned t = 0; t <= T; ++t) {
    cumulative += new_hits[t];
    curve[t] = static_cast<double>(cumulative) / static_cast<double>(n);
  }
  return curve;
}

std::vector<FirstHit> first_hit_turns(const RankMatrix& ranks, std::size_t k) {
  std::vector<FirstHit> out(ranks.size());
  for (std::size_t d = 0; d < ranks.size(); ++d) {
    for (std::size_t t = 0; t < ranks[d].size(); ++t) {
      if (ranks[d][t] && *ranks[d][t] <= k) {
        out[d] = static_cast<unsigned>(t);
        break;
      }
    }
  }
  return out;
}

HitsCurve curve_by_freeze(const RankMatrix& ranks, std::size_t k, unsigned T) {
  const std::size_t n = ranks.size();
  HitsCurve curve(T + 1, 0.0);
  if (n == 0) return curve;
  std::set<std::size_t> in_play;
  for (std::size_t d = 0; d < n; ++d) in_play.insert(d);
  std::size_t hits = 0;
  for (unsigned t = 0; t <= T; ++t) {
    for (auto it = in_play.begin(); it != in_play.end();) {
      const auto& row = ranks[*it];
      if (t < row.size() && row[t] && *row[t] <= k) {
        ++hits;
        it = in_play.erase(it);
      } else {
        ++it;
      }
    }
    curve[t] = static_cast<double>(hits) / static_cast<double>(n);
  }
  return curve;
}

bool is_non_decreasing(const HitsCurve& c) {
  for (std::size_t i = 1; i < c.size(); ++i) {
    if (c[i] < c[i - 1]) return false;
  }
  return true;
}

RunReport run_benchmark(const DialogueDataset& ds, std::shared_ptr<const EmbeddingIndex> ix,
                        SessionConfig cfg, const Backends& backends,
                        std::span<const Variant> variants, const BenchmarkOptions& opts) {
  using Clock = std::chrono::steady_clock;
  const auto run_start = Clock::now();

  RunReport report;
  report.k = cfg.hit_k;
  report.T = ds.turns();
  report.n = ds.entries.size();
  cfg.T = std::max(1u, report.T);

  json variant_cfg = json::array();
  for (const auto& v : variants) {
    variant_cfg.push_back(
        {{"name", v.name}, {"reformulation", to_string(v.reformulation)}, {"K", v.K}});
  }
  report.config = {{"session", to_json(cfg)},
                   {"variants", variant_cfg},
                   {"strict", opts.strict},
                   {"corpus_size", ix ? ix->size() : 0}};

  for (const auto& v : variants) {
    const auto start = Clock::now();
    SessionConfig vcfg = cfg;
    vcfg.K = v.K;
    vcfg.reformulation = v.reformulation;

    VariantResult res;
    res.name = v.name;
    res.ranks.assign(ds.entries.size(), std::vector<std::optional<std::size_t>>(report.T + 1));
    res.failures.assign(ds.entries.size(), std::string());
    std::vector<bool> excluded(ds.entries.size(), false);
    if (!opts.transcript_dir.empty()) std::filesystem::create_directories(opts.transcript_dir / v.name);

    for (std::size_t d = 0; d < ds.entries.size(); ++d) {
      const auto& entry = ds.entries[d];
      auto& row = res.ranks[d];
      try {
        Session s = Session::create(opts.session_prefix + std::to_string(d), entry.d0, vcfg, ix,
                                    backends, entry.target_id);
        row[0] = s.records().back().target_rank;
        for (const auto& qa : entry.turns) {
          if (s.status() != SessionStatus::Active) break;
          const auto& rec = s.submit_turn(qa.question, qa.answer);
          row[rec.turn] = rec.target_rank;
        }
        if (!opts.transcript_dir.empty()) {
          const auto path = opts.transcript_dir / v.name / (std::to_string(d) + ".json");
          std::ofstream out(path, std::ios::trunc);
          out << transcript(s).dump() << '\n';
          if (!out) throw Error(ErrorCode::IoError, "cannot write transcript", path.string());
        }
      } catch (const Error& e) {
        if (e.code() == ErrorCode::IoError) throw;
        res.failures[d] = e.what();
        log(LogLevel::Warning, "variant " + v.name + " dialogue " + std::to_string(d) +
                                   " failed: " + e.what());
        if (opts.strict) excluded[d] = true;
      }
    }

    res.first_hit = first_hit_turns(res.ranks, cfg.hit_k);
    std::vector<FirstHit> counted;
    for (std::size_t d = 0; d < ds.entries.size(); ++d) {
      if (excluded[d]) {
        ++res.excluded;
      } else {
        counted.push_back(res.first_hit[d]);
      }
    }
    res.curve = hits_at_k_curve(counted, report.T, counted.size());
    res.seconds = std::chrono::duration<double>(Clock::now() - start).count();
    report.variants.push_back(std::move(res));
  }
  report.total_seconds = std::chrono::duration<double>(Clock::now() - run_start).count();
  return report;
}

json report_to_json(const RunReport& r, bool include_timing) {
  json variants = json::array();
  for (const auto& v : r.variants) {
    json first_hit = json::array();
    for (const auto& f : v.first_hit) first_hit.push_back(optional_json(f));
    json ranks = json::array();
    for (const auto& row : v.ranks) {
      json jr = json::array();
      for (const auto& x : row) jr.push_back(x ? json(*x) : json(nullptr));
      ranks.push_back(std::move(jr));
    }
    json jv = {{"name", v.name},
               {"curve", v.curve},
               {"first_hit", first_hit},
               {"ranks", ranks},
               {"failures", v.failures},
               {"excluded", v.excluded}};
    if (include_timing) jv["seconds"] = v.seconds;
    variants.push_back(std::move(jv));
  }
  json out = {{"k", r.k}, {"T", r.T}, {"n", r.n}, {"config", r.config}, {"variants", variants}};
  if (include_timing) out["total_seconds"] = r.total_seconds;
  return out;
}

RunReport report_from_json(const json& j) {
  try {
    RunReport r;
    r.k = j.at("k").get<unsigned>();
    r.T = j.at("T").get<unsigned>();
    r.n = j.at("n").get<std::size_t>();
    r.config = j.at("config");
    r.total_seconds = j.value("total_seconds", 0.0);
    for (const auto& jv : j.at("variants")) {
      VariantResult v;
      v.name = jv.at("name").get<std::string>();
      v.curve = jv.at("curve").get<HitsCurve>();
      for (const auto& f : jv.at("first_hit")) {
        v.first_hit.push_back(f.is_null() ? FirstHit{} : FirstHit{f.get<unsigned>()});
      }
      for (const auto& jr : jv.at("ranks")) {
        std::vector<std::optional<std::size_t>> row;
        for (const auto& x : jr) {
          row.push_back(x.is_null() ? std::optional<std::size_t>{} : x.get<std::size_t>());
        }
        v.ranks.push_back(std::move(row));
      }
      v.failures = jv.at("failures").get<std::vector<std::string>>();
      v.excluded = jv.at("excluded").get<std::size_t>();
      v.seconds = jv.value("seconds", 0.0);
      r.variants.push_back(std::move(v));
    }
    return r;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::FormatError, "malformed run report", e.what());
  }
}

std::string report_to_csv(const RunReport& r) {
  std::string out = "variant,turn,hits_at_k,n\n";
  for (const auto& v : r.variants) {
    const std::size_t n = r.n - v.excluded;
    for (std::size_t t = 0; t < v.curve.size(); ++t) {
      out += v.name + "," + std::to_string(t) + "," + format_double(v.curve[t]) + "," +
             std::to_string(n) + "\n";
    }
  }
  return out;
}

void emit_report(const RunReport& r, const std::filesystem::path& path, ReportFormat format,
                 bool include_timing) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot open report for writing", path.string());
  if (format == ReportFormat::Json) {
    out << report_to_json(r, include_timing).dump(2) << '\n';
  } else {
    out << report_to_csv(r);
  }
  if (!out) throw Error(ErrorCode::IoError, "failed writing report", path.string());
}

}  // namespace dar
