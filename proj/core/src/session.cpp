// Copyright 2026 The DAR Authors
// SPDX-License-Identifier: Apache-2.0

#include "dar/session.hpp"

#include <future>

#include <nlohmann/json.hpp>

#include "json_util.hpp"
#include "dar/base64.hpp"
#include "dar/hashing.hpp"
#include "dar/log.hpp"

namespace dar {

namespace {

using json = nlohmann::json;

constexpr std::string_view kFallbackQuestion = "Can you describe the image in more detail?";

class UnavailableLlm final : public LlmCompleter {
 public:
  std::string complete(std::string_view, double, int) const override {
    throw Error(ErrorCode::BackendFailure, "no LLM backend configured");
  }
};

const LlmCompleter& llm_or_unavailable(const Backends& b) {
  static const UnavailableLlm unavailable;
  return b.llm ? *b.llm : unavailable;
}

std::string first_line(std::string_view text) {
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto nl = text.find('\n', pos);
    auto line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    const auto b = line.find_first_not_of(" \t\r");
    if (b != std::string_view::npos) {
      const auto e = line.find_last_not_of(" \t\r");
      return std::string(line.substr(b, e - b + 1));
    }
    if (nl == std::string_view::npos) break;
    pos = nl + 1;
  }
  return {};
}

json embedding_json(const Embedding& e) { return json(std::vector<float>(e.values().begin(), e.values().end())); }

json ranking_json(const RankedList& r) {
  json out = json::array();
  for (const auto& s : r) out.push_back({{"id", s.id}, {"score", s.score}});
  return out;
}

}  // namespace

std::string_view to_string(SessionStatus s) {
  switch (s) {
    case SessionStatus::Active: return "active";
    case SessionStatus::Hit: return "hit";
    case SessionStatus::Exhausted: return "exhausted";
  }
  return "unknown";
}

void SessionConfig::validate() const {
  if (T < 1) throw Error(ErrorCode::InvalidArgument, "T must be >= 1");
  if (hit_k < 1) throw Error(ErrorCode::InvalidArgument, "hit_k must be >= 1");
  if (token_budget < 1) throw Error(ErrorCode::InvalidArgument, "token_budget must be >= 1");
  if (r1_temperature < 0.0 || r2_temperature < 0.0) {
    throw Error(ErrorCode::InvalidArgument, "temperatures must be >= 0");
  }
  if (image_width == 0 || image_height == 0) {
    throw Error(ErrorCode::InvalidArgument, "image size must be positive");
  }
}

ReformulateOptions SessionConfig::reformulate_options() const {
  ReformulateOptions o;
  o.token_budget = token_budget;
  o.r1_temperature = r1_temperature;
  o.r2_temperature = r2_temperature;
  o.templates = templates;
  return o;
}

Session Session::create(std::string id, std::string d0, SessionConfig cfg,
                        std::shared_ptr<const EmbeddingIndex> index, Backends backends,
                        std::optional<ImageId> target) {
  cfg.validate();
  if (!index || index->empty()) {
    throw Error(ErrorCode::InvalidArgument, "session needs a non-empty index");
  }
  if (!backends.text) throw Error(ErrorCode::InvalidArgument, "session needs a text encoder");
  if (target && !index->find(*target)) {
    throw Error(ErrorCode::UnknownTarget, "target is not in the corpus", std::to_string(*target));
  }

  Session s;
  s.id_ = std::move(id);
  s.cfg_ = std::move(cfg);
  s.index_ = std::move(index);
  s.backends_ = std::move(backends);
  s.target_ = target;
  s.context_.initial_description = std::move(d0);
  s.context_.validate(s.cfg_.T);
  s.run_turn({}, {});
  return s;
}

const TurnRecord& Session::submit_turn(std::string question, std::string answer) {
  if (status_ == SessionStatus::Hit) {
    throw Error(ErrorCode::SessionClosed, "session already reached its target", id_);
  }
  if (context_.turns.size() >= cfg_.T) {
    throw Error(ErrorCode::TurnLimitExceeded, "session used all of its turns", id_);
  }
  if (status_ != SessionStatus::Active) {
    throw Error(ErrorCode::SessionClosed, "session is closed", id_);
  }
  context_.turns.push_back({question, answer});
  try {
    run_turn(std::move(question), std::move(answer));
  } catch (...) {
    context_.turns.pop_back();
    throw;
  }
  return records_.back();
}

std::vector<GeneratedImage> Session::generate_images(
    const std::vector<std::string>& prompts, unsigned turn,
    std::vector<GenerationFailure>& failures) const {
  struct Outcome {
    std::optional<GeneratedImage> image;
    std::optional<GenerationFailure> failure;
  };

  auto one = [&](unsigned k) -> Outcome {
    const std::string& prompt = prompts[k - 1];
    const std::uint64_t seed = derive_generation_seed(cfg_.seed_base, id_, turn, k);
    try {
      if (!backends_.generator) throw Error(ErrorCode::BackendFailure, "no generator configured");
      if (!backends_.image) throw Error(ErrorCode::BackendFailure, "no image encoder configured");
      ImageRef ref = backends_.generator->generate_image(
          {prompt, seed, cfg_.image_width, cfg_.image_height});
      ref.provenance = GenerationProvenance{prompt, seed, turn, k};
      Embedding e = l2_normalize(backends_.image->encode_image(ref));
      if (e.dim() != index_->dim()) {
        throw Error(ErrorCode::DimMismatch, "image embedding dim does not match the index");
      }
      return {GeneratedImage{k, prompt, seed, std::move(ref), std::move(e)}, std::nullopt};
    } catch (const Error& e) {
      return {std::nullopt, GenerationFailure{k, prompt, seed, e.code(), e.what()}};
    } catch (const std::exception& e) {
      return {std::nullopt, GenerationFailure{k, prompt, seed, ErrorCode::BackendFailure, e.what()}};
    }
  };

  const auto K = static_cast<unsigned>(prompts.size());
  std::vector<Outcome> outcomes;
  outcomes.reserve(K);
  if (cfg_.parallel_generation && K > 1) {
    std::vector<std::future<Outcome>> futures;
    for (unsigned k = 1; k <= K; ++k) futures.push_back(std::async(std::launch::async, one, k));
    for (auto& f : futures) outcomes.push_back(f.get());
  } else {
    for (unsigned k = 1; k <= K; ++k) outcomes.push_back(one(k));
  }

  std::vector<GeneratedImage> images;
  for (auto& o : outcomes) {
    if (o.image) {
      images.push_back(std::move(*o.image));
    } else {
      log(LogLevel::Warning, "session " + id_ + " turn " + std::to_string(turn) + " image " +
                                 std::to_string(o.failure->k) + " dropped: " + o.failure->message);
      failures.push_back(std::move(*o.failure));
    }
  }
  return images;
}

void Session::run_turn(std::string question, std::string answer) {
  TurnRecord rec;
  rec.turn = static_cast<unsigned>(records_.size());
  rec.question = std::move(question);
  rec.answer = std::move(answer);

  const auto opts = cfg_.reformulate_options();
  if (cfg_.reformulation == RefineMethod::R1) {
    rec.refined = reformulate_dialogue(context_, llm_or_unavailable(backends_), opts);
  } else {
    rec.refined = concat_context(context_);
    rec.refined.text = truncate_to_budget(rec.refined.text, cfg_.token_budget);
  }

  if (cfg_.K > 0) {
    rec.prompts = generate_prompts(rec.refined, cfg_.K, llm_or_unavailable(backends_), opts).prompts;
    rec.images = generate_images(rec.prompts, rec.turn, rec.failures);
  }

  try {
    rec.text_embedding = l2_normalize(backends_.text->encode_text(rec.refined.text));
  } catch (const Error& e) {
    throw Error(ErrorCode::BackendFailure, std::string("text encoding failed: ") + e.what(), id_);
  }
  if (rec.text_embedding.dim() != index_->dim()) {
    throw Error(ErrorCode::BackendFailure, "text embedding dim does not match the index", id_);
  }

  std::vector<Embedding> visual;
  visual.reserve(rec.images.size());
  for (const auto& img : rec.images) visual.push_back(img.embedding);
  rec.weights = cfg_.schedule.at(rec.turn);
  rec.fused = fuse(rec.text_embedding, visual, rec.weights, cfg_.aggregation);
  rec.ranking = index_->top_k(rec.fused, cfg_.hit_k);

  if (target_) {
    rec.target_rank = index_->rank_of(rec.fused, *target_);
    rec.hit = *rec.target_rank <= cfg_.hit_k;
  }

  records_.push_back(std::move(rec));
  if (records_.back().hit) {
    status_ = SessionStatus::Hit;
  } else if (context_.turns.size() >= cfg_.T) {
    status_ = SessionStatus::Exhausted;
  }
}

std::string Session::generate_question() const {
  if (status_ != SessionStatus::Active) {
    throw Error(ErrorCode::SessionClosed, "session is closed", id_);
  }
  try {
    std::string q = first_line(llm_or_unavailable(backends_).complete(
        build_question_prompt(context_), cfg_.r1_temperature, 64));
    for (std::string_view label : {"[Next Question]:", "Question:"}) {
      if (q.starts_with(label)) q = first_line(std::string_view(q).substr(label.size()));
    }
    if (!q.empty()) return q;
  } catch (const Error& e) {
    log(LogLevel::Warning, std::string("question generation failed: ") + e.what());
  }
  return std::string(kFallbackQuestion);
}

RankedList Session::current_ranking(std::size_t k) const {
  if (records_.empty()) throw Error(ErrorCode::NoTurns, "session has no turns", id_);
  return index_->top_k(records_.back().fused, k);
}

ImageId Session::finalize() const { return current_ranking(1).front().id; }

void Session::accept(ImageId image) {
  if (status_ != SessionStatus::Active) {
    throw Error(ErrorCode::SessionClosed, "session is closed", id_);
  }
  if (!index_->find(image)) {
    throw Error(ErrorCode::UnknownId, "accepted image is not in the corpus", std::to_string(image));
  }
  accepted_ = image;
  status_ = SessionStatus::Hit;
  records_.back().hit = true;
}

Embedding recompute_fused(const TurnRecord& record, Aggregation aggregation) {
  std::vector<Embedding> visual;
  for (const auto& img : record.images) visual.push_back(img.embedding);
  return fuse(record.text_embedding, visual, record.weights, aggregation);
}

json to_json(const SessionConfig& cfg) {
  json schedule = json::array();
  for (const auto& step : cfg.schedule.steps()) {
    schedule.push_back(
        {{"turn", step.turn}, {"alpha", step.weights.alpha}, {"beta", step.weights.beta}});
  }
  return {{"K", cfg.K},
          {"T", cfg.T},
          {"hit_k", cfg.hit_k},
          {"schedule", schedule},
          {"aggregation", to_string(cfg.aggregation)},
          {"token_budget", cfg.token_budget},
          {"seed_base", cfg.seed_base},
          {"reformulation", to_string(cfg.reformulation)},
          {"r1_temperature", cfg.r1_temperature},
          {"r2_temperature", cfg.r2_temperature},
          {"image_width", cfg.image_width},
          {"image_height", cfg.image_height},
          {"parallel_generation", cfg.parallel_generation}};
}

SessionConfig session_config_from_json(const json& j, SessionConfig c) {
  if (!j.is_object()) throw Error(ErrorCode::InvalidArgument, "session config must be an object");
  try {
    for (const auto& [key, v] : j.items()) {
      if (key == "K") c.K = json_count<unsigned>(v, key);
      else if (key == "T") c.T = json_count<unsigned>(v, key);
      else if (key == "hit_k") c.hit_k = json_count<unsigned>(v, key);
      else if (key == "aggregation") c.aggregation = parse_aggregation(v.get<std::string>());
      else if (key == "token_budget") c.token_budget = json_count<std::size_t>(v, key);
      else if (key == "seed_base") c.seed_base = json_count<std::uint64_t>(v, key);
      else if (key == "reformulation") c.reformulation = parse_refine_method(v.get<std::string>());
      else if (key == "r1_temperature") c.r1_temperature = v.get<double>();
      else if (key == "r2_temperature") c.r2_temperature = v.get<double>();
      else if (key == "image_width") c.image_width = json_count<std::uint32_t>(v, key);
      else if (key == "image_height") c.image_height = json_count<std::uint32_t>(v, key);
      else if (key == "parallel_generation") c.parallel_generation = v.get<bool>();
      else if (key == "schedule") {
        std::vector<WeightSchedule::Step> steps;
        for (const auto& s : v) {
          steps.push_back({json_count<unsigned>(s.at("turn"), "schedule.turn"),
                           FusionWeights{s.at("alpha").get<double>(), s.at("beta").get<double>()}});
        }
        c.schedule = WeightSchedule(std::move(steps));
      } else {
        throw Error(ErrorCode::InvalidArgument, "unknown session config key", key);
      }
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidArgument, "bad session config value", e.what());
  }
  c.validate();
  return c;
}

json to_json(const TurnRecord& r, bool include_embeddings) {
  json images = json::array();
  for (const auto& img : r.images) {
    json item = {{"k", img.k}, {"prompt", img.prompt}, {"seed", img.seed}};
    if (img.image.is_inline()) {
      item["media_type"] = img.image.media_type;
      item["image_b64"] = base64_encode(img.image.bytes);
    } else {
      item["uri"] = img.image.uri;
    }
    if (include_embeddings) item["embedding"] = embedding_json(img.embedding);
    images.push_back(std::move(item));
  }
  json failures = json::array();
  for (const auto& f : r.failures) {
    failures.push_back({{"k", f.k},
                        {"prompt", f.prompt},
                        {"seed", f.seed},
                        {"code", to_string(f.code)},
                        {"message", f.message}});
  }
  json out = {{"turn", r.turn},
              {"question", r.question},
              {"answer", r.answer},
              {"refined_query", r.refined.text},
              {"refine_method", to_string(r.refined.method)},
              {"prompts", r.prompts},
              {"images", images},
              {"failures", failures},
              {"weights", {{"alpha", r.weights.alpha}, {"beta", r.weights.beta}}},
              {"ranking", ranking_json(r.ranking)},
              {"hit", r.hit}};
  out["target_rank"] = r.target_rank ? json(*r.target_rank) : json(nullptr);
  if (include_embeddings) {
    out["text_embedding"] = embedding_json(r.text_embedding);
    out["fused"] = embedding_json(r.fused);
  }
  return out;
}

json transcript(const Session& s) {
  json turns = json::array();
  for (const auto& q : s.context().turns) turns.push_back({{"question", q.question}, {"answer", q.answer}});
  json records = json::array();
  for (const auto& r : s.records()) records.push_back(to_json(r, true));
  return {{"session_id", s.id()},
          {"config", to_json(s.config())},
          {"status", to_string(s.status())},
          {"context", {{"d0", s.context().initial_description}, {"turns", turns}}},
          {"target_id", s.target() ? json(*s.target()) : json(nullptr)},
          {"accepted_image_id", s.accepted() ? json(*s.accepted()) : json(nullptr)},
          {"records", records}};
}

}  // namespace dar
