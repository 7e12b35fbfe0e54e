// Copyright 2026 The DAR Authors
// SPDX-License-Identifier: Apache-2.0

#include "synthetic.hpp"

#include <algorithm>
#include <array>
#include <random>
#include <set>
#include <stdexcept>
#include <tuple>

namespace dar::testing {

namespace {

const std::vector<std::string> kColors = {"red",   "blue",  "green", "yellow", "black",
                                          "white", "brown", "gray",  "orange", "pink"};
const std::vector<std::string> kSubjects = {
    "dog",   "cat",     "horse",   "bus",        "man",   "woman",    "child",
    "bird",  "car",     "boat",    "bicycle",    "train", "cow",      "sheep",
    "truck", "giraffe", "elephant", "motorcycle", "kite",  "umbrella"};
const std::vector<std::string> kActions = {"standing", "running", "sitting", "resting",
                                           "waiting",  "moving",  "turning", "posing",
                                           "jumping",  "leaning"};
const std::vector<std::string> kSettings = {
    "on a beach",       "in a park",         "on a city street", "in a kitchen",
    "in a field",       "near a lake",       "in a forest",      "on a bridge",
    "in a parking lot", "at a train station", "in a garden",     "on a mountain road",
    "in a living room", "at a market",       "in a desert"};
const std::vector<std::string> kObjects = {
    "bench",  "fence",   "tree",     "lamp post", "wooden table", "fountain",
    "statue", "bicycle rack", "stone wall", "mailbox", "flower pot", "picnic basket",
    "tent",   "ladder",  "barrel"};
const std::vector<std::string> kTimes = {"at night", "at sunset", "in the morning", "at noon",
                                         "at dusk"};
const std::vector<std::string> kWeather = {"in the rain", "in the snow", "on a sunny day",
                                           "in thick fog", "under cloudy skies"};

const std::vector<std::string> kFillerQuestions = {
    "is there anything else in the picture?", "are there any people around?",
    "can you see any text?", "is the picture blurry?", "is it an old photo?"};
const std::vector<std::string> kFillerAnswers = {"not that i can see", "i am not sure",
                                                 "no", "hard to say", "i do not think so"};

enum class Reveal { Color, Action, Setting, Object, Time, Weather };

std::string reveal_turn(Reveal r, const SceneSlots& s) {
  const auto& subj = kSubjects[s.subject];
  switch (r) {
    case Reveal::Color:
      return "what color is the " + subj + "? it is " + kColors[s.color];
    case Reveal::Action:
      return "what is the " + subj + " doing? it is " + kActions[s.action];
    case Reveal::Setting:
      return "where was the photo taken? " + kSettings[s.setting];
    case Reveal::Object:
      return "is there anything next to the " + subj + "? a " + kObjects[s.object];
    case Reveal::Time:
      return "what time of day is it? " + kTimes[s.time];
    case Reveal::Weather:
      return "what is the weather like? " + kWeather[s.weather];
  }
  return {};
}

}  // namespace

std::string caption_text(const SceneSlots& s) {
  return "a " + kColors[s.color] + " " + kSubjects[s.subject] + " " + kActions[s.action] + " " +
         kSettings[s.setting] + " near a " + kObjects[s.object] + " " + kTimes[s.time] + " " +
         kWeather[s.weather];
}

SyntheticBenchmark make_synthetic_benchmark(const SyntheticSpec& spec) {
  const std::size_t space = kColors.size() * kSubjects.size() * kActions.size() *
                            kSettings.size() * kObjects.size() * kTimes.size() * kWeather.size();
  if (spec.corpus_size == 0 || spec.corpus_size > space / 4) {
    throw std::invalid_argument("corpus size outside the synthetic slot space");
  }
  if (spec.dialogues > spec.corpus_size) {
    throw std::invalid_argument("more dialogues than corpus images");
  }

  std::mt19937_64 rng(spec.seed);
  auto pick = [&](std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng); };

  SyntheticBenchmark b;
  std::set<std::tuple<std::size_t, std::size_t, std::size_t, std::size_t, std::size_t,
                      std::size_t, std::size_t>>
      seen;
  while (b.scenes.size() < spec.corpus_size) {
    SceneSlots s{pick(kColors.size()),  pick(kSubjects.size()), pick(kActions.size()),
                 pick(kSettings.size()), pick(kObjects.size()), pick(kTimes.size()),
                 pick(kWeather.size())};
    if (!seen.emplace(s.color, s.subject, s.action, s.setting, s.object, s.time, s.weather).second) {
      continue;
    }
    const ImageId id = b.scenes.size();
    b.captions.push_back({id, "img/" + std::to_string(id), caption_text(s)});
    b.scenes.push_back(s);
  }

  std::vector<std::size_t> targets(spec.corpus_size);
  for (std::size_t i = 0; i < targets.size(); ++i) targets[i] = i;
  std::shuffle(targets.begin(), targets.end(), rng);
  targets.resize(spec.dialogues);

  b.dataset = nlohmann::json::array();
  for (std::size_t target : targets) {
    const auto& s = b.scenes[target];
    std::vector<std::string> turns;
    std::array<Reveal, 6> reveals = {Reveal::Color, Reveal::Action,  Reveal::Setting,
                                     Reveal::Object, Reveal::Time, Reveal::Weather};
    std::shuffle(reveals.begin(), reveals.end(), rng);
    for (auto r : reveals) turns.push_back(reveal_turn(r, s));
    while (turns.size() < spec.turns) {
      const auto pos = pick(turns.size() + 1);
      turns.insert(turns.begin() + static_cast<std::ptrdiff_t>(pos),
                   kFillerQuestions[pick(kFillerQuestions.size())] + " " +
                       kFillerAnswers[pick(kFillerAnswers.size())]);
    }
    turns.resize(spec.turns);

    nlohmann::json dialog = nlohmann::json::array();
    dialog.push_back("a photo of a " + kSubjects[s.subject]);
    for (auto& t : turns) dialog.push_back(std::move(t));
    b.dataset.push_back({{"img", "img/" + std::to_string(target)}, {"dialog", dialog}});
  }
  return b;
}

}  // namespace dar::testing
