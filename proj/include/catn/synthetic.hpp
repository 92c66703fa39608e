/* Copyright (c) 2026 The catn Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License. */

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "catn/text.hpp"

#include <json.hpp>

namespace catn {

// Two-domain toy world with planted topics. Each domain has `topics` topics;
// source topic p corresponds to target topic pairing[p]. A user likes a
// proper non-empty subset of source topics (exactly liked_topics of them when
// that is set, all of them when there is only one topic) and the paired
// target topics. Ratings are 2 + 3 * liked(item topic) plus uniform noise in
// [-noise, noise], clamped to [1, 5]. A review names feature words of the
// item's topic and like or dislike words of that topic, plus filler.
struct SynthConfig {
  std::size_t overlap_users = 20;
  std::size_t extra_users = 10;      // single-domain users per domain
  std::size_t items = 10;            // per domain; item j has topic j mod topics
  std::size_t topics = 3;
  std::size_t items_per_user = 6;
  std::size_t liked_topics = 0;      // per user; 0 draws a random proper subset
  double noise = 0.0;
  std::size_t group_size = 6;        // words per feature / like / dislike group
  std::size_t filler_size = 6;
  std::size_t review_features = 2;
  std::size_t review_opinions = 2;   // like or dislike words of the item topic
  std::size_t review_fillers = 2;
  std::uint64_t seed = 0;

  void validate() const;
};

struct SynthPlant {
  std::vector<std::size_t> pairing;  // source topic -> target topic
  // Word groups indexed [domain][topic].
  std::vector<std::vector<std::string>> feature_words[2];
  std::vector<std::vector<std::string>> like_words[2];
  std::vector<std::vector<std::string>> dislike_words[2];
  std::vector<std::string> filler_words;
  std::map<std::string, std::size_t> item_topic[2];
  std::map<std::string, std::vector<bool>> likes[2];  // per domain topic
  std::vector<std::string> overlap_users;

  // Topic whose feature, like or dislike group contains `word`, if any.
  std::optional<std::size_t> topic_of(Domain d, const std::string& word) const;
  nlohmann::ordered_json to_json() const;
};

struct SynthData {
  std::vector<Interaction> source;
  std::vector<Interaction> target;
  SynthPlant plant;
};

SynthData generate_synthetic(const SynthConfig& cfg);

// source.jsonl, target.jsonl and planted.json under `dir`.
void write_synthetic(const SynthData& data, const std::filesystem::path& dir);

}  // namespace catn
