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

#include "catn/synthetic.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <numeric>

#include "catn/error.hpp"
#include "catn/rng.hpp"

namespace catn {

void SynthConfig::validate() const {
  if (topics == 0 || topics > 16) throw ConfigError("synthetic topics must be in 1..16");
  if (overlap_users < 4) throw ConfigError("synthetic data needs at least 4 overlapping users");
  if (items < topics) throw ConfigError("synthetic items must be at least the topic count");
  if (items_per_user == 0 || items_per_user > items) {
    throw ConfigError("synthetic items_per_user must be in 1..items");
  }
  if (group_size == 0 || filler_size == 0) throw ConfigError("synthetic word groups are empty");
  if (!(noise >= 0.0)) throw ConfigError("synthetic noise must be non-negative");
  if (topics > 1 && liked_topics >= topics) {
    throw ConfigError("synthetic liked_topics must be below the topic count");
  }
}

std::optional<std::size_t> SynthPlant::topic_of(Domain d, const std::string& word) const {
  const int i = static_cast<int>(d);
  for (std::size_t t = 0; t < feature_words[i].size(); ++t) {
    const auto& f = feature_words[i][t];
    for (const auto* group : {&f, &like_words[i][t], &dislike_words[i][t]}) {
      if (std::find(group->begin(), group->end(), word) != group->end()) return t;
    }
  }
  return std::nullopt;
}

nlohmann::ordered_json SynthPlant::to_json() const {
  nlohmann::ordered_json j;
  j["pairing"] = pairing;
  for (Domain d : {Domain::source, Domain::target}) {
    const int i = static_cast<int>(d);
    nlohmann::ordered_json dom;
    dom["feature_words"] = feature_words[i];
    dom["like_words"] = like_words[i];
    dom["dislike_words"] = dislike_words[i];
    dom["item_topic"] = item_topic[i];
    nlohmann::ordered_json likes_json;
    for (const auto& [user, bits] : likes[i]) {
      std::vector<int> as_int(bits.begin(), bits.end());
      likes_json[user] = as_int;
    }
    dom["likes"] = likes_json;
    j[std::string(domain_name(d))] = dom;
  }
  j["filler_words"] = filler_words;
  j["overlap_users"] = overlap_users;
  return j;
}

namespace {

std::string numbered(const char* prefix, std::size_t n) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%s%03zu", prefix, n);
  return buf;
}

std::vector<bool> random_likes(std::size_t topics, std::size_t liked, Rng& rng) {
  std::vector<bool> likes(topics, true);
  if (topics == 1) return likes;
  if (liked > 0) {
    std::vector<std::size_t> order(topics);
    std::iota(order.begin(), order.end(), std::size_t{0});
    shuffle(std::span<std::size_t>(order), rng);
    for (std::size_t j = 0; j < topics; ++j) likes[order[j]] = j < liked;
    return likes;
  }
  const std::uint64_t patterns = (std::uint64_t{1} << topics) - 2;
  const std::uint64_t code = uniform_index(rng, patterns) + 1;
  for (std::size_t t = 0; t < topics; ++t) likes[t] = (code >> t) & 1;
  return likes;
}

}  // namespace

SynthData generate_synthetic(const SynthConfig& cfg) {
  cfg.validate();
  Rng rng(mix_seed(cfg.seed, 0x5E7D));
  SynthData data;
  SynthPlant& plant = data.plant;
  const std::size_t m = cfg.topics;

  plant.pairing.resize(m);
  std::iota(plant.pairing.begin(), plant.pairing.end(), std::size_t{0});
  shuffle(std::span<std::size_t>(plant.pairing), rng);

  for (Domain d : {Domain::source, Domain::target}) {
    const int i = static_cast<int>(d);
    const char* p = d == Domain::source ? "s" : "t";
    for (std::size_t t = 0; t < m; ++t) {
      auto group = [&](const char* kind) {
        std::vector<std::string> words;
        for (std::size_t w = 0; w < cfg.group_size; ++w) {
          words.push_back(std::string(p) + kind + std::to_string(t + 1) + "w" +
                          std::to_string(w + 1));
        }
        return words;
      };
      plant.feature_words[i].push_back(group("feat"));
      plant.like_words[i].push_back(group("like"));
      plant.dislike_words[i].push_back(group("dislike"));
    }
  }
  for (std::size_t w = 0; w < cfg.filler_size; ++w) {
    plant.filler_words.push_back("fill" + std::to_string(w + 1));
  }

  std::vector<std::string> users[2];
  for (std::size_t u = 0; u < cfg.overlap_users; ++u) {
    const std::string id = numbered("ou", u);
    plant.overlap_users.push_back(id);
    const auto likes = random_likes(m, cfg.liked_topics, rng);
    std::vector<bool> paired(m);
    for (std::size_t t = 0; t < m; ++t) paired[plant.pairing[t]] = likes[t];
    plant.likes[0][id] = likes;
    plant.likes[1][id] = paired;
    users[0].push_back(id);
    users[1].push_back(id);
  }
  for (Domain d : {Domain::source, Domain::target}) {
    const int i = static_cast<int>(d);
    for (std::size_t u = 0; u < cfg.extra_users; ++u) {
      const std::string id = numbered(d == Domain::source ? "sx" : "tx", u);
      plant.likes[i][id] = random_likes(m, cfg.liked_topics, rng);
      users[i].push_back(id);
    }
    for (std::size_t j = 0; j < cfg.items; ++j) {
      plant.item_topic[i][numbered(d == Domain::source ? "si" : "ti", j)] = j % m;
    }
  }

  for (Domain d : {Domain::source, Domain::target}) {
    const int i = static_cast<int>(d);
    auto& out = d == Domain::source ? data.source : data.target;
    std::vector<std::string> items;
    for (const auto& [id, topic] : plant.item_topic[i]) items.push_back(id);
    for (const auto& user : users[i]) {
      const auto& likes = plant.likes[i][user];
      std::vector<std::size_t> order(items.size());
      std::iota(order.begin(), order.end(), std::size_t{0});
      shuffle(std::span<std::size_t>(order), rng);
      order.resize(cfg.items_per_user);
      for (std::size_t j : order) {
        const std::size_t topic = plant.item_topic[i][items[j]];
        std::vector<std::string> words;
        const auto& feature = plant.feature_words[i][topic];
        for (std::size_t w = 0; w < cfg.review_features; ++w) {
          words.push_back(feature[uniform_index(rng, feature.size())]);
        }
        const auto& opinion =
            likes[topic] ? plant.like_words[i][topic] : plant.dislike_words[i][topic];
        for (std::size_t w = 0; w < cfg.review_opinions; ++w) {
          words.push_back(opinion[uniform_index(rng, opinion.size())]);
        }
        for (std::size_t w = 0; w < cfg.review_fillers; ++w) {
          words.push_back(plant.filler_words[uniform_index(rng, plant.filler_words.size())]);
        }
        shuffle(std::span<std::string>(words), rng);
        std::string text;
        for (const auto& w : words) text += (text.empty() ? "" : " ") + w;
        double rating = likes[topic] ? 5.0 : 2.0;
        if (cfg.noise > 0.0) rating += uniform_real(rng, -cfg.noise, cfg.noise);
        rating = std::clamp(rating, 1.0, 5.0);
        out.push_back({user, items[j], rating, text, d});
      }
    }
  }
  return data;
}

void write_synthetic(const SynthData& data, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw DataError("cannot create " + dir.string() + ": " + ec.message());
  write_interactions(dir / "source.jsonl", data.source);
  write_interactions(dir / "target.jsonl", data.target);
  std::ofstream plant(dir / "planted.json", std::ios::binary);
  if (!plant) throw DataError("cannot write " + (dir / "planted.json").string());
  plant << data.plant.to_json().dump(2) << '\n';
}

}  // namespace catn
