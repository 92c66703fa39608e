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

// Small end-to-end fixtures shared by the training, evaluation and CLI suites.

#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>

#include "catn/pipeline.hpp"
#include "catn/run_config.hpp"
#include "catn/synthetic.hpp"

namespace fixture {

inline catn::RunConfig tiny_config(std::uint64_t seed = 1) {
  catn::RunConfig cfg;
  for (const auto& [k, v] : std::initializer_list<std::pair<const char*, const char*>>{
           {"min_user", "1"},          {"min_item", "1"},         {"doc_length", "16"},
           {"embed_dim", "6"},         {"filters", "4"},          {"latent", "3"},
           {"aspects", "2"},           {"keep_prob", "0.9"},      {"init_scale", "0.5"},
           {"train_embeddings", "true"}, {"learning_rate", "0.01"}, {"batch_size", "16"},
           {"l2", "0.0001"},           {"max_epochs", "4"},       {"patience", "2"},
           {"history_wall_clock", "false"},
           {"synth_overlap_users", "12"}, {"synth_extra_users", "3"}, {"synth_items", "6"},
           {"synth_topics", "2"},      {"synth_items_per_user", "3"}, {"synth_group_size", "2"},
           {"synth_filler_size", "3"}}) {
    cfg.set(k, v);
  }
  cfg.seed = seed;
  return cfg;
}

inline catn::Corpus tiny_corpus(const catn::RunConfig& cfg) {
  auto data = catn::generate_synthetic(cfg.synth_config());
  return catn::build_corpus(std::move(data.source), std::move(data.target), cfg);
}

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// Fresh empty directory under the system temp dir.
inline std::filesystem::path scratch(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("catn_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace fixture
