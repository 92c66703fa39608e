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
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "catn/model.hpp"
#include "catn/synthetic.hpp"
#include "catn/trainer.hpp"
#include "catn/vocabulary.hpp"

namespace catn {

// Everything a command needs, read from a "key = value" text file. Lines
// starting with '#' are comments. One seed drives the corpus, the split, the
// initialization, batching, dropout and the synthetic generator.
struct RunConfig {
  std::filesystem::path source_path;
  std::filesystem::path target_path;
  std::filesystem::path data_dir;        // output of prepare, input of train
  std::filesystem::path embeddings_path;  // optional word2vec text file
  std::filesystem::path stopwords_path;   // optional, one word per line
  std::size_t min_user = 10;
  std::size_t min_item = 30;
  CorpusConfig corpus;
  HyperParams hp;
  TrainConfig train;
  double eta = 1.0;
  std::uint64_t seed = 0;
  SynthConfig synth;

  void set(std::string_view key, std::string_view value);
  std::string get(std::string_view key) const;
  static const std::vector<std::string>& keys();

  void validate() const;
  // Sub-configs with the shared seed and document length filled in.
  CorpusConfig corpus_config() const;
  HyperParams hyper() const;
  TrainConfig train_config() const;
  SynthConfig synth_config() const;

  std::string to_text() const;
  // Overrides the keys present in the input; nothing changes on error.
  void apply(std::istream& in, std::string_view source_name = "<config>");
  void apply_file(const std::filesystem::path& path);
  static RunConfig parse(std::istream& in, std::string_view source_name = "<config>");
  static RunConfig load(const std::filesystem::path& path);
  void save(const std::filesystem::path& path) const;
};

}  // namespace catn
