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
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "catn/text.hpp"

namespace catn {

const std::set<std::string>& default_stopwords();

struct CorpusConfig {
  std::size_t doc_length = 500;
  std::size_t vocab_cap = 20000;
  double df_cap = 0.5;
  std::set<std::string> stopwords = default_stopwords();
  std::uint64_t seed = 0;

  void validate() const;
};

// Word ids are dense 1..size(); id 0 is reserved for padding.
class Vocabulary {
 public:
  static constexpr std::uint32_t kPad = 0;

  Vocabulary() = default;
  // words[j] receives id j + 1.
  Vocabulary(std::vector<std::string> words, std::vector<double> scores);

  std::size_t size() const noexcept { return words_.size(); }
  std::optional<std::uint32_t> id(std::string_view word) const;
  const std::string& word(std::uint32_t id) const;
  double score(std::uint32_t id) const;

  // Tokenizes and drops out-of-vocabulary tokens.
  std::vector<std::uint32_t> encode(std::string_view text) const;

  // One "word<TAB>id<TAB>score" line per entry, ordered by id.
  void write(std::ostream& out) const;
  static Vocabulary read(std::istream& in);
  void save(const std::filesystem::path& path) const;
  static Vocabulary load(const std::filesystem::path& path);

  friend bool operator==(const Vocabulary& a, const Vocabulary& b) {
    return a.words_ == b.words_ && a.scores_ == b.scores_;
  }

 private:
  std::vector<std::string> words_;
  std::vector<double> scores_;
  std::unordered_map<std::string, std::uint32_t> index_;
};

// Each interaction's review is one document. A word is scored by its total
// corpus count times ln(N / df); stopwords and words whose relative document
// frequency exceeds df_cap are dropped, the top vocab_cap survive, ties go
// to the lexicographically smaller word.
Vocabulary build_vocabulary(std::span<const Interaction> corpus, const CorpusConfig& cfg);

}  // namespace catn
