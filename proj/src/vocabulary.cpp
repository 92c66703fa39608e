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

#include "catn/vocabulary.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <unordered_set>

#include "catn/error.hpp"

namespace catn {

const std::set<std::string>& default_stopwords() {
  // Common English function words.
  static const std::set<std::string> words{
      "a", "about", "above", "after", "again", "against", "all", "am", "an", "and",
      "any", "are", "as", "at", "be", "because", "been", "before", "being", "below",
      "between", "both", "but", "by", "can", "could", "did", "do", "does", "doing",
      "down", "during", "each", "few", "for", "from", "further", "had", "has", "have",
      "having", "he", "her", "here", "hers", "herself", "him", "himself", "his", "how",
      "i", "if", "in", "into", "is", "it", "its", "itself", "just", "me",
      "more", "most", "my", "myself", "no", "nor", "not", "now", "of", "off",
      "on", "once", "only", "or", "other", "our", "ours", "ourselves", "out", "over",
      "own", "s", "same", "she", "should", "so", "some", "such", "t", "than",
      "that", "the", "their", "theirs", "them", "themselves", "then", "there", "these", "they",
      "this", "those", "through", "to", "too", "under", "until", "up", "very", "was",
      "we", "were", "what", "when", "where", "which", "while", "who", "whom", "why",
      "will", "with", "would", "you", "your", "yours", "yourself", "yourselves"};
  return words;
}

void CorpusConfig::validate() const {
  if (doc_length == 0) throw ConfigError("doc_length must be positive");
  if (!(df_cap > 0.0 && df_cap <= 1.0)) throw ConfigError("df_cap must be in (0, 1]");
  if (vocab_cap == 0) throw ConfigError("vocab_cap must be positive");
}

Vocabulary::Vocabulary(std::vector<std::string> words, std::vector<double> scores)
    : words_(std::move(words)), scores_(std::move(scores)) {
  if (words_.size() != scores_.size()) {
    throw DataError("vocabulary: word and score counts differ");
  }
  for (std::size_t j = 0; j < words_.size(); ++j) {
    if (!index_.emplace(words_[j], static_cast<std::uint32_t>(j + 1)).second) {
      throw DataError("vocabulary: duplicate word '" + words_[j] + "'");
    }
  }
}

std::optional<std::uint32_t> Vocabulary::id(std::string_view word) const {
  auto it = index_.find(std::string(word));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

const std::string& Vocabulary::word(std::uint32_t id) const {
  static const std::string pad = "<pad>";
  if (id == kPad) return pad;
  if (id > words_.size()) throw DataError("vocabulary: id " + std::to_string(id) + " out of range");
  return words_[id - 1];
}

double Vocabulary::score(std::uint32_t id) const {
  if (id == kPad || id > words_.size()) {
    throw DataError("vocabulary: id " + std::to_string(id) + " has no score");
  }
  return scores_[id - 1];
}

std::vector<std::uint32_t> Vocabulary::encode(std::string_view text) const {
  std::vector<std::uint32_t> ids;
  for (const auto& tok : tokenize(text)) {
    if (auto it = index_.find(tok); it != index_.end()) ids.push_back(it->second);
  }
  return ids;
}

void Vocabulary::write(std::ostream& out) const {
  char buf[64];
  for (std::size_t j = 0; j < words_.size(); ++j) {
    std::snprintf(buf, sizeof buf, "%.17g", scores_[j]);
    out << words_[j] << '\t' << (j + 1) << '\t' << buf << '\n';
  }
}

Vocabulary Vocabulary::read(std::istream& in) {
  std::vector<std::string> words;
  std::vector<double> scores;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto t1 = line.find('\t');
    const auto t2 = t1 == std::string::npos ? t1 : line.find('\t', t1 + 1);
    if (t2 == std::string::npos) {
      throw DataError("vocabulary line " + std::to_string(line_no) + ": expected 3 fields");
    }
    const std::string id_text = line.substr(t1 + 1, t2 - t1 - 1);
    if (id_text != std::to_string(line_no)) {
      throw DataError("vocabulary line " + std::to_string(line_no) + ": ids must be dense and sorted");
    }
    words.push_back(line.substr(0, t1));
    const std::string score_text = line.substr(t2 + 1);
    char* end = nullptr;
    scores.push_back(std::strtod(score_text.c_str(), &end));
    if (end == score_text.c_str()) {
      throw DataError("vocabulary line " + std::to_string(line_no) + ": bad score");
    }
  }
  return Vocabulary(std::move(words), std::move(scores));
}

void Vocabulary::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError("cannot open " + path.string() + " for writing");
  write(out);
}

Vocabulary Vocabulary::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open vocabulary " + path.string());
  return read(in);
}

Vocabulary build_vocabulary(std::span<const Interaction> corpus, const CorpusConfig& cfg) {
  cfg.validate();
  std::map<std::string, std::size_t> term_count, doc_count;
  for (const auto& rec : corpus) {
    std::unordered_set<std::string> seen;
    for (auto& tok : tokenize(rec.review_text)) {
      ++term_count[tok];
      if (seen.insert(tok).second) ++doc_count[tok];
    }
  }
  const double n_docs = static_cast<double>(corpus.size());
  struct Scored {
    std::string word;
    double score;
  };
  std::vector<Scored> ranked;
  for (const auto& [word, tf] : term_count) {
    if (cfg.stopwords.contains(word)) continue;
    const double df = static_cast<double>(doc_count[word]);
    if (df / n_docs > cfg.df_cap) continue;
    ranked.push_back({word, static_cast<double>(tf) * std::log(n_docs / df)});
  }
  std::stable_sort(ranked.begin(), ranked.end(), [](const Scored& a, const Scored& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.word < b.word;
  });
  if (ranked.size() > cfg.vocab_cap) ranked.resize(cfg.vocab_cap);
  std::vector<std::string> words;
  std::vector<double> scores;
  for (auto& s : ranked) {
    words.push_back(std::move(s.word));
    scores.push_back(s.score);
  }
  return Vocabulary(std::move(words), std::move(scores));
}

}  // namespace catn
