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

#include "catn/run_config.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <functional>
#include <istream>
#include <map>
#include <sstream>

#include "catn/error.hpp"

namespace catn {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::size_t to_size(std::string_view key, std::string_view v) {
  std::size_t out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) {
    throw ConfigError("'" + std::string(key) + "' expects a non-negative integer, got '" +
                      std::string(v) + "'");
  }
  return out;
}

std::uint64_t to_u64(std::string_view key, std::string_view v) {
  std::uint64_t out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) {
    throw ConfigError("'" + std::string(key) + "' expects an unsigned integer, got '" +
                      std::string(v) + "'");
  }
  return out;
}

double to_double(std::string_view key, std::string_view v) {
  const std::string s(v);
  try {
    std::size_t used = 0;
    const double out = std::stod(s, &used);
    if (used == s.size()) return out;
  } catch (const std::exception&) {
  }
  throw ConfigError("'" + std::string(key) + "' expects a number, got '" + s + "'");
}

bool to_bool(std::string_view key, std::string_view v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError("'" + std::string(key) + "' expects true or false, got '" + std::string(v) +
                    "'");
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

struct Field {
  std::function<void(RunConfig&, std::string_view key, std::string_view value)> set;
  std::function<std::string(const RunConfig&)> get;
};

template <typename Member>
Field size_field(Member member) {
  return {[member](RunConfig& c, std::string_view k, std::string_view v) {
            member(c) = to_size(k, v);
          },
          [member](const RunConfig& c) {
            return std::to_string(member(const_cast<RunConfig&>(c)));
          }};
}

template <typename Member>
Field double_field(Member member) {
  return {[member](RunConfig& c, std::string_view k, std::string_view v) {
            member(c) = to_double(k, v);
          },
          [member](const RunConfig& c) { return fmt(member(const_cast<RunConfig&>(c))); }};
}

template <typename Member>
Field bool_field(Member member) {
  return {[member](RunConfig& c, std::string_view k, std::string_view v) {
            member(c) = to_bool(k, v);
          },
          [member](const RunConfig& c) {
            return std::string(member(const_cast<RunConfig&>(c)) ? "true" : "false");
          }};
}

template <typename Member>
Field path_field(Member member) {
  return {[member](RunConfig& c, std::string_view, std::string_view v) {
            member(c) = std::filesystem::path(std::string(v));
          },
          [member](const RunConfig& c) { return member(const_cast<RunConfig&>(c)).string(); }};
}

#define CATN_MEMBER(expr) [](RunConfig& c) -> auto& { return c.expr; }

const std::vector<std::pair<std::string, Field>>& fields() {
  static const std::vector<std::pair<std::string, Field>> table = {
      {"source", path_field(CATN_MEMBER(source_path))},
      {"target", path_field(CATN_MEMBER(target_path))},
      {"data_dir", path_field(CATN_MEMBER(data_dir))},
      {"embeddings", path_field(CATN_MEMBER(embeddings_path))},
      {"stopwords", path_field(CATN_MEMBER(stopwords_path))},
      {"min_user", size_field(CATN_MEMBER(min_user))},
      {"min_item", size_field(CATN_MEMBER(min_item))},
      {"doc_length", size_field(CATN_MEMBER(corpus.doc_length))},
      {"vocab_cap", size_field(CATN_MEMBER(corpus.vocab_cap))},
      {"df_cap", double_field(CATN_MEMBER(corpus.df_cap))},
      {"embed_dim", size_field(CATN_MEMBER(hp.embed_dim))},
      {"filters", size_field(CATN_MEMBER(hp.filters))},
      {"window", size_field(CATN_MEMBER(hp.window))},
      {"latent", size_field(CATN_MEMBER(hp.latent))},
      {"aspects", size_field(CATN_MEMBER(hp.aspects))},
      {"leaky_alpha", double_field(CATN_MEMBER(hp.leaky_alpha))},
      {"keep_prob", double_field(CATN_MEMBER(hp.keep_prob))},
      {"init_scale", double_field(CATN_MEMBER(hp.init_scale))},
      {"train_embeddings", bool_field(CATN_MEMBER(hp.train_embeddings))},
      {"learning_rate", double_field(CATN_MEMBER(train.learning_rate))},
      {"batch_size", size_field(CATN_MEMBER(train.batch_size))},
      {"l2", double_field(CATN_MEMBER(train.l2))},
      {"max_epochs", size_field(CATN_MEMBER(train.max_epochs))},
      {"patience", size_field(CATN_MEMBER(train.patience))},
      {"variant",
       {[](RunConfig& c, std::string_view, std::string_view v) { c.train.variant = parse_variant(v); },
        [](const RunConfig& c) { return std::string(variant_name(c.train.variant)); }}},
      {"adam_beta1", double_field(CATN_MEMBER(train.beta1))},
      {"adam_beta2", double_field(CATN_MEMBER(train.beta2))},
      {"adam_epsilon", double_field(CATN_MEMBER(train.epsilon))},
      {"history_wall_clock", bool_field(CATN_MEMBER(train.history_wall_clock))},
      {"eta", double_field(CATN_MEMBER(eta))},
      {"seed",
       {[](RunConfig& c, std::string_view k, std::string_view v) { c.seed = to_u64(k, v); },
        [](const RunConfig& c) { return std::to_string(c.seed); }}},
      {"synth_overlap_users", size_field(CATN_MEMBER(synth.overlap_users))},
      {"synth_extra_users", size_field(CATN_MEMBER(synth.extra_users))},
      {"synth_items", size_field(CATN_MEMBER(synth.items))},
      {"synth_topics", size_field(CATN_MEMBER(synth.topics))},
      {"synth_items_per_user", size_field(CATN_MEMBER(synth.items_per_user))},
      {"synth_liked_topics", size_field(CATN_MEMBER(synth.liked_topics))},
      {"synth_noise", double_field(CATN_MEMBER(synth.noise))},
      {"synth_group_size", size_field(CATN_MEMBER(synth.group_size))},
      {"synth_filler_size", size_field(CATN_MEMBER(synth.filler_size))},
      {"synth_review_features", size_field(CATN_MEMBER(synth.review_features))},
      {"synth_review_opinions", size_field(CATN_MEMBER(synth.review_opinions))},
      {"synth_review_fillers", size_field(CATN_MEMBER(synth.review_fillers))},
  };
  return table;
}

#undef CATN_MEMBER

const Field& field(std::string_view key) {
  for (const auto& [name, f] : fields()) {
    if (name == key) return f;
  }
  throw ConfigError("unknown config key '" + std::string(key) + "'");
}

}  // namespace

void RunConfig::set(std::string_view key, std::string_view value) {
  field(key).set(*this, key, trim(value));
}

std::string RunConfig::get(std::string_view key) const { return field(key).get(*this); }

const std::vector<std::string>& RunConfig::keys() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> out;
    for (const auto& [name, f] : fields()) out.push_back(name);
    return out;
  }();
  return names;
}

void RunConfig::validate() const {
  corpus_config().validate();
  hyper().validate();
  train_config().validate();
  if (!(eta > 0.0 && eta <= 1.0)) throw ConfigError("eta must be in (0, 1]");
  if (!stopwords_path.empty() && !std::filesystem::exists(stopwords_path)) {
    throw ConfigError("stopword file not found: " + stopwords_path.string());
  }
  if (!embeddings_path.empty() && !std::filesystem::exists(embeddings_path)) {
    throw ConfigError("embedding file not found: " + embeddings_path.string());
  }
}

CorpusConfig RunConfig::corpus_config() const {
  CorpusConfig c = corpus;
  c.seed = seed;
  if (!stopwords_path.empty()) {
    std::ifstream in(stopwords_path);
    if (!in) throw ConfigError("cannot read stopword file " + stopwords_path.string());
    c.stopwords.clear();
    std::string line;
    while (std::getline(in, line)) {
      const std::string w = trim(line);
      if (!w.empty() && w[0] != '#') c.stopwords.insert(w);
    }
  }
  return c;
}

HyperParams RunConfig::hyper() const {
  HyperParams h = hp;
  h.doc_length = corpus.doc_length;
  return h;
}

TrainConfig RunConfig::train_config() const {
  TrainConfig t = train;
  t.seed = seed;
  return t;
}

SynthConfig RunConfig::synth_config() const {
  SynthConfig s = synth;
  s.seed = seed;
  return s;
}

std::string RunConfig::to_text() const {
  std::string out;
  for (const auto& [name, f] : fields()) out += name + " = " + f.get(*this) + "\n";
  return out;
}

void RunConfig::apply(std::istream& in, std::string_view source_name) {
  RunConfig next = *this;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(std::string(source_name) + ":" + std::to_string(line_no) +
                        ": expected 'key = value'");
    }
    try {
      next.set(trim(std::string_view(t).substr(0, eq)), std::string_view(t).substr(eq + 1));
    } catch (const ConfigError& e) {
      throw ConfigError(std::string(source_name) + ":" + std::to_string(line_no) + ": " +
                        e.what());
    }
  }
  *this = std::move(next);
}

void RunConfig::apply_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  apply(in, path.string());
}

RunConfig RunConfig::parse(std::istream& in, std::string_view source_name) {
  RunConfig cfg;
  cfg.apply(in, source_name);
  return cfg;
}

RunConfig RunConfig::load(const std::filesystem::path& path) {
  RunConfig cfg;
  cfg.apply_file(path);
  return cfg;
}

void RunConfig::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << to_text();
}

}  // namespace catn
