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

#include "catn/evaluation.hpp"

#include <algorithm>
#include <cstdio>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>

#include "catn/error.hpp"
#include "catn/trainer.hpp"

namespace catn {

nlohmann::ordered_json EvalReport::to_json() const {
  nlohmann::ordered_json j;
  j["mse"] = mse;
  j["n_pairs"] = n_pairs;
  j["variant"] = std::string(variant_name(variant));
  j["eta"] = eta;
  j["seed"] = seed;
  j["per_user_mse"] = per_user_mse;
  return j;
}

EvalReport evaluate(Model& model, const Scenario& scenario, const DocumentStore& store,
                    bool test_split) {
  const auto pairs = scenario.heldout_pairs(test_split);
  if (pairs.empty()) throw DataError("evaluation split has no ratings");
  std::set<std::pair<std::string, std::string>> trained;
  for (const auto& p : scenario.training_pairs(Flow::target_flow)) trained.emplace(p.user, p.item);
  for (const auto& p : pairs) {
    if (!scenario.is_cold_start(p.user) || scenario.train_users.contains(p.user) ||
        store.has_user(Domain::target, p.user) || trained.contains({p.user, p.item})) {
      throw DataError("leakage: evaluated user '" + p.user +
                      "' has target-domain data visible to training");
    }
  }
  const auto predictions = predict_pairs(model, store, pairs);
  EvalReport report;
  report.n_pairs = pairs.size();
  report.variant = model.variant();
  report.eta = scenario.eta;
  report.seed = scenario.seed;
  std::vector<double> targets;
  std::map<std::string, std::pair<double, std::size_t>> per_user;
  for (std::size_t j = 0; j < pairs.size(); ++j) {
    targets.push_back(pairs[j].rating);
    const double e = pairs[j].rating - predictions[j];
    auto& acc = per_user[pairs[j].user];
    acc.first += e * e;
    ++acc.second;
  }
  report.mse = mean_squared_error(targets, predictions);
  for (const auto& [user, acc] : per_user) {
    report.per_user_mse[user] = acc.first / static_cast<double>(acc.second);
  }
  return report;
}

std::vector<WordWeight> rank_words(std::span<const double> beta, const Document& doc,
                                   const Vocabulary& vocab, std::size_t top_k) {
  if (beta.size() != doc.length()) {
    throw ShapeError("rank_words: " + std::to_string(beta.size()) + " weights for a document of " +
                     std::to_string(doc.length()) + " positions");
  }
  std::vector<WordWeight> words;
  std::map<std::uint32_t, std::size_t> slot;
  for (std::size_t j = 0; j < doc.length(); ++j) {
    if (!doc.mask[j]) continue;
    const std::uint32_t id = doc.token_ids[j];
    auto [it, fresh] = slot.emplace(id, words.size());
    if (fresh) words.push_back({vocab.word(id), 0.0, {}});
    auto& w = words[it->second];
    w.weight += beta[j];
    w.positions.push_back(j);
  }
  for (auto& w : words) w.weight /= static_cast<double>(w.positions.size());
  std::stable_sort(words.begin(), words.end(),
                   [](const WordWeight& a, const WordWeight& b) { return a.weight > b.weight; });
  if (words.size() > top_k) words.resize(top_k);
  return words;
}

std::pair<std::size_t, std::size_t> argmax_cell(const ad::Tensor& matrix) {
  if (matrix.rank() != 2 || matrix.size() == 0) {
    throw ShapeError("argmax_cell: expected a non-empty matrix, got " +
                     ad::shape_string(matrix.shape()));
  }
  std::size_t best = 0;
  for (std::size_t j = 1; j < matrix.size(); ++j) {
    if (matrix[j] > matrix[best]) best = j;
  }
  return {best / matrix.cols() + 1, best % matrix.cols() + 1};
}

namespace {

nlohmann::ordered_json matrix_json(const ad::Tensor& m) {
  auto rows = nlohmann::ordered_json::array();
  for (std::size_t r = 0; r < m.rows(); ++r) {
    auto row = nlohmann::ordered_json::array();
    for (std::size_t c = 0; c < m.cols(); ++c) row.push_back(m.at(r, c));
    rows.push_back(row);
  }
  return rows;
}

}  // namespace

nlohmann::ordered_json PairExplanation::to_json() const {
  nlohmann::ordered_json j;
  j["user"] = user;
  j["item"] = item;
  j["prediction"] = prediction;
  auto list = nlohmann::ordered_json::array();
  for (const auto& a : aspects) {
    nlohmann::ordered_json e;
    e["owner"] = a.owner;
    e["document"] = std::string(kind_name(a.kind));
    e["aspect"] = a.aspect;
    auto words = nlohmann::ordered_json::array();
    for (const auto& w : a.top_words) {
      words.push_back({{"word", w.word}, {"weight", w.weight}, {"positions", w.positions}});
    }
    e["top_words"] = words;
    list.push_back(e);
  }
  j["aspects"] = list;
  j["S"] = matrix_json(correlation);
  j["S_ui"] = matrix_json(matching);
  j["S_r"] = matrix_json(weighted);
  j["argmax"] = {argmax.first, argmax.second};
  return j;
}

PairExplanation explain_pair(Model& model, const DocumentStore& store, const Vocabulary& vocab,
                             const std::string& user, const std::string& item,
                             std::size_t top_k) {
  const RatingPair pair{user, item, 0.0, Flow::target_flow};
  const auto docs = pair_documents(store, pair);
  ad::Graph g(false);
  ModelGraph mg(g, model);
  PairTrace trace;
  forward_pair(mg, pair, docs, nullptr, &trace);

  PairExplanation out;
  out.user = user;
  out.item = item;
  out.prediction = trace.prediction;
  auto add = [&](const Document& doc, const std::vector<std::vector<double>>& attention) {
    for (std::size_t m = 0; m < attention.size(); ++m) {
      out.aspects.push_back({doc.owner, doc.kind, m + 1, rank_words(attention[m], doc, vocab, top_k)});
    }
  };
  add(docs.user, trace.user_attention);
  add(docs.aux, trace.aux_attention);
  add(docs.item, trace.item_attention);
  out.correlation = trace.correlation;
  out.matching = trace.matching;
  out.weighted = trace.weighted;
  out.argmax = argmax_cell(out.correlation);
  return out;
}

ad::Tensor correlation_matrix(Model& model) {
  ad::Graph g(false);
  ModelGraph mg(g, model);
  return g.value(mg.correlation(Flow::target_flow));
}

void write_matrix_csv(std::ostream& out, const ad::Tensor& matrix) {
  char cell[64];
  for (std::size_t r = 0; r < matrix.rows(); ++r) {
    for (std::size_t c = 0; c < matrix.cols(); ++c) {
      std::snprintf(cell, sizeof cell, "%.17g", matrix.at(r, c));
      out << (c ? "," : "") << cell;
    }
    out << '\n';
  }
}

ad::Tensor read_matrix_csv(std::istream& in) {
  std::vector<double> values;
  std::size_t rows = 0, cols = 0;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::size_t n = 0;
    while (std::getline(ss, cell, ',')) {
      try {
        std::size_t used = 0;
        values.push_back(std::stod(cell, &used));
        if (used != cell.size()) throw std::invalid_argument(cell);
      } catch (const std::exception&) {
        throw DataError("matrix csv line " + std::to_string(rows + 1) + ": bad number '" + cell +
                        "'");
      }
      ++n;
    }
    if (rows == 0) cols = n;
    if (n != cols || n == 0) {
      throw DataError("matrix csv line " + std::to_string(rows + 1) + ": expected " +
                      std::to_string(cols) + " columns");
    }
    ++rows;
  }
  if (rows == 0) throw DataError("matrix csv is empty");
  return ad::Tensor({rows, cols}, std::move(values));
}

}  // namespace catn
