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
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "catn/documents.hpp"
#include "catn/model.hpp"
#include "catn/scenario.hpp"
#include "catn/vocabulary.hpp"

#include <json.hpp>

namespace catn {

struct EvalReport {
  double mse = 0.0;
  std::size_t n_pairs = 0;
  std::map<std::string, double> per_user_mse;
  Variant variant = Variant::full;
  double eta = 1.0;
  std::uint64_t seed = 0;

  nlohmann::ordered_json to_json() const;
};

// Target-flow MSE over the held-out ratings of the test (or validation)
// users, dropout off. Throws DataError("leakage ...") if an evaluated user
// has visible target-domain reviews or training ratings.
EvalReport evaluate(Model& model, const Scenario& scenario, const DocumentStore& store,
                    bool test_split);

struct WordWeight {
  std::string word;
  double weight = 0.0;                 // beta averaged over the word's positions
  std::vector<std::size_t> positions;  // 0-based, ascending
};

// Ranks the unmasked words of `doc` by averaged attention; ties go to the
// word that occurs first.
std::vector<WordWeight> rank_words(std::span<const double> beta, const Document& doc,
                                   const Vocabulary& vocab, std::size_t top_k);

struct AspectExplanation {
  std::string owner;
  DocumentKind kind = DocumentKind::user;
  std::size_t aspect = 1;  // 1-based
  std::vector<WordWeight> top_words;
};

struct PairExplanation {
  std::string user;
  std::string item;
  double prediction = 0.0;
  std::vector<AspectExplanation> aspects;
  ad::Tensor correlation;  // S, rows = source aspects
  ad::Tensor matching;     // S_{u,i}
  ad::Tensor weighted;     // S^r
  std::pair<std::size_t, std::size_t> argmax{1, 1};

  nlohmann::ordered_json to_json() const;
};

// Explains the target-flow prediction of a source user for a target item.
PairExplanation explain_pair(Model& model, const DocumentStore& store, const Vocabulary& vocab,
                             const std::string& user, const std::string& item,
                             std::size_t top_k = 5);

// 1-based (row, column) of the largest entry; the first one in row-major
// order wins ties.
std::pair<std::size_t, std::size_t> argmax_cell(const ad::Tensor& matrix);

// S as the model uses it in the target flow (all ones for the basic variant).
ad::Tensor correlation_matrix(Model& model);

void write_matrix_csv(std::ostream& out, const ad::Tensor& matrix);
ad::Tensor read_matrix_csv(std::istream& in);

}  // namespace catn
