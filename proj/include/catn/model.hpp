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
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "catn/checkpoint.hpp"
#include "catn/documents.hpp"
#include "catn/graph.hpp"
#include "catn/rng.hpp"
#include "catn/scenario.hpp"
#include "catn/tensor.hpp"

namespace catn {

enum class Variant : std::uint8_t { basic = 0, attn = 1, separate = 2, full = 3 };

std::string_view variant_name(Variant v);
Variant parse_variant(std::string_view name);

// Model-behaviour switches of each ablation.
struct VariantSwitches {
  bool attention = true;             // query-guided attention, else plain averaging
  bool learned_correlation = true;   // S from the global queries, else all ones
  bool per_flow_parameters = true;   // distinct extraction parameters per flow
  bool auxiliary = true;             // auxiliary-document path and fusion gate
};
VariantSwitches apply_variant(Variant v);

struct HyperParams {
  std::size_t embed_dim = 300;
  std::size_t filters = 50;
  std::size_t window = 3;
  std::size_t latent = 32;
  std::size_t aspects = 5;
  std::size_t doc_length = 500;
  double leaky_alpha = 0.01;
  double keep_prob = 0.8;
  double init_scale = 0.1;  // weights U[-s, s], embeddings U[-s/2, s/2]
  bool train_embeddings = false;

  void validate() const;
};

struct AspectGateParams {
  ad::Tensor linear_w;  // k x n
  ad::Tensor linear_b;  // k
  ad::Tensor gate_w;    // k x n
  ad::Tensor gate_b;    // k
};

// Extraction parameters of one learning flow.
struct FlowParams {
  ad::Tensor conv_w;  // n x s x d
  ad::Tensor conv_b;  // n
  std::vector<AspectGateParams> gates;
  // Auxiliary path; empty tensors unless the variant uses it.
  ad::Tensor aux_w;    // n x s x n
  ad::Tensor aux_b;    // n
  ad::Tensor fuse_w1;  // k x 2k
  ad::Tensor fuse_b1;  // k
  ad::Tensor fuse_w2;  // k x 2k
  ad::Tensor fuse_b2;  // k
};

struct SharedParams {
  ad::Tensor embeddings;      // (|V| + 1) x d, row 0 is PAD and stays zero
  ad::Tensor source_queries;  // M x k (V_s)
  ad::Tensor target_queries;  // M x k (V_t)
  ad::Tensor affinity;        // k x k (W)
};

class BiasTable {
 public:
  BiasTable() = default;
  explicit BiasTable(std::vector<std::string> ids);

  std::optional<std::size_t> row(std::string_view id) const;
  std::size_t size() const noexcept { return ids_.size(); }
  const std::vector<std::string>& ids() const noexcept { return ids_; }

  ad::Tensor values;  // size() x 1, empty when there are no ids

 private:
  std::vector<std::string> ids_;
  std::unordered_map<std::string, std::size_t> index_;
};

// b_u and b_i per domain, plus a learned domain-wide offset that serves as
// the whole user bias for users without a row (every cold-start user).
struct DomainBiases {
  BiasTable users;
  BiasTable items;
  ad::Tensor global = ad::Tensor::scalar(0.0);
};

class Model {
 public:
  struct NamedParam {
    std::string name;
    ad::Tensor* tensor;
    bool regularized;
    double init_scale;  // init half-width relative to HyperParams::init_scale, 0 for biases
  };

  Model(Variant variant, HyperParams hp, std::size_t vocab_size);
  Model(const Model&) = default;
  Model& operator=(const Model&) = default;
  Model(Model&&) = default;
  Model& operator=(Model&&) = default;

  // Weights and queries U[-s, s], embeddings U[-s/2, s/2] (s = init_scale),
  // biases 0, PAD row 0.
  void initialize(std::uint64_t seed);
  // word2vec text format; rows for words found in the file are overwritten.
  std::size_t load_embeddings(const std::filesystem::path& path, const Vocabulary& vocab);
  void set_bias_ids(Domain domain, std::vector<std::string> users, std::vector<std::string> items);

  Variant variant() const noexcept { return variant_; }
  VariantSwitches switches() const noexcept { return apply_variant(variant_); }
  const HyperParams& hyper() const noexcept { return hp_; }
  std::size_t vocab_size() const noexcept { return vocab_size_; }

  FlowParams& flow(Flow f);
  const FlowParams& flow(Flow f) const;
  SharedParams& shared() noexcept { return shared_; }
  const SharedParams& shared() const noexcept { return shared_; }
  DomainBiases& biases(Domain d) { return biases_[static_cast<int>(d)]; }
  const DomainBiases& biases(Domain d) const { return biases_[static_cast<int>(d)]; }

  // Every tensor the variant uses, in a fixed order, under its checkpoint
  // name. Bias tables appear once each (expanded per id in checkpoints).
  std::vector<NamedParam> parameters();
  // Tensors a loss of `f` depends on: its flow parameters, the shared ones
  // and the biases of the rating domain.
  std::vector<NamedParam> parameters_for(Flow f);
  std::size_t parameter_count() const;

  void zero_grad();

  std::vector<ad::NamedTensor> to_checkpoint() const;
  static Model from_checkpoint(std::span<const ad::NamedTensor> tensors);

 private:
  void allocate();
  std::vector<NamedParam> flow_parameters(FlowParams& fp, const std::string& prefix);
  void apply_trainability();

  Variant variant_;
  HyperParams hp_;
  std::size_t vocab_size_;
  std::vector<FlowParams> flows_;  // one or two
  SharedParams shared_;
  DomainBiases biases_[2];
};

// ---------------------------------------------------------------------------
// Graph construction

struct BoundGate {
  ad::Var linear_w, linear_b, gate_w, gate_b;
};

struct BoundFlow {
  ad::Var conv_w, conv_b;
  std::vector<BoundGate> gates;
  ad::Var aux_w, aux_b, fuse_w1, fuse_b1, fuse_w2, fuse_b2;
};

// Embedding lookup, same-padded convolution and ReLU: l x n.
ad::Var text_convolution(ad::Graph& g, const Document& doc, ad::Var embeddings,
                         const BoundFlow& flow);

// (W_m c_j + b_m) * sigmoid(W^g_m c_j + b^g_m) for every row c_j: l x k.
ad::Var aspect_gate(ad::Graph& g, ad::Var contextual, const BoundGate& gate);
// `aspect` is 0-based; throws when it is not below the number of gates.
ad::Var aspect_gate(ad::Graph& g, ad::Var contextual, const BoundFlow& flow, std::size_t aspect);

struct AspectReadout {
  ad::Var aspect;   // 1 x k
  ad::Var weights;  // l x 1 attention over positions
};

// With a query (1 x k): masked softmax of the per-position scores g_j . q and
// the weighted sum of the g_j. Without one: uniform weights over unmasked
// positions. An all-padding mask yields zero weights and a zero aspect.
AspectReadout aspect_attention(ad::Graph& g, ad::Var gated, std::optional<ad::Var> query,
                               std::span<const std::uint8_t> mask);

struct AspectExtraction {
  ad::Var aspects;                     // M x k
  std::vector<ad::Var> attention;      // per aspect, l x 1
};

// `queries` is V_s or V_t (M x k), or nullopt for uniform averaging.
AspectExtraction extract_aspects(ad::Graph& g, const Document& doc,
                                 std::optional<ad::Var> queries, const BoundFlow& flow,
                                 ad::Var embeddings);
// As extract_aspects with a second convolution (W_aux, b_aux) + ReLU on top
// of the text convolution.
AspectExtraction extract_aux_aspects(ad::Graph& g, const Document& doc,
                                     std::optional<ad::Var> queries, const BoundFlow& flow,
                                     ad::Var embeddings);

ad::Var fuse_auxiliary(ad::Graph& g, ad::Var user_aspects, ad::Var aux_aspects,
                       const BoundFlow& flow);

// LeakyReLU(V_s W V_t^T): rows are source aspects, columns target aspects.
ad::Var global_correlation(ad::Graph& g, ad::Var source_queries, ad::Var target_queries,
                           ad::Var affinity, double alpha);

struct Prediction {
  ad::Var rating;    // {1}
  ad::Var matching;  // S_{u,i} = A_u W A_i^T
  ad::Var weighted;  // S (*) S_{u,i}
};

Prediction predict(ad::Graph& g, ad::Var user_aspects, ad::Var item_aspects,
                   ad::Var correlation, ad::Var affinity, ad::Var user_bias, ad::Var item_bias);

// Binds a model's tensors onto a graph once, so every pair of a step shares
// the same parameter leaves.
class ModelGraph {
 public:
  ModelGraph(ad::Graph& graph, Model& model);

  ad::Graph& graph() noexcept { return graph_; }
  const Model& model() const noexcept { return model_; }
  const BoundFlow& flow(Flow f) const;
  ad::Var embeddings() const noexcept { return embeddings_; }
  std::optional<ad::Var> queries(Domain d) const;
  ad::Var affinity() const noexcept { return affinity_; }
  // S oriented so that rows index aspects of the user-document domain.
  ad::Var correlation(Flow f);
  // b-bar of the domain plus the user's row when it has one.
  ad::Var user_bias(Domain d, std::string_view user);
  ad::Var item_bias(Domain d, std::string_view item);

 private:
  ad::Graph& graph_;
  Model& model_;
  std::vector<BoundFlow> flows_;
  ad::Var embeddings_;
  std::optional<ad::Var> queries_[2];
  ad::Var affinity_;
  ad::Var user_table_[2], item_table_[2], global_[2];
  std::optional<ad::Var> base_correlation_;
  std::optional<ad::Var> correlation_[2];
};

struct PairDocuments {
  Document user;
  Document aux;
  Document item;
};

// User and auxiliary documents come from the user-document domain of the
// pair's flow, the item document from the rating domain, without the
// review of the pair itself.
PairDocuments pair_documents(const DocumentStore& store, const RatingPair& pair);

struct PairTrace {
  std::vector<std::vector<double>> user_attention;  // per aspect, length l
  std::vector<std::vector<double>> aux_attention;   // empty unless auxiliary
  std::vector<std::vector<double>> item_attention;
  ad::Tensor correlation;  // oriented S
  ad::Tensor matching;     // S_{u,i}
  ad::Tensor weighted;     // S^r
  double prediction = 0.0;
};

// One pair through the whole network. `dropout` non-null enables inverted
// dropout on the user (post-fusion) and item aspect matrices.
ad::Var forward_pair(ModelGraph& mg, const RatingPair& pair, const PairDocuments& docs,
                     Rng* dropout = nullptr, PairTrace* trace = nullptr);

}  // namespace catn
