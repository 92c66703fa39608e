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

#include "catn/model.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>

#include "catn/error.hpp"
#include "catn/vocabulary.hpp"

namespace catn {

using ad::Tensor;
using ad::Var;

std::string_view variant_name(Variant v) {
  switch (v) {
    case Variant::basic: return "basic";
    case Variant::attn: return "attn";
    case Variant::separate: return "separate";
    case Variant::full: return "full";
  }
  return "unknown";
}

Variant parse_variant(std::string_view name) {
  if (name == "basic") return Variant::basic;
  if (name == "attn") return Variant::attn;
  if (name == "separate") return Variant::separate;
  if (name == "full") return Variant::full;
  throw ConfigError("unknown variant '" + std::string(name) +
                    "' (expected basic, attn, separate or full)");
}

VariantSwitches apply_variant(Variant v) {
  switch (v) {
    case Variant::basic: return {false, false, false, false};
    case Variant::attn: return {true, true, false, false};
    case Variant::separate: return {true, true, true, false};
    case Variant::full: return {true, true, true, true};
  }
  throw ConfigError("unknown variant");
}

void HyperParams::validate() const {
  if (embed_dim == 0 || filters == 0 || latent == 0 || aspects == 0 || doc_length == 0) {
    throw ConfigError("model dimensions must be positive");
  }
  if (window == 0 || window % 2 == 0) {
    throw ConfigError("window size must be odd, got " + std::to_string(window));
  }
  if (!(leaky_alpha > 0.0)) throw ConfigError("leaky_alpha must be positive");
  if (!(keep_prob > 0.0 && keep_prob <= 1.0)) throw ConfigError("keep_prob must be in (0, 1]");
  if (!(init_scale > 0.0)) throw ConfigError("init_scale must be positive");
}

BiasTable::BiasTable(std::vector<std::string> ids) : ids_(std::move(ids)) {
  for (std::size_t r = 0; r < ids_.size(); ++r) {
    if (!index_.emplace(ids_[r], r).second) throw DataError("duplicate bias id '" + ids_[r] + "'");
  }
  if (!ids_.empty()) {
    values = Tensor({ids_.size(), 1});
    values.set_requires_grad(true);
  }
}

std::optional<std::size_t> BiasTable::row(std::string_view id) const {
  auto it = index_.find(std::string(id));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

Model::Model(Variant variant, HyperParams hp, std::size_t vocab_size)
    : variant_(variant), hp_(hp), vocab_size_(vocab_size) {
  hp_.validate();
  allocate();
}

void Model::allocate() {
  const auto sw = switches();
  const std::size_t d = hp_.embed_dim, n = hp_.filters, s = hp_.window;
  const std::size_t k = hp_.latent, m = hp_.aspects;
  flows_.assign(sw.per_flow_parameters ? 2 : 1, FlowParams{});
  for (auto& fp : flows_) {
    fp.conv_w = Tensor({n, s, d});
    fp.conv_b = Tensor({n});
    fp.gates.resize(m);
    for (auto& gate : fp.gates) {
      gate.linear_w = Tensor({k, n});
      gate.linear_b = Tensor({k});
      gate.gate_w = Tensor({k, n});
      gate.gate_b = Tensor({k});
    }
    if (sw.auxiliary) {
      fp.aux_w = Tensor({n, s, n});
      fp.aux_b = Tensor({n});
      fp.fuse_w1 = Tensor({k, 2 * k});
      fp.fuse_b1 = Tensor({k});
      fp.fuse_w2 = Tensor({k, 2 * k});
      fp.fuse_b2 = Tensor({k});
    }
  }
  shared_.embeddings = Tensor({vocab_size_ + 1, d});
  if (sw.attention || sw.learned_correlation) {
    shared_.source_queries = Tensor({m, k});
    shared_.target_queries = Tensor({m, k});
  }
  shared_.affinity = Tensor({k, k});
  apply_trainability();
}

void Model::apply_trainability() {
  for (auto& p : parameters()) p.tensor->set_requires_grad(true);
  shared_.embeddings.set_requires_grad(hp_.train_embeddings);
}

FlowParams& Model::flow(Flow f) {
  if (flows_.size() == 1) return flows_[0];
  return flows_[f == Flow::target_flow ? 0 : 1];
}

const FlowParams& Model::flow(Flow f) const {
  return const_cast<Model*>(this)->flow(f);
}

std::vector<Model::NamedParam> Model::flow_parameters(FlowParams& fp, const std::string& prefix) {
  std::vector<NamedParam> out;
  out.push_back({prefix + ".conv.W", &fp.conv_w, true, 1.0});
  out.push_back({prefix + ".conv.b", &fp.conv_b, true, 0.0});
  for (std::size_t m = 0; m < fp.gates.size(); ++m) {
    const std::string g = prefix + ".gate." + std::to_string(m + 1);
    out.push_back({g + ".W", &fp.gates[m].linear_w, true, 1.0});
    out.push_back({g + ".b", &fp.gates[m].linear_b, true, 0.0});
    out.push_back({g + ".Wg", &fp.gates[m].gate_w, true, 1.0});
    out.push_back({g + ".bg", &fp.gates[m].gate_b, true, 0.0});
  }
  if (switches().auxiliary) {
    out.push_back({prefix + ".aux.W", &fp.aux_w, true, 1.0});
    out.push_back({prefix + ".aux.b", &fp.aux_b, true, 0.0});
    out.push_back({prefix + ".fuse.W1", &fp.fuse_w1, true, 1.0});
    out.push_back({prefix + ".fuse.b1", &fp.fuse_b1, true, 0.0});
    out.push_back({prefix + ".fuse.W2", &fp.fuse_w2, true, 1.0});
    out.push_back({prefix + ".fuse.b2", &fp.fuse_b2, true, 0.0});
  }
  return out;
}

namespace {

void append(std::vector<Model::NamedParam>& dst, std::vector<Model::NamedParam> src) {
  for (auto& p : src) dst.push_back(std::move(p));
}

}  // namespace

std::vector<Model::NamedParam> Model::parameters() {
  std::vector<NamedParam> out;
  append(out, flow_parameters(flows_[0], "flowA"));
  if (flows_.size() > 1) append(out, flow_parameters(flows_[1], "flowB"));
  out.push_back({"shared.E", &shared_.embeddings, hp_.train_embeddings, 0.5});
  if (shared_.source_queries.size() > 0) {
    out.push_back({"shared.Vs", &shared_.source_queries, true, 1.0});
    out.push_back({"shared.Vt", &shared_.target_queries, true, 1.0});
  }
  out.push_back({"shared.W", &shared_.affinity, true, 1.0});
  for (Domain d : {Domain::source, Domain::target}) {
    const std::string dn(domain_name(d));
    auto& b = biases(d);
    out.push_back({"bias.global." + dn, &b.global, false, 0.0});
    if (b.users.size() > 0) out.push_back({"bias.user." + dn, &b.users.values, false, 0.0});
    if (b.items.size() > 0) out.push_back({"bias.item." + dn, &b.items.values, false, 0.0});
  }
  return out;
}

std::vector<Model::NamedParam> Model::parameters_for(Flow f) {
  std::vector<NamedParam> out;
  const bool second = flows_.size() > 1 && f == Flow::source_flow;
  append(out, flow_parameters(flow(f), second ? "flowB" : "flowA"));
  const std::string dn(domain_name(rating_domain(f)));
  for (auto& p : parameters()) {
    const bool is_shared = p.name.starts_with("shared.");
    const bool is_bias = p.name == "bias.global." + dn || p.name == "bias.user." + dn ||
                         p.name == "bias.item." + dn;
    if (is_shared || is_bias) out.push_back(p);
  }
  return out;
}

std::size_t Model::parameter_count() const {
  std::size_t total = 0;
  for (const auto& p : const_cast<Model*>(this)->parameters()) total += p.tensor->size();
  return total;
}

void Model::zero_grad() {
  for (auto& p : parameters()) {
    if (p.tensor->requires_grad()) p.tensor->zero_grad();
  }
}

void Model::initialize(std::uint64_t seed) {
  Rng rng(mix_seed(seed, 0x1417));
  for (auto& p : parameters()) {
    for (double& v : p.tensor->values()) {
      const double half = p.init_scale * hp_.init_scale;
      v = half > 0.0 ? uniform_real(rng, -half, half) : 0.0;
    }
  }
  const std::size_t d = hp_.embed_dim;
  std::fill_n(shared_.embeddings.values().begin(), d, 0.0);
}

std::size_t Model::load_embeddings(const std::filesystem::path& path, const Vocabulary& vocab) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open embedding file " + path.string());
  const std::size_t d = hp_.embed_dim;
  std::string line;
  std::size_t loaded = 0, line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream fields(line);
    std::string word;
    if (!(fields >> word)) continue;
    std::vector<double> vec;
    double x;
    while (fields >> x) vec.push_back(x);
    if (line_no == 1 && vec.size() == 1) continue;  // "count dim" header
    if (vec.size() != d) {
      throw DataError(path.string() + ":" + std::to_string(line_no) + ": expected " +
                      std::to_string(d) + " components, got " + std::to_string(vec.size()));
    }
    if (auto id = vocab.id(word)) {
      std::copy(vec.begin(), vec.end(), shared_.embeddings.values().begin() +
                                            static_cast<std::ptrdiff_t>(*id * d));
      ++loaded;
    }
  }
  return loaded;
}

void Model::set_bias_ids(Domain domain, std::vector<std::string> users,
                         std::vector<std::string> items) {
  auto& b = biases(domain);
  b.users = BiasTable(std::move(users));
  b.items = BiasTable(std::move(items));
}

namespace {

constexpr std::string_view kMetaPrefix = "meta.";

}  // namespace

std::vector<ad::NamedTensor> Model::to_checkpoint() const {
  std::vector<ad::NamedTensor> out;
  out.push_back({"meta.variant", Tensor::scalar(static_cast<double>(variant_))});
  out.push_back({"meta.doc_length", Tensor::scalar(static_cast<double>(hp_.doc_length))});
  out.push_back({"meta.leaky_alpha", Tensor::scalar(hp_.leaky_alpha)});
  out.push_back({"meta.keep_prob", Tensor::scalar(hp_.keep_prob)});
  out.push_back({"meta.train_embeddings", Tensor::scalar(hp_.train_embeddings ? 1.0 : 0.0)});
  for (const auto& p : const_cast<Model*>(this)->parameters()) {
    if (p.name.starts_with("bias.user.") || p.name.starts_with("bias.item.")) {
      const bool user = p.name.starts_with("bias.user.");
      const Domain d = parse_domain(p.name.substr(10));
      const BiasTable& table = user ? biases(d).users : biases(d).items;
      for (std::size_t r = 0; r < table.size(); ++r) {
        out.push_back({p.name + "." + table.ids()[r], Tensor::scalar(table.values[r])});
      }
      continue;
    }
    out.push_back({p.name, Tensor(p.tensor->shape(), std::vector<double>(
                                                        p.tensor->values().begin(),
                                                        p.tensor->values().end()))});
  }
  return out;
}

Model Model::from_checkpoint(std::span<const ad::NamedTensor> tensors) {
  std::map<std::string, const Tensor*, std::less<>> by_name;
  for (const auto& t : tensors) by_name[t.name] = &t.tensor;
  auto need = [&](const std::string& name) -> const Tensor& {
    auto it = by_name.find(name);
    if (it == by_name.end()) throw DataError("checkpoint is missing '" + name + "'");
    return *it->second;
  };
  auto meta = [&](const std::string& name) { return need(std::string(kMetaPrefix) + name)[0]; };

  const auto code = static_cast<int>(meta("variant"));
  if (code < 0 || code > 3) throw DataError("checkpoint: bad variant code");
  const auto variant = static_cast<Variant>(code);
  HyperParams hp;
  hp.doc_length = static_cast<std::size_t>(meta("doc_length"));
  hp.leaky_alpha = meta("leaky_alpha");
  hp.keep_prob = meta("keep_prob");
  hp.train_embeddings = meta("train_embeddings") != 0.0;
  const Tensor& emb = need("shared.E");
  const Tensor& conv = need("flowA.conv.W");
  if (emb.rank() != 2 || conv.rank() != 3) throw DataError("checkpoint: bad tensor ranks");
  hp.embed_dim = emb.dim(1);
  hp.filters = conv.dim(0);
  hp.window = conv.dim(1);
  hp.aspects = 0;
  while (by_name.contains("flowA.gate." + std::to_string(hp.aspects + 1) + ".W")) ++hp.aspects;
  if (hp.aspects == 0) throw DataError("checkpoint: no aspect gates");
  hp.latent = need("flowA.gate.1.W").dim(0);

  Model model(variant, hp, emb.dim(0) - 1);
  for (Domain d : {Domain::source, Domain::target}) {
    const std::string dn(domain_name(d));
    std::vector<std::string> users, items;
    const std::string up = "bias.user." + dn + ".", ip = "bias.item." + dn + ".";
    for (const auto& t : tensors) {
      if (t.name.starts_with(up)) users.push_back(t.name.substr(up.size()));
      if (t.name.starts_with(ip)) items.push_back(t.name.substr(ip.size()));
    }
    model.set_bias_ids(d, users, items);
    auto& b = model.biases(d);
    for (std::size_t r = 0; r < users.size(); ++r) b.users.values[r] = need(up + users[r])[0];
    for (std::size_t r = 0; r < items.size(); ++r) b.items.values[r] = need(ip + items[r])[0];
  }
  for (auto& p : model.parameters()) {
    if (p.name.starts_with("bias.user.") || p.name.starts_with("bias.item.")) continue;
    const Tensor& src = need(p.name);
    if (src.shape() != p.tensor->shape()) {
      throw DataError("checkpoint: '" + p.name + "' has shape " + ad::shape_string(src.shape()) +
                      ", expected " + ad::shape_string(p.tensor->shape()));
    }
    std::copy(src.values().begin(), src.values().end(), p.tensor->values().begin());
  }
  model.apply_trainability();
  return model;
}

// ---------------------------------------------------------------------------

Var text_convolution(ad::Graph& g, const Document& doc, Var embeddings, const BoundFlow& flow) {
  const Var words = g.embedding_lookup(embeddings, doc.token_ids, Vocabulary::kPad);
  return g.relu(g.conv1d_same(words, flow.conv_w, flow.conv_b));
}

Var aspect_gate(ad::Graph& g, Var contextual, const BoundGate& gate) {
  const Var linear = g.add(g.matmul(contextual, gate.linear_w, false, true), gate.linear_b);
  const Var on_off = g.sigmoid(g.add(g.matmul(contextual, gate.gate_w, false, true), gate.gate_b));
  return g.mul(linear, on_off);
}

Var aspect_gate(ad::Graph& g, Var contextual, const BoundFlow& flow, std::size_t aspect) {
  if (aspect >= flow.gates.size()) {
    throw Error("aspect index " + std::to_string(aspect + 1) + " out of range 1.." +
                std::to_string(flow.gates.size()));
  }
  return aspect_gate(g, contextual, flow.gates[aspect]);
}

AspectReadout aspect_attention(ad::Graph& g, Var gated, std::optional<Var> query,
                               std::span<const std::uint8_t> mask) {
  std::vector<std::uint8_t> m(mask.begin(), mask.end());
  Var weights;
  if (query) {
    weights = g.masked_softmax(g.matmul(gated, *query, false, true), std::move(m));
  } else {
    const auto valid = static_cast<double>(std::count(m.begin(), m.end(), std::uint8_t{1}));
    Tensor uniform({m.size(), 1});
    for (std::size_t j = 0; j < m.size(); ++j) uniform[j] = m[j] ? 1.0 / valid : 0.0;
    weights = g.constant(std::move(uniform));
  }
  return {g.weighted_sum(weights, gated), weights};
}

namespace {

AspectExtraction read_aspects(ad::Graph& g, Var contextual, const Document& doc,
                              std::optional<Var> queries, const BoundFlow& flow) {
  AspectExtraction out;
  std::vector<Var> rows;
  for (std::size_t m = 0; m < flow.gates.size(); ++m) {
    const Var gated = aspect_gate(g, contextual, flow.gates[m]);
    std::optional<Var> query;
    if (queries) query = g.select_row(*queries, m);
    auto readout = aspect_attention(g, gated, query, doc.mask);
    rows.push_back(readout.aspect);
    out.attention.push_back(readout.weights);
  }
  out.aspects = g.concat(rows, 0);
  return out;
}

}  // namespace

AspectExtraction extract_aspects(ad::Graph& g, const Document& doc, std::optional<Var> queries,
                                 const BoundFlow& flow, Var embeddings) {
  return read_aspects(g, text_convolution(g, doc, embeddings, flow), doc, queries, flow);
}

AspectExtraction extract_aux_aspects(ad::Graph& g, const Document& doc,
                                     std::optional<Var> queries, const BoundFlow& flow,
                                     Var embeddings) {
  const Var first = text_convolution(g, doc, embeddings, flow);
  const Var second = g.relu(g.conv1d_same(first, flow.aux_w, flow.aux_b));
  return read_aspects(g, second, doc, queries, flow);
}

Var fuse_auxiliary(ad::Graph& g, Var user_aspects, Var aux_aspects, const BoundFlow& flow) {
  const auto& a = g.value(user_aspects);
  const auto& b = g.value(aux_aspects);
  if (a.shape() != b.shape()) {
    throw ShapeError("fuse_auxiliary: aspect matrices differ " + ad::shape_string(a.shape()) +
                     " vs " + ad::shape_string(b.shape()));
  }
  const Var interactions[] = {g.sub(user_aspects, aux_aspects), g.mul(user_aspects, aux_aspects)};
  const Var gate = g.sigmoid(
      g.add(g.matmul(g.concat(interactions, 1), flow.fuse_w1, false, true), flow.fuse_b1));
  const Var merged[] = {user_aspects, g.mul(gate, aux_aspects)};
  return g.tanh(g.add(g.matmul(g.concat(merged, 1), flow.fuse_w2, false, true), flow.fuse_b2));
}

Var global_correlation(ad::Graph& g, Var source_queries, Var target_queries, Var affinity,
                       double alpha) {
  const Var projected = g.matmul(source_queries, affinity);
  return g.leaky_relu(g.matmul(projected, target_queries, false, true), alpha);
}

Prediction predict(ad::Graph& g, Var user_aspects, Var item_aspects, Var correlation,
                   Var affinity, Var user_bias, Var item_bias) {
  Prediction p;
  p.matching = g.matmul(g.matmul(user_aspects, affinity), item_aspects, false, true);
  const auto& s = g.value(correlation).shape();
  const auto& m = g.value(p.matching).shape();
  if (s != m) {
    throw ShapeError("predict: correlation " + ad::shape_string(s) + " does not match " +
                     ad::shape_string(m));
  }
  p.weighted = g.mul(correlation, p.matching);
  p.rating = g.add(g.add(g.mean_all(p.weighted), user_bias), item_bias);
  return p;
}

// ---------------------------------------------------------------------------

namespace {

BoundFlow bind_flow(ad::Graph& g, FlowParams& fp, bool auxiliary) {
  BoundFlow b;
  b.conv_w = g.parameter(fp.conv_w);
  b.conv_b = g.parameter(fp.conv_b);
  for (auto& gate : fp.gates) {
    b.gates.push_back({g.parameter(gate.linear_w), g.parameter(gate.linear_b),
                       g.parameter(gate.gate_w), g.parameter(gate.gate_b)});
  }
  if (auxiliary) {
    b.aux_w = g.parameter(fp.aux_w);
    b.aux_b = g.parameter(fp.aux_b);
    b.fuse_w1 = g.parameter(fp.fuse_w1);
    b.fuse_b1 = g.parameter(fp.fuse_b1);
    b.fuse_w2 = g.parameter(fp.fuse_w2);
    b.fuse_b2 = g.parameter(fp.fuse_b2);
  }
  return b;
}

}  // namespace

ModelGraph::ModelGraph(ad::Graph& graph, Model& model) : graph_(graph), model_(model) {
  const auto sw = model.switches();
  flows_.push_back(bind_flow(graph, model.flow(Flow::target_flow), sw.auxiliary));
  if (sw.per_flow_parameters) {
    flows_.push_back(bind_flow(graph, model.flow(Flow::source_flow), sw.auxiliary));
  }
  embeddings_ = graph.parameter(model.shared().embeddings);
  if (sw.attention || sw.learned_correlation) {
    queries_[0] = graph.parameter(model.shared().source_queries);
    queries_[1] = graph.parameter(model.shared().target_queries);
  }
  affinity_ = graph.parameter(model.shared().affinity);
  for (Domain d : {Domain::source, Domain::target}) {
    auto& b = model.biases(d);
    const int i = static_cast<int>(d);
    global_[i] = graph.parameter(b.global);
    if (b.users.size() > 0) user_table_[i] = graph.parameter(b.users.values);
    if (b.items.size() > 0) item_table_[i] = graph.parameter(b.items.values);
  }
}

const BoundFlow& ModelGraph::flow(Flow f) const {
  if (flows_.size() == 1) return flows_[0];
  return flows_[f == Flow::target_flow ? 0 : 1];
}

std::optional<Var> ModelGraph::queries(Domain d) const {
  if (!model_.switches().attention) return std::nullopt;
  return queries_[static_cast<int>(d)];
}

Var ModelGraph::correlation(Flow f) {
  auto& slot = correlation_[static_cast<int>(f)];
  if (slot) return *slot;
  const std::size_t m = model_.hyper().aspects;
  if (!model_.switches().learned_correlation) {
    slot = graph_.constant(Tensor({m, m}, 1.0));
    return *slot;
  }
  if (!base_correlation_) {
    base_correlation_ = global_correlation(graph_, *queries_[0], *queries_[1], affinity_,
                                           model_.hyper().leaky_alpha);
  }
  // Rows of S index source aspects; the source flow reads it transposed.
  slot = f == Flow::target_flow ? *base_correlation_ : graph_.transpose(*base_correlation_);
  return *slot;
}

Var ModelGraph::user_bias(Domain d, std::string_view user) {
  const int i = static_cast<int>(d);
  const auto row = model_.biases(d).users.row(user);
  if (!row) return global_[i];
  return graph_.add(global_[i], graph_.embedding_lookup(user_table_[i], {static_cast<std::uint32_t>(*row)}));
}

Var ModelGraph::item_bias(Domain d, std::string_view item) {
  const int i = static_cast<int>(d);
  const auto row = model_.biases(d).items.row(item);
  if (!row) return graph_.constant(Tensor::scalar(0.0));
  return graph_.embedding_lookup(item_table_[i], {static_cast<std::uint32_t>(*row)});
}

PairDocuments pair_documents(const DocumentStore& store, const RatingPair& pair) {
  const Domain ud = user_doc_domain(pair.flow);
  const Domain rd = rating_domain(pair.flow);
  PairDocuments docs{store.user_document(pair.user, ud), store.auxiliary_document(pair.user, ud),
                     Document{}};
  if (store.has_item(rd, pair.item)) {
    docs.item = store.item_document(pair.item, rd, pair.user);
  } else {
    // Item only reviewed by held-out users: an empty document.
    docs.item = make_document({}, store.doc_length(), pair.item, DocumentKind::item, rd);
  }
  return docs;
}

namespace {

std::vector<std::vector<double>> attention_values(const ad::Graph& g,
                                                  const std::vector<Var>& weights) {
  std::vector<std::vector<double>> out;
  for (Var w : weights) {
    const auto v = g.value(w).values();
    out.emplace_back(v.begin(), v.end());
  }
  return out;
}

Var dropout_mask(ad::Graph& g, Var x, double keep, Rng& rng) {
  Tensor mask(g.value(x).shape());
  for (double& v : mask.values()) v = uniform_unit(rng) < keep ? 1.0 / keep : 0.0;
  return g.mul(x, g.constant(std::move(mask)));
}

void check_domain(const Document& doc, Domain expected, std::string_view what) {
  if (doc.length() == 0) throw DataError("missing " + std::string(what) + " document");
  if (doc.domain != expected) {
    throw DataError(std::string(what) + " document '" + doc.owner + "' is from the " +
                    std::string(domain_name(doc.domain)) + " domain, expected " +
                    std::string(domain_name(expected)));
  }
}

}  // namespace

Var forward_pair(ModelGraph& mg, const RatingPair& pair, const PairDocuments& docs, Rng* dropout,
                 PairTrace* trace) {
  ad::Graph& g = mg.graph();
  const Model& model = mg.model();
  const auto sw = model.switches();
  const Domain ud = user_doc_domain(pair.flow);
  const Domain rd = rating_domain(pair.flow);
  check_domain(docs.user, ud, "user");
  check_domain(docs.item, rd, "item");
  if (sw.auxiliary) check_domain(docs.aux, ud, "auxiliary");

  const BoundFlow& flow = mg.flow(pair.flow);
  const auto user = extract_aspects(g, docs.user, mg.queries(ud), flow, mg.embeddings());
  Var user_aspects = user.aspects;
  std::optional<AspectExtraction> aux;
  if (sw.auxiliary) {
    aux = extract_aux_aspects(g, docs.aux, mg.queries(ud), flow, mg.embeddings());
    user_aspects = fuse_auxiliary(g, user_aspects, aux->aspects, flow);
  }
  const auto item = extract_aspects(g, docs.item, mg.queries(rd), flow, mg.embeddings());
  Var item_aspects = item.aspects;
  if (dropout != nullptr && model.hyper().keep_prob < 1.0) {
    user_aspects = dropout_mask(g, user_aspects, model.hyper().keep_prob, *dropout);
    item_aspects = dropout_mask(g, item_aspects, model.hyper().keep_prob, *dropout);
  }
  const Prediction p = predict(g, user_aspects, item_aspects, mg.correlation(pair.flow),
                               mg.affinity(), mg.user_bias(rd, pair.user),
                               mg.item_bias(rd, pair.item));
  if (trace != nullptr) {
    trace->user_attention = attention_values(g, user.attention);
    trace->aux_attention = aux ? attention_values(g, aux->attention)
                               : std::vector<std::vector<double>>{};
    trace->item_attention = attention_values(g, item.attention);
    trace->correlation = g.value(mg.correlation(pair.flow));
    trace->matching = g.value(p.matching);
    trace->weighted = g.value(p.weighted);
    trace->prediction = g.value(p.rating)[0];
  }
  return p.rating;
}

}  // namespace catn
