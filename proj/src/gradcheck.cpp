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

#include "catn/gradcheck.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "catn/trainer.hpp"

namespace catn {

namespace {

struct Probe {
  RatingPair pair;
  PairDocuments docs;
};

Document random_document(Rng& rng, std::size_t length, std::size_t vocab, std::size_t valid,
                         const std::string& owner, DocumentKind kind, Domain domain) {
  std::vector<std::uint32_t> tokens;
  for (std::size_t j = 0; j < valid; ++j) {
    tokens.push_back(static_cast<std::uint32_t>(1 + uniform_index(rng, vocab)));
  }
  return make_document(tokens, length, owner, kind, domain);
}

std::vector<Probe> make_probes(Rng& rng, const HyperParams& hp, std::size_t vocab) {
  const struct {
    const char* user;
    const char* item;
    double rating;
    Flow flow;
  } spec[] = {{"u1", "i1", 4.0, Flow::source_flow},
              {"u2", "i2", 2.0, Flow::source_flow},
              {"u1", "i2", 5.0, Flow::target_flow},
              {"u3", "i1", 1.0, Flow::target_flow}};
  std::vector<Probe> probes;
  const std::size_t l = hp.doc_length;
  for (const auto& s : spec) {
    Probe p;
    p.pair = {s.user, s.item, s.rating, s.flow};
    const Domain ud = user_doc_domain(s.flow), rd = rating_domain(s.flow);
    p.docs.user = random_document(rng, l, vocab, 3 + uniform_index(rng, l - 2), s.user,
                                  DocumentKind::user, ud);
    p.docs.aux = random_document(rng, l, vocab, 2 + uniform_index(rng, l - 1), s.user,
                                 DocumentKind::user_aux, ud);
    p.docs.item = random_document(rng, l, vocab, 3 + uniform_index(rng, l - 2), s.item,
                                  DocumentKind::item, rd);
    probes.push_back(std::move(p));
  }
  return probes;
}

double total_loss(Model& model, const std::vector<Probe>& probes, double l2) {
  double loss = 0.0;
  for (Flow f : {Flow::source_flow, Flow::target_flow}) {
    std::vector<RatingPair> pairs;
    std::vector<double> predictions;
    for (const auto& p : probes) {
      if (p.pair.flow != f) continue;
      ad::Graph g(false);
      ModelGraph mg(g, model);
      predictions.push_back(g.value(forward_pair(mg, p.pair, p.docs))[0]);
      pairs.push_back(p.pair);
    }
    loss += flow_loss(pairs, predictions, model.parameters_for(f), l2);
  }
  return loss;
}

void analytic_gradients(Model& model, const std::vector<Probe>& probes, double l2) {
  model.zero_grad();
  for (Flow f : {Flow::source_flow, Flow::target_flow}) {
    std::size_t n = 0;
    for (const auto& p : probes) n += p.pair.flow == f;
    for (const auto& p : probes) {
      if (p.pair.flow != f) continue;
      ad::Graph g;
      ModelGraph mg(g, model);
      const ad::Var diff = g.scalar_add(forward_pair(mg, p.pair, p.docs), -p.pair.rating);
      g.backward(g.mul(diff, diff), 1.0 / static_cast<double>(n));
    }
    for (auto& p : model.parameters_for(f)) {
      if (!p.regularized) continue;
      auto grad = p.tensor->grad();
      const auto values = p.tensor->values();
      for (std::size_t j = 0; j < grad.size(); ++j) grad[j] += 2.0 * l2 * values[j];
    }
  }
}

}  // namespace

GradcheckReport run_gradcheck(const GradcheckOptions& options) {
  const auto start = std::chrono::steady_clock::now();
  HyperParams hp;
  hp.embed_dim = 4;
  hp.filters = 3;
  hp.window = 3;
  hp.latent = 2;
  hp.aspects = 2;
  hp.doc_length = 8;
  hp.keep_prob = 1.0;
  hp.train_embeddings = true;
  const std::size_t vocab = 20;

  Model model(options.variant, hp, vocab);
  for (Domain d : {Domain::source, Domain::target}) {
    model.set_bias_ids(d, {"u1", "u2", "u3"}, {"i1", "i2"});
  }
  Rng rng(mix_seed(options.seed, 0x6C4E));
  for (auto& p : model.parameters()) {
    for (double& v : p.tensor->values()) v = uniform_real(rng, -0.5, 0.5);
  }
  std::fill_n(model.shared().embeddings.values().begin(), hp.embed_dim, 0.0);
  const auto probes = make_probes(rng, hp, vocab);

  analytic_gradients(model, probes, options.l2);
  GradcheckReport report;
  for (auto& p : model.parameters()) {
    TensorGradError err{p.name, 0, 0.0, 0.0};
    auto values = p.tensor->values();
    const auto grad = p.tensor->grad();
    const std::size_t first = p.tensor == &model.shared().embeddings ? hp.embed_dim : 0;
    for (std::size_t j = first; j < values.size(); ++j) {
      const double saved = values[j];
      values[j] = saved + options.step;
      const double up = total_loss(model, probes, options.l2);
      values[j] = saved - options.step;
      const double down = total_loss(model, probes, options.l2);
      values[j] = saved;
      const double numeric = (up - down) / (2.0 * options.step);
      const double analytic = grad[j];
      const double abs_err = std::abs(analytic - numeric);
      const double denom = std::max({std::abs(analytic), std::abs(numeric), options.floor});
      err.max_abs_error = std::max(err.max_abs_error, abs_err);
      err.max_rel_error = std::max(err.max_rel_error, abs_err / denom);
      ++err.checked;
    }
    report.max_rel_error = std::max(report.max_rel_error, err.max_rel_error);
    report.checked += err.checked;
    report.tensors.push_back(err);
  }
  report.seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

}  // namespace catn
