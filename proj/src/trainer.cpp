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

#include "catn/trainer.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <set>

#include "catn/error.hpp"

namespace catn {

void TrainConfig::validate() const {
  adam().validate();
  if (batch_size < 2) throw ConfigError("batch_size must be at least 2");
  if (!(l2 >= 0.0)) throw ConfigError("l2 must be non-negative");
  if (max_epochs == 0) throw ConfigError("max_epochs must be positive");
  if (patience == 0) throw ConfigError("patience must be at least 1");
}

AdamOptions TrainConfig::adam() const { return {learning_rate, beta1, beta2, epsilon}; }

double mean_squared_error(std::span<const double> targets, std::span<const double> predictions) {
  if (targets.size() != predictions.size()) {
    throw Error("mean_squared_error: " + std::to_string(targets.size()) + " targets vs " +
                std::to_string(predictions.size()) + " predictions");
  }
  if (targets.empty()) throw DataError("mean_squared_error: no pairs");
  double sum = 0.0;
  for (std::size_t j = 0; j < targets.size(); ++j) {
    const double e = targets[j] - predictions[j];
    sum += e * e;
  }
  return sum / static_cast<double>(targets.size());
}

double l2_penalty(std::span<const Model::NamedParam> params) {
  double sum = 0.0;
  for (const auto& p : params) {
    if (!p.regularized) continue;
    for (double v : p.tensor->values()) sum += v * v;
  }
  return sum;
}

double flow_loss(std::span<const RatingPair> pairs, std::span<const double> predictions,
                 std::span<const Model::NamedParam> params, double l2) {
  if (pairs.empty()) throw DataError("loss of an empty batch");
  std::vector<double> targets;
  targets.reserve(pairs.size());
  for (const auto& p : pairs) targets.push_back(p.rating);
  return mean_squared_error(targets, predictions) + l2 * l2_penalty(params);
}

Model make_model(const Scenario& scenario, Variant variant, const HyperParams& hp,
                 std::size_t vocab_size, std::uint64_t seed) {
  Model model(variant, hp, vocab_size);
  std::vector<double> means;
  for (Flow f : {Flow::source_flow, Flow::target_flow}) {
    std::set<std::string> users, items;
    double sum = 0.0;
    const auto pairs = scenario.training_pairs(f);
    for (const auto& p : pairs) {
      users.insert(p.user);
      items.insert(p.item);
      sum += p.rating;
    }
    model.set_bias_ids(rating_domain(f), {users.begin(), users.end()},
                       {items.begin(), items.end()});
    means.push_back(pairs.empty() ? 0.0 : sum / static_cast<double>(pairs.size()));
  }
  model.initialize(seed);
  model.biases(Domain::source).global[0] = means[0];
  model.biases(Domain::target).global[0] = means[1];
  return model;
}

std::vector<double> predict_pairs(Model& model, const DocumentStore& store,
                                  std::span<const RatingPair> pairs) {
  std::vector<double> out;
  out.reserve(pairs.size());
  for (const auto& pair : pairs) {
    ad::Graph g(false);
    ModelGraph mg(g, model);
    const auto docs = pair_documents(store, pair);
    out.push_back(g.value(forward_pair(mg, pair, docs))[0]);
  }
  return out;
}

double flow_gradients(Model& model, const DocumentStore& store, std::span<const RatingPair> pairs,
                      double l2, Rng* dropout) {
  if (pairs.empty()) throw DataError("flow_step on an empty batch");
  const Flow flow = pairs.front().flow;
  for (const auto& p : pairs) {
    if (p.flow != flow) throw Error("flow_step: batch mixes flows");
  }
  auto params = model.parameters_for(flow);
  for (auto& p : params) {
    if (p.tensor->requires_grad()) p.tensor->zero_grad();
  }
  const double scale = 1.0 / static_cast<double>(pairs.size());
  double squared = 0.0;
  for (const auto& pair : pairs) {
    ad::Graph g;
    ModelGraph mg(g, model);
    const auto docs = pair_documents(store, pair);
    const ad::Var rating = forward_pair(mg, pair, docs, dropout);
    const ad::Var diff = g.scalar_add(rating, -pair.rating);
    const ad::Var sq = g.mul(diff, diff);
    squared += g.value(sq)[0];
    g.backward(sq, scale);
  }
  const double loss = squared * scale + l2 * l2_penalty(params);
  if (!std::isfinite(loss)) {
    throw DivergenceError("non-finite " + std::string(flow_name(flow)) + " loss");
  }
  if (l2 > 0.0) {
    for (auto& p : params) {
      if (!p.regularized || !p.tensor->requires_grad()) continue;
      auto grad = p.tensor->grad();
      const auto values = p.tensor->values();
      for (std::size_t j = 0; j < grad.size(); ++j) grad[j] += 2.0 * l2 * values[j];
    }
  }
  return loss;
}

double flow_step(Model& model, Adam& adam, const DocumentStore& store,
                 std::span<const RatingPair> pairs, double l2, Rng* dropout) {
  const double loss = flow_gradients(model, store, pairs, l2, dropout);
  for (auto& p : model.parameters_for(pairs.front().flow)) {
    if (p.tensor->requires_grad()) adam.step(p.name, *p.tensor, p.tensor->grad());
  }
  return loss;
}

void TrainHistory::write_csv(std::ostream& out) const {
  out << "epoch,train_loss_source,train_loss_target,valid_mse,wall_seconds\n";
  char line[256];
  for (const auto& e : epochs) {
    std::snprintf(line, sizeof line, "%zu,%.17g,%.17g,%.17g,%.17g\n", e.epoch,
                  e.train_loss_source, e.train_loss_target, e.valid_mse, e.wall_seconds);
    out << line;
  }
}

TrainResult train(const Scenario& scenario, const DocumentStore& store, Model model,
                  const TrainConfig& tc, const TrainCallbacks& callbacks) {
  tc.validate();
  if (model.variant() != tc.variant) {
    throw ConfigError("model variant " + std::string(variant_name(model.variant())) +
                      " does not match the training config (" +
                      std::string(variant_name(tc.variant)) + ")");
  }
  Adam adam(tc.adam());
  Rng dropout(mix_seed(tc.seed, 0xD50F));
  const auto validation = scenario.heldout_pairs(false);
  std::vector<double> valid_targets;
  for (const auto& p : validation) valid_targets.push_back(p.rating);

  TrainResult result{model, {}};
  double best = std::numeric_limits<double>::infinity();
  std::size_t stale = 0;
  const auto start = std::chrono::steady_clock::now();

  for (std::size_t epoch = 1; epoch <= tc.max_epochs; ++epoch) {
    double sum[2] = {0.0, 0.0};
    std::size_t count[2] = {0, 0};
    for (const Batch& batch : make_batches(scenario, tc.batch_size, tc.seed, epoch)) {
      for (Flow f : {Flow::source_flow, Flow::target_flow}) {
        std::vector<RatingPair> part;
        for (const auto& p : batch.pairs) {
          if (p.flow == f) part.push_back(p);
        }
        if (part.empty()) continue;
        const double loss = flow_step(model, adam, store, part, tc.l2, &dropout);
        sum[static_cast<int>(f)] += loss * static_cast<double>(part.size());
        count[static_cast<int>(f)] += part.size();
      }
    }
    EpochRecord rec;
    rec.epoch = epoch;
    rec.train_loss_source = count[0] ? sum[0] / static_cast<double>(count[0]) : 0.0;
    rec.train_loss_target = count[1] ? sum[1] / static_cast<double>(count[1]) : 0.0;
    rec.valid_mse = mean_squared_error(valid_targets, predict_pairs(model, store, validation));
    if (!std::isfinite(rec.valid_mse)) {
      throw DivergenceError("non-finite validation MSE at epoch " + std::to_string(epoch));
    }
    if (tc.history_wall_clock) {
      rec.wall_seconds =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    }
    result.history.epochs.push_back(rec);
    if (callbacks.on_epoch) callbacks.on_epoch(rec);
    if (rec.valid_mse < best) {
      best = rec.valid_mse;
      result.model = model;
      result.history.best_epoch = epoch;
      result.history.best_valid_mse = best;
      stale = 0;
      if (callbacks.on_improvement) callbacks.on_improvement(result.model, rec);
    } else if (++stale >= tc.patience) {
      break;
    }
  }
  return result;
}

}  // namespace catn
