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
#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

#include "catn/documents.hpp"
#include "catn/model.hpp"
#include "catn/optimizer.hpp"
#include "catn/scenario.hpp"

namespace catn {

struct TrainConfig {
  double learning_rate = 0.001;
  std::size_t batch_size = 256;
  double l2 = 1e-4;
  std::size_t max_epochs = 100;
  std::size_t patience = 10;
  std::uint64_t seed = 0;
  Variant variant = Variant::full;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  bool history_wall_clock = true;  // off: wall_seconds is written as 0

  void validate() const;
  AdamOptions adam() const;
};

double mean_squared_error(std::span<const double> targets, std::span<const double> predictions);
// Sum of squares over the regularized tensors.
double l2_penalty(std::span<const Model::NamedParam> params);
// MSE of one flow's pairs plus l2 * penalty. Throws on an empty batch.
double flow_loss(std::span<const RatingPair> pairs, std::span<const double> predictions,
                 std::span<const Model::NamedParam> params, double l2);

// Fresh model for a scenario: bias rows for the training users and items,
// seeded weights, and each domain's global bias at its mean training rating.
Model make_model(const Scenario& scenario, Variant variant, const HyperParams& hp,
                 std::size_t vocab_size, std::uint64_t seed);

// Dropout off, one forward per pair.
std::vector<double> predict_pairs(Model& model, const DocumentStore& store,
                                  std::span<const RatingPair> pairs);

// Loss of one flow's pairs; leaves d(loss)/d(theta) in the grad slots of
// that flow's trainable tensors, L2 term included.
double flow_gradients(Model& model, const DocumentStore& store, std::span<const RatingPair> pairs,
                      double l2, Rng* dropout = nullptr);

// One optimizer step on pairs of a single flow. Returns the loss before the
// update. Throws DivergenceError when it is not finite.
double flow_step(Model& model, Adam& adam, const DocumentStore& store,
                 std::span<const RatingPair> pairs, double l2, Rng* dropout);

struct EpochRecord {
  std::size_t epoch = 0;
  double train_loss_source = 0.0;
  double train_loss_target = 0.0;
  double valid_mse = 0.0;
  double wall_seconds = 0.0;
};

struct TrainHistory {
  std::vector<EpochRecord> epochs;
  std::size_t best_epoch = 0;
  double best_valid_mse = 0.0;

  void write_csv(std::ostream& out) const;
};

struct TrainResult {
  Model model;  // best-validation parameters
  TrainHistory history;
};

struct TrainCallbacks {
  std::function<void(const Model&, const EpochRecord&)> on_improvement;
  std::function<void(const EpochRecord&)> on_epoch;
};

TrainResult train(const Scenario& scenario, const DocumentStore& store, Model model,
                  const TrainConfig& tc, const TrainCallbacks& callbacks = {});

}  // namespace catn
