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

#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "catn/checkpoint.hpp"
#include "catn/error.hpp"
#include "catn/optimizer.hpp"
#include "catn/trainer.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

using namespace catn;

namespace {

RatingPair pair_with(double rating) { return {"u", "i", rating, Flow::target_flow}; }

// Textbook Adam on one scalar, for comparison with the optimizer.
struct ScalarAdam {
  double lr, b1, b2, eps, m = 0, v = 0;
  int t = 0;
  double step(double x, double g) {
    ++t;
    m = b1 * m + (1 - b1) * g;
    v = b2 * v + (1 - b2) * g * g;
    const double mh = m / (1 - std::pow(b1, t)), vh = v / (1 - std::pow(b2, t));
    return x - lr * mh / (std::sqrt(vh) + eps);
  }
};

}  // namespace

TEST_SUITE("training") {
  TEST_CASE("loss examples") {
    const std::vector<RatingPair> pairs = {pair_with(4), pair_with(2)};
    const std::vector<double> exact = {4, 2}, off = {5, 2};
    CHECK(flow_loss(pairs, exact, {}, 0.0) == 0.0);
    CHECK(flow_loss(pairs, off, {}, 0.0) == 0.5);
    CHECK_THROWS_AS(flow_loss({}, {}, {}, 0.0), DataError);
    CHECK(mean_squared_error(std::vector<double>{3, 5}, std::vector<double>{4, 4}) == 1.0);

    std::mt19937_64 rng(2);
    for (int trial = 0; trial < 20; ++trial) {
      HyperParams hp;
      hp.embed_dim = 3;
      hp.filters = 2;
      hp.latent = 2;
      hp.aspects = 2;
      hp.doc_length = 4;
      Model m(Variant::full, hp, 5);
      m.set_bias_ids(Domain::target, {"u"}, {"i"});
      m.initialize(trial);
      m.biases(Domain::target).items.values[0] = 3.0;
      const auto params = m.parameters_for(Flow::target_flow);
      std::vector<RatingPair> ps;
      std::vector<double> preds;
      oracle::Vec y, yhat;
      for (int j = 0; j < 7; ++j) {
        ps.push_back(pair_with(1 + static_cast<double>(rng() % 5)));
        preds.push_back(oracle::random_vec(rng, 1, 1, 5)[0]);
        y.push_back(ps.back().rating);
        yhat.push_back(preds.back());
      }
      const double lambda = 0.01 * (1 + trial);
      double penalty = 0.0;
      for (const auto& p : params) {
        if (!p.regularized) continue;
        for (double v : p.tensor->values()) penalty += v * v;
      }
      CHECK(std::abs(flow_loss(ps, preds, params, lambda) - (oracle::mse(y, yhat) + lambda * penalty)) < 1e-12);
    }
  }

  TEST_CASE("Adam follows the textbook update and solves a quadratic") {
    AdamOptions opt;
    opt.learning_rate = 0.05;
    Adam adam(opt);
    ScalarAdam ref{opt.learning_rate, opt.beta1, opt.beta2, opt.epsilon};
    ad::Tensor x = ad::Tensor::scalar(0.0);
    double xr = 0.0;
    int steps = 0;
    for (; steps < 2000 && std::abs(x[0] - 3.0) > 1e-7; ++steps) {
      const double g = 2.0 * (x[0] - 3.0);
      std::vector<double> grad = {g};
      adam.step("x", x, grad);
      xr = ref.step(xr, 2.0 * (xr - 3.0));
      REQUIRE(std::abs(x[0] - xr) <= 1e-12);
    }
    CHECK(std::abs(x[0] - 3.0) < 1e-6);
    CHECK(steps <= 2000);
    CHECK(adam.slot("x")->t == static_cast<std::uint64_t>(steps));
    CHECK(adam.slot("x")->m.size() == 1);
    CHECK(adam.slot("missing") == nullptr);
  }

  TEST_CASE("zero gradient leaves the parameter untouched") {
    Adam adam(AdamOptions{});
    ad::Tensor p({3}, std::vector<double>{1.0, -2.0, 0.5});
    std::vector<double> g = {0.3, 0.0, -0.1};
    adam.step("p", p, g);
    const double kept = p[1];
    CHECK(kept == -2.0);
    std::vector<double> zero = {0.0, 0.0, 0.0};
    const ad::Tensor before = p;
    adam.step("p", p, zero);
    CHECK(p == before);
    CHECK(adam.slot("p")->t == 2);
    CHECK(adam.slot("p")->m[0] == doctest::Approx(0.9 * 0.1 * 0.3));
    std::vector<double> wrong = {1.0};
    CHECK_THROWS(adam.step("p", p, wrong));
    AdamOptions bad;
    bad.learning_rate = 0.0;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
  }

  TEST_CASE("training gradient including L2 matches finite differences") {
    auto cfg = fixture::tiny_config(3);
    cfg.set("keep_prob", "1");
    const auto corpus = fixture::tiny_corpus(cfg);
    const auto sc = split_scenario(corpus.source, corpus.target, 1.0, cfg.seed);
    const auto store = make_store(sc, corpus.vocab, cfg);
    Model model = make_model(sc, Variant::full, cfg.hyper(), corpus.vocab.size(), 5);
    const double lambda = 0.05;
    for (Flow f : {Flow::source_flow, Flow::target_flow}) {
      auto pairs = sc.training_pairs(f);
      pairs.resize(3);
      flow_gradients(model, store, pairs, lambda);
      auto loss = [&] { return flow_loss(pairs, predict_pairs(model, store, pairs), model.parameters_for(f), lambda); };
      double worst = 0.0;
      std::size_t probes = 0;
      for (auto& p : model.parameters_for(f)) {
        if (!p.tensor->requires_grad()) continue;
        const std::vector<double> analytic(p.tensor->grad().begin(), p.tensor->grad().end());
        const std::size_t stride = std::max<std::size_t>(1, p.tensor->size() / 7);
        for (std::size_t j = (p.name == "shared.E" ? p.tensor->cols() : 0); j < p.tensor->size(); j += stride) {
          const double numeric = oracle::central_difference(loss, p.tensor->values()[j], 1e-5);
          // Differences of an O(1) loss carry ~1e-11 round-off; the floor keeps
          // near-zero gradients from dominating the relative error.
          worst = std::max(worst, oracle::rel_error(analytic[j], numeric, 1e-6));
          ++probes;
        }
      }
      CHECK(probes > 50);
      CHECK(worst < 1e-4);
    }

    // Pure penalty: predictions fixed, so the L2 part must equal 2 lambda theta.
    HyperParams hp = cfg.hyper();
    Model m(Variant::full, hp, corpus.vocab.size());
    m.initialize(1);
    auto params = m.parameters_for(Flow::target_flow);
    for (auto& p : params) {
      if (!p.regularized) continue;
      for (std::size_t j = 0; j < p.tensor->size(); j += std::max<std::size_t>(1, p.tensor->size() / 3)) {
        auto penalty = [&] { return lambda * l2_penalty(params); };
        const double theta = p.tensor->values()[j];
        const double numeric = oracle::central_difference(penalty, p.tensor->values()[j], 1e-6);
        CHECK(oracle::rel_error(2 * lambda * theta, numeric) < 1e-6);
      }
    }
  }

  TEST_CASE("non-finite loss raises a divergence error") {
    auto cfg = fixture::tiny_config(3);
    const auto corpus = fixture::tiny_corpus(cfg);
    const auto sc = split_scenario(corpus.source, corpus.target, 1.0, cfg.seed);
    const auto store = make_store(sc, corpus.vocab, cfg);
    Model model = make_model(sc, Variant::full, cfg.hyper(), corpus.vocab.size(), 5);
    auto pairs = sc.training_pairs(Flow::target_flow);
    pairs[0].rating = std::numeric_limits<double>::quiet_NaN();
    Adam adam(AdamOptions{});
    CHECK_THROWS_AS(flow_step(model, adam, store, pairs, 0.0, nullptr), DivergenceError);
  }

  TEST_CASE("one epoch visits every training rating once") {
    auto cfg = fixture::tiny_config(4);
    cfg.set("max_epochs", "1");
    const auto corpus = fixture::tiny_corpus(cfg);
    const auto sc = split_scenario(corpus.source, corpus.target, 1.0, cfg.seed);
    std::size_t visited = 0;
    for (const auto& b : make_batches(sc, 16, cfg.seed, 1)) visited += b.size();
    CHECK(visited == sc.training_pairs(Flow::source_flow).size() + sc.training_pairs(Flow::target_flow).size());
  }

  TEST_CASE("fixed seed gives bit-identical histories and checkpoints") {
    const auto cfg = fixture::tiny_config(6);
    const auto corpus = fixture::tiny_corpus(cfg);
    auto run = [&] {
      const auto ex = run_experiment(corpus, cfg);
      std::ostringstream csv;
      ex.result.history.write_csv(csv);
      return std::make_pair(csv.str(), ad::checkpoint_bytes(ex.result.model.to_checkpoint()));
    };
    const auto a = run(), b = run();
    CHECK(a.first == b.first);
    CHECK(a.second == b.second);
    CHECK(a.first.rfind("epoch,train_loss_source,train_loss_target,valid_mse,wall_seconds\n", 0) == 0);

    auto other = cfg;
    other.seed = 7;
    const auto ex = run_experiment(corpus, other);
    CHECK(ad::checkpoint_bytes(ex.result.model.to_checkpoint()) != a.second);
  }

  TEST_CASE("early stopping restores the best-validation checkpoint") {
    auto cfg = fixture::tiny_config(8);
    cfg.set("max_epochs", "12");
    cfg.set("patience", "3");
    cfg.set("learning_rate", "0.05");
    const auto corpus = fixture::tiny_corpus(cfg);
    std::string saved;
    std::size_t saved_epoch = 0;
    TrainCallbacks cb;
    cb.on_improvement = [&](const Model& m, const EpochRecord& r) {
      saved = ad::checkpoint_bytes(m.to_checkpoint());
      saved_epoch = r.epoch;
    };
    const auto ex = run_experiment(corpus, cfg, cb);
    const auto& h = ex.result.history;
    CHECK(ad::checkpoint_bytes(ex.result.model.to_checkpoint()) == saved);
    CHECK(h.best_epoch == saved_epoch);
    double best = std::numeric_limits<double>::infinity();
    for (const auto& e : h.epochs) best = std::min(best, e.valid_mse);
    CHECK(h.best_valid_mse == best);
    if (h.epochs.size() < 12) CHECK(h.epochs.size() - h.best_epoch == 3);

    // The file written by a run directory is the same checkpoint.
    const auto data = fixture::scratch("early_stop_data");
    const auto run_dir = fixture::scratch("early_stop_run");
    auto prep = cfg;
    auto synth = generate_synthetic(cfg.synth_config());
    write_synthetic(synth, data);
    prep.source_path = data / "source.jsonl";
    prep.target_path = data / "target.jsonl";
    prepare(prep, data / "prepared");
    prep.data_dir = data / "prepared";
    const auto hist = train_run(prep, run_dir);
    CHECK(hist.best_epoch == h.best_epoch);
    CHECK(fixture::slurp(run_dir / "model.ckpt") == saved);
    std::filesystem::remove_all(data);
    std::filesystem::remove_all(run_dir);
  }

  TEST_CASE("config validation") {
    TrainConfig tc;
    CHECK_NOTHROW(tc.validate());
    tc.patience = 0;
    CHECK_THROWS_AS(tc.validate(), ConfigError);
    tc = TrainConfig{};
    tc.learning_rate = -1;
    CHECK_THROWS_AS(tc.validate(), ConfigError);
    tc = TrainConfig{};
    tc.batch_size = 1;
    CHECK_THROWS_AS(tc.validate(), ConfigError);
  }

  TEST_CASE("basic variant averages attention uniformly") {
    auto cfg = fixture::tiny_config(2);
    const auto corpus = fixture::tiny_corpus(cfg);
    const auto sc = split_scenario(corpus.source, corpus.target, 1.0, cfg.seed);
    const auto store = make_store(sc, corpus.vocab, cfg);
    Model model = make_model(sc, Variant::basic, cfg.hyper(), corpus.vocab.size(), 5);
    const auto pair = sc.training_pairs(Flow::target_flow).front();
    const auto docs = pair_documents(store, pair);
    ad::Graph g(false);
    ModelGraph mg(g, model);
    PairTrace trace;
    forward_pair(mg, pair, docs, nullptr, &trace);
    const double n = static_cast<double>(docs.user.valid_count());
    for (const auto& beta : trace.user_attention)
      for (std::size_t j = 0; j < beta.size(); ++j) CHECK(beta[j] == (docs.user.mask[j] ? 1.0 / n : 0.0));
    for (double s : trace.correlation.values()) CHECK(s == 1.0);
  }
}
