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

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>

#include "catn/checkpoint.hpp"
#include "catn/error.hpp"
#include "catn/gradcheck.hpp"
#include "catn/model.hpp"
#include "model_oracle.hpp"

using namespace catn;
using ad::Graph;
using ad::Tensor;
using ad::Var;
using oracle::Mat;
using oracle::Vec;
using namespace model_oracle;

namespace {

HyperParams tiny_hp() {
  HyperParams hp;
  hp.embed_dim = 4;
  hp.filters = 3;
  hp.window = 3;
  hp.latent = 2;
  hp.aspects = 2;
  hp.doc_length = 6;
  hp.keep_prob = 1.0;
  hp.init_scale = 0.8;
  hp.train_embeddings = true;
  return hp;
}

Document doc_of(std::vector<std::uint32_t> ids, std::size_t length, DocumentKind kind, Domain d) {
  return make_document(ids, length, "o", kind, d);
}

Document random_doc(std::mt19937_64& rng, std::size_t length, std::size_t vocab, DocumentKind kind,
                    Domain d) {
  std::vector<std::uint32_t> ids(1 + rng() % length);
  for (auto& id : ids) id = 1 + static_cast<std::uint32_t>(rng() % vocab);
  return doc_of(ids, length, kind, d);
}

struct TinyWorld {
  Model model;
  PairDocuments docs;
  RatingPair pair{"u", "i", 4.0, Flow::target_flow};
};

TinyWorld tiny_world(Variant v, std::uint64_t seed, Flow flow = Flow::target_flow) {
  std::mt19937_64 rng(seed);
  TinyWorld w{Model(v, tiny_hp(), 10), {}};
  w.pair.flow = flow;
  w.model.initialize(seed);
  const Domain ud = user_doc_domain(flow), rd = rating_domain(flow);
  w.model.set_bias_ids(rd, {"u"}, {"i"});
  for (auto& p : w.model.parameters())
    if (!p.regularized && p.name.rfind("bias", 0) == 0)
      for (double& x : p.tensor->values()) x = oracle::random_vec(rng, 1)[0];
  w.docs.user = random_doc(rng, 6, 10, DocumentKind::user, ud);
  w.docs.aux = random_doc(rng, 6, 10, DocumentKind::user_aux, ud);
  w.docs.item = random_doc(rng, 6, 10, DocumentKind::item, rd);
  return w;
}

double oracle_forward(TinyWorld& w) { return model_oracle::forward(w.model, w.pair, w.docs); }

double run_forward(TinyWorld& w, PairTrace* trace = nullptr) {
  Graph g(false);
  ModelGraph mg(g, w.model);
  return g.value(forward_pair(mg, w.pair, w.docs, nullptr, trace))[0];
}

BoundGate bind_gate(Graph& g, const Mat& w, const Vec& b, const Mat& wg, const Vec& bg) {
  return {g.constant(tensor(w)), g.constant(Tensor({b.size()}, b)), g.constant(tensor(wg)),
          g.constant(Tensor({bg.size()}, bg))};
}

}  // namespace

TEST_SUITE("model") {
  TEST_CASE("hyper-parameter validation and variant names") {
    HyperParams hp = tiny_hp();
    CHECK_NOTHROW(hp.validate());
    hp.window = 2;
    CHECK_THROWS_AS(hp.validate(), ConfigError);
    hp = tiny_hp();
    hp.keep_prob = 0.0;
    CHECK_THROWS_AS(hp.validate(), ConfigError);
    hp = tiny_hp();
    hp.latent = 0;
    CHECK_THROWS_AS(hp.validate(), ConfigError);
    for (Variant v : {Variant::basic, Variant::attn, Variant::separate, Variant::full})
      CHECK(parse_variant(variant_name(v)) == v);
    CHECK_THROWS_AS(parse_variant("deluxe"), ConfigError);
  }

  TEST_CASE("text convolution") {
    Graph g;
    SUBCASE("all-PAD document gives zeros") {
      Model m(Variant::full, tiny_hp(), 10);
      m.initialize(3);
      ModelGraph mg(g, m);
      const auto doc = doc_of({}, 6, DocumentKind::user, Domain::source);
      const auto& out = g.value(text_convolution(g, doc, mg.embeddings(), mg.flow(Flow::target_flow)));
      CHECK(out.shape() == ad::Shape{6, 3});
      for (double v : out.values()) CHECK(v == 0.0);
    }
    SUBCASE("one-hot toy case") {
      // Embeddings: word 1 -> [1, 0], word 2 -> [0, 1]. One filter sums the
      // left neighbour's first coordinate and minus the centre's second.
      const Var e = g.constant(Tensor::matrix(3, 2, {0, 0, 1, 0, 0, 1}));
      BoundFlow flow;
      flow.conv_w = g.constant(Tensor({1, 3, 2}, std::vector<double>{1, 0, 0, -1, 0, 0}));
      flow.conv_b = g.constant(Tensor({1}, 0.5));
      const auto doc = doc_of({1, 2, 1}, 3, DocumentKind::user, Domain::source);
      const auto& out = g.value(text_convolution(g, doc, e, flow));
      // h0: 0.5; h1: 1 - 1 + 0.5; h2: 0 + 0.5 (left word 2 has first coord 0)
      CHECK(out[0] == 0.5);
      CHECK(out[1] == 0.5);
      CHECK(out[2] == 0.5);
      const auto doc2 = doc_of({2, 2, 2}, 3, DocumentKind::user, Domain::source);
      const auto& out2 = g.value(text_convolution(g, doc2, e, flow));
      CHECK(out2[0] == 0.0);
      CHECK(out2[1] == 0.0);
    }
  }

  TEST_CASE("aspect gate") {
    std::mt19937_64 rng(4);
    const Mat c = oracle::random_mat(rng, 5, 3);
    const Mat w = oracle::random_mat(rng, 2, 3);
    const Vec b = oracle::random_vec(rng, 2);
    Graph g;
    const Var cv = g.constant(tensor(c));
    const Mat lin = oracle::gate(c, w, b, oracle::zeros(2, 3), Vec(2, 50.0));

    const auto& half = g.value(aspect_gate(g, cv, bind_gate(g, w, b, oracle::zeros(2, 3), Vec(2, 0.0))));
    CHECK(max_diff(half, oracle::gate(c, w, b, oracle::zeros(2, 3), Vec(2, 0.0))) <= 1e-15);
    for (std::size_t j = 0; j < 5; ++j)
      for (std::size_t r = 0; r < 2; ++r) CHECK(std::abs(half.at(j, r) - 0.5 * lin[j][r]) < 1e-15);

    const auto& shut = g.value(aspect_gate(g, cv, bind_gate(g, w, b, oracle::zeros(2, 3), Vec(2, -100.0))));
    for (std::size_t j = 0; j < 5; ++j)
      for (std::size_t r = 0; r < 2; ++r) CHECK(std::abs(shut.at(j, r)) < 1e-40 * std::abs(lin[j][r]));

    for (int trial = 0; trial < 20; ++trial) {
      const Mat wg = oracle::random_mat(rng, 2, 3);
      const Vec bg = oracle::random_vec(rng, 2);
      const auto& out = g.value(aspect_gate(g, cv, bind_gate(g, w, b, wg, bg)));
      CHECK(max_diff(out, oracle::gate(c, w, b, wg, bg)) <= 1e-12);
    }

    Model m(Variant::full, tiny_hp(), 10);
    ModelGraph mg(g, m);
    const Var c3 = g.constant(Tensor({6, 3}, 1.0));
    CHECK_NOTHROW(aspect_gate(g, c3, mg.flow(Flow::target_flow), 1));
    CHECK_THROWS_AS(aspect_gate(g, c3, mg.flow(Flow::target_flow), 2), Error);
  }

  TEST_CASE("aspect attention") {
    Graph g;
    const std::vector<std::uint8_t> mask = {1, 1, 1, 0};
    const Var same = g.constant(Tensor::matrix(4, 2, {0.3, -1, 0.3, -1, 0.3, -1, 9, 9}));
    const Var q = g.constant(Tensor::matrix(1, 2, {0.7, 0.2}));
    const auto uniform = aspect_attention(g, same, q, mask);
    CHECK(std::abs(g.value(uniform.aspect)[0] - 0.3) < 1e-15);
    CHECK(std::abs(g.value(uniform.aspect)[1] + 1.0) < 1e-15);

    const Var two = g.constant(Tensor::matrix(2, 1, {0.0, std::log(3.0)}));
    const Var one = g.constant(Tensor::matrix(1, 1, {1.0}));
    const auto w = g.value(aspect_attention(g, two, one, std::vector<std::uint8_t>{1, 1}).weights);
    CHECK(std::abs(w[0] - 0.25) < 1e-15);
    CHECK(std::abs(w[1] - 0.75) < 1e-15);

    const auto none = aspect_attention(g, same, q, std::vector<std::uint8_t>{0, 0, 0, 0});
    for (double v : g.value(none.aspect).values()) CHECK(v == 0.0);

    std::mt19937_64 rng(6);
    for (int trial = 0; trial < 50; ++trial) {
      const Mat gm = oracle::random_mat(rng, 5, 3);
      const Vec qv = oracle::random_vec(rng, 3);
      std::vector<std::uint8_t> m(5, 1);
      for (std::size_t j = 1 + rng() % 5; j < 5; ++j) m[j] = 0;
      const auto r = aspect_attention(g, g.constant(tensor(gm)), g.constant(Tensor::matrix(1, 3, qv)), m);
      const Vec beta = oracle::attention(gm, qv, m);
      const Vec a = oracle::weighted_rows(beta, gm);
      double sum = 0.0;
      for (std::size_t j = 0; j < 5; ++j) {
        CHECK(std::abs(g.value(r.weights)[j] - beta[j]) <= 1e-12);
        sum += g.value(r.weights)[j];
      }
      CHECK(std::abs(sum - 1.0) < 1e-9);
      for (std::size_t t = 0; t < 3; ++t) CHECK(std::abs(g.value(r.aspect)[t] - a[t]) <= 1e-12);
    }
  }

  TEST_CASE("aspect extraction and auxiliary extraction match the composed oracle") {
    std::mt19937_64 rng(8);
    for (int trial = 0; trial < 10; ++trial) {
      Model m(Variant::full, tiny_hp(), 10);
      m.initialize(100 + trial);
      Graph g;
      ModelGraph mg(g, m);
      const auto doc = random_doc(rng, 6, 10, DocumentKind::user, Domain::source);
      const auto& flow = mg.flow(Flow::target_flow);
      const auto ex = extract_aspects(g, doc, mg.queries(Domain::source), flow, mg.embeddings());
      const auto want = oracle_aspects(m, m.flow(Flow::target_flow), doc, &m.shared().source_queries, false);
      CHECK(max_diff(g.value(ex.aspects), want) <= 1e-12);
      const auto aux = extract_aux_aspects(g, doc, mg.queries(Domain::source), flow, mg.embeddings());
      const auto want_aux = oracle_aspects(m, m.flow(Flow::target_flow), doc, &m.shared().source_queries, true);
      CHECK(max_diff(g.value(aux.aspects), want_aux) <= 1e-12);
    }

    Model m(Variant::full, tiny_hp(), 10);
    m.initialize(2);
    const auto pad = doc_of({}, 6, DocumentKind::user, Domain::source);
    {
      Graph g;
      ModelGraph mg(g, m);
      for (double v : g.value(extract_aspects(g, pad, mg.queries(Domain::source), mg.flow(Flow::target_flow),
                                              mg.embeddings()).aspects).values())
        CHECK(v == 0.0);
      for (double v : g.value(extract_aux_aspects(g, pad, mg.queries(Domain::source),
                                                  mg.flow(Flow::target_flow), mg.embeddings()).aspects).values())
        CHECK(v == 0.0);
    }
    // Identity second layer: centre tap passes each channel through.
    auto& fp = m.flow(Flow::target_flow);
    for (double& v : fp.aux_w.values()) v = 0.0;
    for (double& v : fp.aux_b.values()) v = 0.0;
    for (std::size_t f = 0; f < 3; ++f) fp.aux_w[f * 9 + 1 * 3 + f] = 1.0;
    Graph g;
    ModelGraph mg(g, m);
    const auto doc = random_doc(rng, 6, 10, DocumentKind::user, Domain::source);
    const auto a = extract_aspects(g, doc, mg.queries(Domain::source), mg.flow(Flow::target_flow), mg.embeddings());
    const auto b = extract_aux_aspects(g, doc, mg.queries(Domain::source), mg.flow(Flow::target_flow), mg.embeddings());
    CHECK(g.value(a.aspects) == g.value(b.aspects));

    // M = 1 reduces to a single readout.
    HyperParams one = tiny_hp();
    one.aspects = 1;
    Model m1(Variant::full, one, 10);
    m1.initialize(5);
    Graph g1;
    ModelGraph mg1(g1, m1);
    const auto ex = extract_aspects(g1, doc, mg1.queries(Domain::target), mg1.flow(Flow::source_flow), mg1.embeddings());
    const Var c = text_convolution(g1, doc, mg1.embeddings(), mg1.flow(Flow::source_flow));
    const auto r = aspect_attention(g1, aspect_gate(g1, c, mg1.flow(Flow::source_flow), 0),
                                    *mg1.queries(Domain::target), doc.mask);
    CHECK(g1.value(ex.aspects) == g1.value(r.aspect));
  }

  TEST_CASE("auxiliary fusion") {
    std::mt19937_64 rng(10);
    Graph g;
    BoundFlow flow;
    const Mat au = oracle::random_mat(rng, 2, 3);
    const Mat w2 = oracle::random_mat(rng, 3, 6);
    const Vec b2 = oracle::random_vec(rng, 3);
    flow.fuse_w1 = g.constant(Tensor({3, 6}, 0.0));
    flow.fuse_b1 = g.constant(Tensor({3}, 0.0));
    flow.fuse_w2 = g.constant(tensor(w2));
    flow.fuse_b2 = g.constant(Tensor({3}, b2));
    const auto& out = g.value(fuse_auxiliary(g, g.constant(tensor(au)), g.constant(Tensor({2, 3}, 0.0)), flow));
    for (std::size_t m = 0; m < 2; ++m)
      for (std::size_t r = 0; r < 3; ++r) {
        double acc = b2[r];
        for (std::size_t t = 0; t < 3; ++t) acc += w2[r][t] * au[m][t];
        CHECK(std::abs(out.at(m, r) - std::tanh(acc)) < 1e-15);
      }

    for (int trial = 0; trial < 50; ++trial) {
      const Mat a = oracle::random_mat(rng, 2, 3), x = oracle::random_mat(rng, 2, 3);
      Mat w1 = oracle::random_mat(rng, 3, 6), w2r = oracle::random_mat(rng, 3, 6);
      const Vec b1 = oracle::random_vec(rng, 3), b2r = oracle::random_vec(rng, 3);
      BoundFlow f;
      f.fuse_w1 = g.constant(tensor(w1));
      f.fuse_b1 = g.constant(Tensor({3}, b1));
      f.fuse_w2 = g.constant(tensor(w2r));
      f.fuse_b2 = g.constant(Tensor({3}, b2r));
      const auto& fused = g.value(fuse_auxiliary(g, g.constant(tensor(a)), g.constant(tensor(x)), f));
      CHECK(max_diff(fused, oracle::fuse(a, x, w1, b1, w2r, b2r)) <= 1e-12);
      for (double v : fused.values()) CHECK((v > -1.0 && v < 1.0));
    }
    CHECK_THROWS_AS(fuse_auxiliary(g, g.constant(Tensor({2, 3}, 0.0)), g.constant(Tensor({3, 3}, 0.0)), flow),
                    ShapeError);
  }

  TEST_CASE("global correlation") {
    Graph g;
    std::mt19937_64 rng(12);
    const Mat vs = oracle::random_mat(rng, 3, 2), vt = oracle::random_mat(rng, 3, 2);
    const auto& zero = g.value(global_correlation(g, g.constant(tensor(vs)), g.constant(tensor(vt)),
                                                  g.constant(Tensor({2, 2}, 0.0)), 0.01));
    for (double v : zero.values()) CHECK(v == 0.0);

    const Tensor eye = Tensor::matrix(3, 3, {1, 0, 0, 0, 1, 0, 0, 0, 1});
    const auto& id = g.value(global_correlation(g, g.constant(eye), g.constant(eye), g.constant(eye), 0.01));
    CHECK(id == eye);

    for (int trial = 0; trial < 50; ++trial) {
      const Mat a = oracle::random_mat(rng, 3, 2), b = oracle::random_mat(rng, 3, 2), w = oracle::random_mat(rng, 2, 2);
      const auto& s = g.value(global_correlation(g, g.constant(tensor(a)), g.constant(tensor(b)),
                                                 g.constant(tensor(w)), 0.01));
      CHECK(max_diff(s, oracle::correlation(a, b, w, 0.01)) <= 1e-12);
    }
  }

  TEST_CASE("prediction") {
    Graph g;
    const auto scalar = [&](double v) { return g.constant(Tensor::matrix(1, 1, {v})); };
    const auto p = predict(g, scalar(2), scalar(3), scalar(1), scalar(1), g.constant(Tensor::scalar(0)),
                           g.constant(Tensor::scalar(0)));
    CHECK(g.value(p.rating)[0] == 6.0);

    std::mt19937_64 rng(14);
    const Mat ai = oracle::random_mat(rng, 2, 2), s = oracle::random_mat(rng, 2, 2), w = oracle::random_mat(rng, 2, 2);
    const auto zero = predict(g, g.constant(Tensor({2, 2}, 0.0)), g.constant(tensor(ai)), g.constant(tensor(s)),
                              g.constant(tensor(w)), g.constant(Tensor::scalar(1.25)), g.constant(Tensor::scalar(2.0)));
    CHECK(g.value(zero.rating)[0] == 3.25);

    for (int trial = 0; trial < 100; ++trial) {
      const Mat a = oracle::random_mat(rng, 2, 2), b = oracle::random_mat(rng, 2, 2);
      const Mat sm = oracle::random_mat(rng, 2, 2), wm = oracle::random_mat(rng, 2, 2);
      const double bu = oracle::random_vec(rng, 1)[0], bi = oracle::random_vec(rng, 1)[0];
      const auto r = predict(g, g.constant(tensor(a)), g.constant(tensor(b)), g.constant(tensor(sm)),
                             g.constant(tensor(wm)), g.constant(Tensor::scalar(bu)), g.constant(Tensor::scalar(bi)));
      CHECK(std::abs(g.value(r.rating)[0] - oracle::predict(a, b, sm, wm, bu, bi)) <= 1e-12);
    }
    CHECK_THROWS_AS(predict(g, g.constant(Tensor({2, 2}, 0.0)), g.constant(tensor(ai)),
                            g.constant(Tensor({3, 3}, 1.0)), g.constant(tensor(w)),
                            g.constant(Tensor::scalar(0)), g.constant(Tensor::scalar(0))),
                    ShapeError);
  }

  TEST_CASE("prediction is invariant to permuting aspects consistently") {
    std::mt19937_64 rng(16);
    for (int trial = 0; trial < 20; ++trial) {
      const Mat au = oracle::random_mat(rng, 3, 2), ai = oracle::random_mat(rng, 3, 2);
      const Mat vs = oracle::random_mat(rng, 3, 2), vt = oracle::random_mat(rng, 3, 2);
      const Mat w = oracle::random_mat(rng, 2, 2);
      std::vector<std::size_t> perm = {0, 1, 2};
      std::shuffle(perm.begin(), perm.end(), rng);
      Mat au_p(3), vs_p(3), ai_p(3), vt_p(3);
      for (std::size_t j = 0; j < 3; ++j) {
        au_p[j] = au[perm[j]];
        vs_p[j] = vs[perm[j]];
        ai_p[j] = ai[perm[(j + 1) % 3]];
        vt_p[j] = vt[perm[(j + 1) % 3]];
      }
      auto run = [&](const Mat& a, const Mat& b, const Mat& s_src, const Mat& s_tgt) {
        Graph g;
        const Var s = global_correlation(g, g.constant(tensor(s_src)), g.constant(tensor(s_tgt)),
                                         g.constant(tensor(w)), 0.01);
        return g.value(predict(g, g.constant(tensor(a)), g.constant(tensor(b)), s, g.constant(tensor(w)),
                               g.constant(Tensor::scalar(0.1)), g.constant(Tensor::scalar(0.2))).rating)[0];
      };
      CHECK(std::abs(run(au, ai, vs, vt) - run(au_p, ai, vs_p, vt)) < 1e-12);
      CHECK(std::abs(run(au, ai, vs, vt) - run(au, ai_p, vs, vt_p)) < 1e-12);
    }
  }

  TEST_CASE("bias-only model predicts the bias sum") {
    Model m(Variant::full, tiny_hp(), 10);
    m.set_bias_ids(Domain::target, {"u"}, {"i"});
    m.biases(Domain::target).global[0] = 0.5;
    m.biases(Domain::target).users.values[0] = 1.5;
    m.biases(Domain::target).items.values[0] = 1.5;
    std::mt19937_64 rng(1);
    TinyWorld w{m, {random_doc(rng, 6, 10, DocumentKind::user, Domain::source),
                    random_doc(rng, 6, 10, DocumentKind::user_aux, Domain::source),
                    random_doc(rng, 6, 10, DocumentKind::item, Domain::target)}};
    CHECK(run_forward(w) == 3.5);
    // Unknown users fall back to the domain offset, unknown items to zero.
    w.pair.user = "stranger";
    w.pair.item = "unseen";
    CHECK(run_forward(w) == 0.5);
  }

  TEST_CASE("full forward matches the end-to-end oracle for every variant and flow") {
    for (Variant v : {Variant::basic, Variant::attn, Variant::separate, Variant::full}) {
      for (Flow f : {Flow::target_flow, Flow::source_flow}) {
        for (std::uint64_t seed = 1; seed <= 5; ++seed) {
          CAPTURE(variant_name(v));
          auto w = tiny_world(v, seed, f);
          PairTrace trace;
          const double got = run_forward(w, &trace);
          CHECK(std::abs(got - oracle_forward(w)) <= 1e-12);
          CHECK(got == trace.prediction);
          CHECK(run_forward(w) == got);
          for (const auto& beta : trace.user_attention) {
            double sum = 0.0;
            for (double b : beta) sum += b;
            CHECK(std::abs(sum - 1.0) < 1e-9);
          }
          CHECK(trace.aux_attention.empty() == !apply_variant(v).auxiliary);
        }
      }
    }
  }

  TEST_CASE("forward rejects documents from the wrong domain") {
    auto w = tiny_world(Variant::full, 3);
    w.docs.item.domain = Domain::source;
    CHECK_THROWS_AS(run_forward(w), DataError);
  }

  TEST_CASE("flows share queries and affinity but not extraction parameters") {
    Model m(Variant::full, tiny_hp(), 10);
    auto names = [](std::vector<Model::NamedParam> ps) {
      std::set<ad::Tensor*> out;
      for (auto& p : ps) out.insert(p.tensor);
      return out;
    };
    const auto a = names(m.parameters_for(Flow::source_flow));
    const auto b = names(m.parameters_for(Flow::target_flow));
    std::set<ad::Tensor*> common;
    std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::inserter(common, common.end()));
    const std::set<ad::Tensor*> shared = {&m.shared().embeddings, &m.shared().source_queries,
                                          &m.shared().target_queries, &m.shared().affinity};
    CHECK(common == shared);
    CHECK(&m.flow(Flow::source_flow) != &m.flow(Flow::target_flow));

    Graph g;
    ModelGraph mg(g, m);
    CHECK(mg.flow(Flow::source_flow).conv_w.id != mg.flow(Flow::target_flow).conv_w.id);
    CHECK(mg.correlation(Flow::target_flow).id == mg.correlation(Flow::target_flow).id);

    Model attn(Variant::attn, tiny_hp(), 10);
    CHECK(&attn.flow(Flow::source_flow) == &attn.flow(Flow::target_flow));
  }

  TEST_CASE("parameter counts grow along the ablation chain") {
    const HyperParams hp = tiny_hp();
    const std::size_t V = 10, d = hp.embed_dim, n = hp.filters, s = hp.window, k = hp.latent, M = hp.aspects;
    const std::size_t conv = n * s * d + n, gates = M * (2 * k * n + 2 * k);
    const std::size_t aux = n * s * n + n + 2 * (2 * k * k + k);
    const std::size_t embed = (V + 1) * d, queries = 2 * M * k, affinity = k * k, bias = 2;
    const std::size_t expected[4] = {
        conv + gates + embed + affinity + bias,
        conv + gates + embed + queries + affinity + bias,
        2 * (conv + gates) + embed + queries + affinity + bias,
        2 * (conv + gates + aux) + embed + queries + affinity + bias,
    };
    std::size_t previous = 0;
    int j = 0;
    for (Variant v : {Variant::basic, Variant::attn, Variant::separate, Variant::full}) {
      Model m(v, hp, V);
      CHECK(m.parameter_count() == expected[j++]);
      CHECK(m.parameter_count() > previous);
      previous = m.parameter_count();
    }
  }

  TEST_CASE("initialization ranges and PAD row") {
    HyperParams hp = tiny_hp();
    hp.init_scale = 0.1;
    Model m(Variant::full, hp, 10);
    m.initialize(9);
    for (auto& p : m.parameters()) {
      for (double v : p.tensor->values()) {
        if (p.init_scale == 0.0) {
          CHECK(v == 0.0);
        } else {
          CHECK(std::abs(v) <= 0.1 * p.init_scale);
        }
      }
    }
    for (std::size_t c = 0; c < hp.embed_dim; ++c) CHECK(m.shared().embeddings.at(0, c) == 0.0);
    Model again(Variant::full, hp, 10);
    again.initialize(9);
    CHECK(ad::checkpoint_bytes(again.to_checkpoint()) == ad::checkpoint_bytes(m.to_checkpoint()));
  }

  TEST_CASE("model checkpoints round-trip with stable names") {
    for (Variant v : {Variant::basic, Variant::attn, Variant::separate, Variant::full}) {
      auto w = tiny_world(v, 4);
      const auto tensors = w.model.to_checkpoint();
      std::set<std::string> names;
      for (const auto& t : tensors) names.insert(t.name);
      CHECK(names.contains("flowA.conv.W"));
      CHECK(names.contains("flowA.gate.2.Wg"));
      CHECK(names.contains("shared.W"));
      CHECK(names.contains("bias.user.target.u"));
      CHECK(names.contains("flowB.conv.W") == apply_variant(v).per_flow_parameters);
      CHECK(names.contains("shared.Vs") == apply_variant(v).attention);
      Model back = Model::from_checkpoint(tensors);
      CHECK(back.variant() == v);
      CHECK(back.hyper().aspects == 2);
      CHECK(ad::checkpoint_bytes(back.to_checkpoint()) == ad::checkpoint_bytes(tensors));
      TinyWorld w2{back, w.docs, w.pair};
      CHECK(run_forward(w2) == run_forward(w));
    }
  }

  TEST_CASE("analytic gradients match finite differences for every variant") {
    for (Variant v : {Variant::basic, Variant::attn, Variant::separate, Variant::full}) {
      GradcheckOptions opt;
      opt.variant = v;
      const auto report = run_gradcheck(opt);
      CAPTURE(variant_name(v));
      CHECK(report.max_rel_error < 1e-4);
      CHECK(report.checked > 100);
      for (const auto& t : report.tensors) CHECK(t.checked > 0);
    }
  }
}
