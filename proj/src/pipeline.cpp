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

#include "catn/pipeline.hpp"

#include <fstream>
#include <ostream>
#include <set>

#include "catn/checkpoint.hpp"
#include "catn/error.hpp"

namespace catn {

namespace fs = std::filesystem;

UserSet overlapping_users(std::span<const Interaction> source,
                          std::span<const Interaction> target) {
  std::set<std::string> in_source;
  for (const auto& r : source) in_source.insert(r.user_id);
  UserSet out;
  for (const auto& r : target) {
    if (in_source.contains(r.user_id)) out.insert(r.user_id);
  }
  return out;
}

Corpus build_corpus(std::vector<Interaction> source, std::vector<Interaction> target,
                    const RunConfig& cfg) {
  Corpus c;
  c.source = filter_interactions(source, cfg.min_user, cfg.min_item);
  c.target = filter_interactions(target, cfg.min_user, cfg.min_item);
  if (c.source.empty() || c.target.empty()) {
    throw DataError("no interactions left after filtering (min_user=" +
                    std::to_string(cfg.min_user) + ", min_item=" + std::to_string(cfg.min_item) +
                    ")");
  }
  std::vector<Interaction> all = c.source;
  all.insert(all.end(), c.target.begin(), c.target.end());
  c.vocab = build_vocabulary(all, cfg.corpus_config());
  return c;
}

namespace {

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw DataError("cannot create directory " + dir.string() + ": " + ec.message());
}

std::vector<std::string> distinct(std::span<const Interaction> records, bool users) {
  std::set<std::string> ids;
  for (const auto& r : records) ids.insert(users ? r.user_id : r.item_id);
  return {ids.begin(), ids.end()};
}

}  // namespace

PrepareSummary prepare(const RunConfig& cfg, const fs::path& out_dir) {
  cfg.validate();
  if (cfg.source_path.empty() || cfg.target_path.empty()) {
    throw ConfigError("prepare needs both 'source' and 'target' interaction files");
  }
  for (const auto& p : {cfg.source_path, cfg.target_path}) {
    if (!fs::exists(p)) throw DataError("input file not found: " + p.string());
  }
  Corpus c = build_corpus(read_interactions(cfg.source_path, Domain::source),
                          read_interactions(cfg.target_path, Domain::target), cfg);
  ensure_dir(out_dir);
  const CorpusConfig cc = cfg.corpus_config();
  const UserSet overlap = overlapping_users(c.source, c.target);

  std::vector<Document> docs, aux;
  for (Domain d : {Domain::source, Domain::target}) {
    const auto& records = d == Domain::source ? c.source : c.target;
    for (const auto& u : distinct(records, true)) {
      docs.push_back(build_user_document(u, d, records, c.vocab, cc));
      aux.push_back(build_auxiliary_document(u, d, records, overlap, c.vocab, cc, cfg.seed));
    }
    for (const auto& i : distinct(records, false)) {
      docs.push_back(build_item_document(i, d, records, c.vocab, cc));
    }
  }
  c.vocab.save(out_dir / "vocab.tsv");
  write_interactions(out_dir / "source.jsonl", c.source);
  write_interactions(out_dir / "target.jsonl", c.target);
  save_documents(out_dir / "documents.bin", docs);
  save_documents(out_dir / "auxiliary.bin", aux);
  cfg.save(out_dir / "config.txt");

  PrepareSummary s;
  s.records[0] = c.source.size();
  s.records[1] = c.target.size();
  s.vocab_size = c.vocab.size();
  s.documents = docs.size();
  s.aux_documents = aux.size();
  return s;
}

Corpus load_corpus(const fs::path& data_dir) {
  Corpus c;
  for (const char* name : {"vocab.tsv", "source.jsonl", "target.jsonl"}) {
    if (!fs::exists(data_dir / name)) {
      throw DataError("missing " + (data_dir / name).string() + " (run prepare first)");
    }
  }
  c.vocab = Vocabulary::load(data_dir / "vocab.tsv");
  c.source = read_interactions(data_dir / "source.jsonl", Domain::source);
  c.target = read_interactions(data_dir / "target.jsonl", Domain::target);
  return c;
}

DocumentStore make_store(const Scenario& scenario, const Vocabulary& vocab, const RunConfig& cfg) {
  const UserSet overlap(scenario.overlap_users.begin(), scenario.overlap_users.end());
  return DocumentStore(scenario.visible(Domain::source), scenario.visible(Domain::target), vocab,
                       cfg.corpus_config(), overlap, cfg.seed);
}

Experiment run_experiment(const Corpus& corpus, const RunConfig& cfg,
                          const TrainCallbacks& callbacks) {
  cfg.validate();
  Scenario scenario = split_scenario(corpus.source, corpus.target, cfg.eta, cfg.seed);
  DocumentStore store = make_store(scenario, corpus.vocab, cfg);
  const TrainConfig tc = cfg.train_config();
  Model model = make_model(scenario, tc.variant, cfg.hyper(), corpus.vocab.size(), cfg.seed);
  if (!cfg.embeddings_path.empty()) model.load_embeddings(cfg.embeddings_path, corpus.vocab);
  TrainResult result = train(scenario, store, std::move(model), tc, callbacks);
  return {std::move(scenario), std::move(store), std::move(result)};
}

TrainHistory train_run(const RunConfig& cfg, const fs::path& run_dir, std::ostream* log) {
  cfg.validate();
  if (cfg.data_dir.empty()) throw ConfigError("train needs 'data_dir' (the prepare output)");
  const Corpus corpus = load_corpus(cfg.data_dir);
  ensure_dir(run_dir);
  RunConfig saved = cfg;
  saved.data_dir = fs::absolute(cfg.data_dir);
  saved.save(run_dir / "config.txt");

  TrainCallbacks callbacks;
  callbacks.on_improvement = [&](const Model& m, const EpochRecord&) {
    ad::save_checkpoint(run_dir / "model.ckpt", m.to_checkpoint());
  };
  if (log != nullptr) {
    callbacks.on_epoch = [log](const EpochRecord& e) {
      *log << "epoch " << e.epoch << "  source " << e.train_loss_source << "  target "
           << e.train_loss_target << "  valid_mse " << e.valid_mse << '\n';
    };
  }
  Experiment ex = run_experiment(corpus, cfg, callbacks);
  save_manifest(ex.scenario, run_dir / "scenario.json");
  std::ofstream hist(run_dir / "history.csv", std::ios::binary);
  if (!hist) throw DataError("cannot write " + (run_dir / "history.csv").string());
  ex.result.history.write_csv(hist);
  return ex.result.history;
}

LoadedRun load_run(const fs::path& run_dir) {
  for (const char* name : {"config.txt", "scenario.json", "model.ckpt"}) {
    if (!fs::exists(run_dir / name)) {
      throw DataError("missing " + (run_dir / name).string() + " (run train first)");
    }
  }
  RunConfig cfg = RunConfig::load(run_dir / "config.txt");
  Corpus corpus = load_corpus(cfg.data_dir);
  Scenario scenario = load_manifest(run_dir / "scenario.json", corpus.source, corpus.target);
  DocumentStore store = make_store(scenario, corpus.vocab, cfg);
  Model model = Model::from_checkpoint(ad::load_checkpoint(run_dir / "model.ckpt"));
  return {std::move(cfg), std::move(corpus), std::move(scenario), std::move(store),
          std::move(model)};
}

namespace {

void write_json(const fs::path& path, const nlohmann::ordered_json& j) {
  if (path.has_parent_path()) ensure_dir(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

}  // namespace

EvalReport eval_run(const fs::path& run_dir, bool test_split, const fs::path& out_json) {
  LoadedRun run = load_run(run_dir);
  EvalReport report = evaluate(run.model, run.scenario, run.store, test_split);
  write_json(out_json, report.to_json());
  return report;
}

PairExplanation explain_run(const fs::path& run_dir, const std::string& user,
                            const std::string& item, std::size_t top_k, const fs::path& out_json,
                            const fs::path& out_csv) {
  LoadedRun run = load_run(run_dir);
  PairExplanation ex = explain_pair(run.model, run.store, run.corpus.vocab, user, item, top_k);
  write_json(out_json, ex.to_json());
  if (out_csv.has_parent_path()) ensure_dir(out_csv.parent_path());
  std::ofstream csv(out_csv, std::ios::binary);
  if (!csv) throw DataError("cannot write " + out_csv.string());
  write_matrix_csv(csv, correlation_matrix(run.model));
  return ex;
}

}  // namespace catn
