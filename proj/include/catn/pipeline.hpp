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

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "catn/documents.hpp"
#include "catn/evaluation.hpp"
#include "catn/run_config.hpp"
#include "catn/scenario.hpp"
#include "catn/trainer.hpp"

namespace catn {

struct Corpus {
  std::vector<Interaction> source;
  std::vector<Interaction> target;
  Vocabulary vocab;
};

UserSet overlapping_users(std::span<const Interaction> source, std::span<const Interaction> target);

// Filters both domains with the configured thresholds and builds one
// vocabulary over all remaining reviews.
Corpus build_corpus(std::vector<Interaction> source, std::vector<Interaction> target,
                    const RunConfig& cfg);

struct PrepareSummary {
  std::size_t records[2] = {0, 0};
  std::size_t vocab_size = 0;
  std::size_t documents = 0;      // user and item documents
  std::size_t aux_documents = 0;  // one per user and domain
};

// Writes vocab.tsv, source.jsonl, target.jsonl (filtered), documents.bin,
// auxiliary.bin and config.txt into `out_dir`.
PrepareSummary prepare(const RunConfig& cfg, const std::filesystem::path& out_dir);
Corpus load_corpus(const std::filesystem::path& data_dir);

// Documents from the records the scenario lets training see.
DocumentStore make_store(const Scenario& scenario, const Vocabulary& vocab, const RunConfig& cfg);

struct Experiment {
  Scenario scenario;
  DocumentStore store;
  TrainResult result;
};

Experiment run_experiment(const Corpus& corpus, const RunConfig& cfg,
                          const TrainCallbacks& callbacks = {});

// Trains on a prepared directory and writes model.ckpt (best validation
// epoch), history.csv, scenario.json and config.txt into `run_dir`.
// Per-epoch progress goes to `log` when it is not null.
TrainHistory train_run(const RunConfig& cfg, const std::filesystem::path& run_dir,
                       std::ostream* log = nullptr);

struct LoadedRun {
  RunConfig cfg;
  Corpus corpus;
  Scenario scenario;
  DocumentStore store;
  Model model;
};

LoadedRun load_run(const std::filesystem::path& run_dir);

EvalReport eval_run(const std::filesystem::path& run_dir, bool test_split,
                    const std::filesystem::path& out_json);
// Writes the explanation JSON to `out_json` and S as CSV to `out_csv`.
PairExplanation explain_run(const std::filesystem::path& run_dir, const std::string& user,
                            const std::string& item, std::size_t top_k,
                            const std::filesystem::path& out_json,
                            const std::filesystem::path& out_csv);

}  // namespace catn
