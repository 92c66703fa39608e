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
#include <set>
#include <span>
#include <string>
#include <vector>

#include "catn/text.hpp"

namespace catn {

// Which rating a training pair supervises: source_flow pairs predict a
// source-domain rating from the user's target-domain documents, target_flow
// pairs the other way round.
enum class Flow : std::uint8_t { source_flow = 0, target_flow = 1 };

std::string_view flow_name(Flow f);
inline Domain rating_domain(Flow f) {
  return f == Flow::source_flow ? Domain::source : Domain::target;
}
inline Domain user_doc_domain(Flow f) { return other_domain(rating_domain(f)); }

struct RatingPair {
  std::string user;
  std::string item;
  double rating = 0.0;
  Flow flow = Flow::target_flow;

  friend bool operator==(const RatingPair&, const RatingPair&) = default;
};

struct Batch {
  std::vector<RatingPair> pairs;
  std::size_t size() const noexcept { return pairs.size(); }
  std::size_t count(Flow f) const;
};

struct PartitionSizes {
  std::size_t test = 0;
  std::size_t validation = 0;
  std::size_t pool = 0;
  std::size_t train = 0;
};

// Sizes for n overlapping users: half (rounded up) forms the training pool,
// the cold-start half is split 60/40 into test/validation with the test
// share rounded up, and the training set keeps floor(eta * pool) users, at
// least one. Requires n >= 4.
PartitionSizes partition_sizes(std::size_t n_overlap, double eta);

struct Scenario {
  std::vector<Interaction> source;
  std::vector<Interaction> target;
  std::vector<std::string> overlap_users;        // sorted
  std::vector<std::string> shuffled_overlap;     // seeded permutation used for the split
  std::set<std::string> test_users;
  std::set<std::string> validation_users;
  std::vector<std::string> train_pool;           // in shuffled order
  std::set<std::string> train_users;             // eta-prefix of train_pool
  double eta = 1.0;
  std::uint64_t seed = 0;

  bool is_cold_start(std::string_view user) const;
  // Ratings of training users, as source_flow / target_flow pairs.
  std::vector<RatingPair> training_pairs(Flow flow) const;
  // Held-out target-domain ratings of test or validation users.
  std::vector<RatingPair> heldout_pairs(bool test) const;
  // Records that documents may use: everything except the cold-start users'
  // target-domain ratings.
  std::vector<Interaction> visible(Domain domain) const;
};

Scenario split_scenario(std::vector<Interaction> source, std::vector<Interaction> target,
                        double eta, std::uint64_t seed);

// Deterministic per (seed, epoch). Each batch carries both flows in the
// global ratio |R_s| : |R_t| (cumulative floor apportionment), and one
// epoch covers every training rating exactly once.
std::vector<Batch> make_batches(const Scenario& scenario, std::size_t batch_size,
                                std::uint64_t seed, std::size_t epoch);

// Manifest JSON with seed, eta and every partition, for exact resplits.
void save_manifest(const Scenario& scenario, const std::filesystem::path& path);
Scenario load_manifest(const std::filesystem::path& path, std::vector<Interaction> source,
                       std::vector<Interaction> target);

}  // namespace catn
