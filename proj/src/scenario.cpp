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

#include "catn/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <json.hpp>

#include "catn/error.hpp"
#include "catn/rng.hpp"

namespace catn {

std::string_view flow_name(Flow f) {
  return f == Flow::source_flow ? "source_flow" : "target_flow";
}

std::size_t Batch::count(Flow f) const {
  return static_cast<std::size_t>(
      std::count_if(pairs.begin(), pairs.end(), [f](const RatingPair& p) { return p.flow == f; }));
}

PartitionSizes partition_sizes(std::size_t n_overlap, double eta) {
  if (n_overlap < 4) {
    throw DataError("need at least 4 overlapping users to form all partitions, found " +
                    std::to_string(n_overlap));
  }
  if (!(eta > 0.0 && eta <= 1.0)) throw ConfigError("eta must be in (0, 1]");
  PartitionSizes s;
  s.pool = (n_overlap + 1) / 2;
  const std::size_t cold = n_overlap - s.pool;
  s.test = (3 * cold + 4) / 5;
  s.validation = cold - s.test;
  if (s.validation == 0) {
    --s.test;
    s.validation = 1;
  }
  const double kept = std::floor(eta * static_cast<double>(s.pool) + 1e-9);
  s.train = std::max<std::size_t>(1, static_cast<std::size_t>(kept));
  return s;
}

bool Scenario::is_cold_start(std::string_view user) const {
  const std::string u(user);
  return test_users.contains(u) || validation_users.contains(u);
}

std::vector<RatingPair> Scenario::training_pairs(Flow flow) const {
  const auto& records = flow == Flow::source_flow ? source : target;
  std::vector<RatingPair> pairs;
  for (const auto& r : records) {
    if (train_users.contains(r.user_id)) pairs.push_back({r.user_id, r.item_id, r.rating, flow});
  }
  return pairs;
}

std::vector<RatingPair> Scenario::heldout_pairs(bool test) const {
  const auto& users = test ? test_users : validation_users;
  std::vector<RatingPair> pairs;
  for (const auto& r : target) {
    if (users.contains(r.user_id)) {
      pairs.push_back({r.user_id, r.item_id, r.rating, Flow::target_flow});
    }
  }
  return pairs;
}

std::vector<Interaction> Scenario::visible(Domain domain) const {
  if (domain == Domain::source) return source;
  std::vector<Interaction> out;
  for (const auto& r : target) {
    if (!is_cold_start(r.user_id)) out.push_back(r);
  }
  return out;
}

namespace {

std::vector<std::string> overlapping_users(const std::vector<Interaction>& source,
                                           const std::vector<Interaction>& target) {
  std::set<std::string> s, t;
  for (const auto& r : source) s.insert(r.user_id);
  for (const auto& r : target) t.insert(r.user_id);
  std::vector<std::string> both;
  std::set_intersection(s.begin(), s.end(), t.begin(), t.end(), std::back_inserter(both));
  return both;
}

void tag_domain(std::vector<Interaction>& records, Domain d) {
  for (auto& r : records) r.domain = d;
}

}  // namespace

Scenario split_scenario(std::vector<Interaction> source, std::vector<Interaction> target,
                        double eta, std::uint64_t seed) {
  Scenario sc;
  tag_domain(source, Domain::source);
  tag_domain(target, Domain::target);
  sc.source = std::move(source);
  sc.target = std::move(target);
  sc.eta = eta;
  sc.seed = seed;
  sc.overlap_users = overlapping_users(sc.source, sc.target);
  const PartitionSizes sizes = partition_sizes(sc.overlap_users.size(), eta);

  sc.shuffled_overlap = sc.overlap_users;
  Rng rng(mix_seed(seed, 0x5311));
  shuffle(std::span<std::string>(sc.shuffled_overlap), rng);

  auto it = sc.shuffled_overlap.begin();
  sc.test_users.insert(it, it + static_cast<std::ptrdiff_t>(sizes.test));
  it += static_cast<std::ptrdiff_t>(sizes.test);
  sc.validation_users.insert(it, it + static_cast<std::ptrdiff_t>(sizes.validation));
  it += static_cast<std::ptrdiff_t>(sizes.validation);
  sc.train_pool.assign(it, sc.shuffled_overlap.end());
  // A prefix of the shuffled pool, so smaller eta gives nested subsets.
  sc.train_users.insert(sc.train_pool.begin(),
                        sc.train_pool.begin() + static_cast<std::ptrdiff_t>(sizes.train));
  return sc;
}

std::vector<Batch> make_batches(const Scenario& scenario, std::size_t batch_size,
                                std::uint64_t seed, std::size_t epoch) {
  if (batch_size < 2) throw ConfigError("batch_size must be at least 2");
  auto src = scenario.training_pairs(Flow::source_flow);
  auto tgt = scenario.training_pairs(Flow::target_flow);
  if (src.empty() || tgt.empty()) {
    throw DataError("training users have no ratings in the " +
                    std::string(src.empty() ? "source" : "target") + " domain");
  }
  Rng rng(mix_seed(seed, 0xB000 + epoch));
  shuffle(std::span<RatingPair>(src), rng);
  shuffle(std::span<RatingPair>(tgt), rng);

  const std::size_t total = src.size() + tgt.size();
  std::size_t n_batches = (total + batch_size - 1) / batch_size;
  // Every batch must carry both flows.
  n_batches = std::max<std::size_t>(1, std::min({n_batches, src.size(), tgt.size()}));

  std::vector<Batch> batches(n_batches);
  auto cut = [n_batches](std::size_t count, std::size_t b) { return b * count / n_batches; };
  for (std::size_t b = 0; b < n_batches; ++b) {
    auto& pairs = batches[b].pairs;
    for (std::size_t j = cut(src.size(), b); j < cut(src.size(), b + 1); ++j) pairs.push_back(src[j]);
    for (std::size_t j = cut(tgt.size(), b); j < cut(tgt.size(), b + 1); ++j) pairs.push_back(tgt[j]);
  }
  return batches;
}

void save_manifest(const Scenario& sc, const std::filesystem::path& path) {
  nlohmann::ordered_json j;
  j["seed"] = sc.seed;
  j["eta"] = sc.eta;
  j["overlap_users"] = sc.shuffled_overlap;
  j["test_users"] = sc.test_users;
  j["validation_users"] = sc.validation_users;
  j["train_pool"] = sc.train_pool;
  j["train_users"] = sc.train_users;
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError("cannot open " + path.string() + " for writing");
  out << j.dump(2) << '\n';
}

Scenario load_manifest(const std::filesystem::path& path, std::vector<Interaction> source,
                       std::vector<Interaction> target) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open scenario manifest " + path.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw DataError("scenario manifest " + path.string() + ": " + e.what());
  }
  Scenario sc;
  tag_domain(source, Domain::source);
  tag_domain(target, Domain::target);
  sc.source = std::move(source);
  sc.target = std::move(target);
  try {
    sc.seed = j.at("seed").get<std::uint64_t>();
    sc.eta = j.at("eta").get<double>();
    sc.shuffled_overlap = j.at("overlap_users").get<std::vector<std::string>>();
    sc.test_users = j.at("test_users").get<std::set<std::string>>();
    sc.validation_users = j.at("validation_users").get<std::set<std::string>>();
    sc.train_pool = j.at("train_pool").get<std::vector<std::string>>();
    sc.train_users = j.at("train_users").get<std::set<std::string>>();
  } catch (const nlohmann::json::exception& e) {
    throw DataError("scenario manifest " + path.string() + ": " + e.what());
  }
  sc.overlap_users = sc.shuffled_overlap;
  std::sort(sc.overlap_users.begin(), sc.overlap_users.end());
  return sc;
}

}  // namespace catn
