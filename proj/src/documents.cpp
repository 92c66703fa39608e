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

#include "catn/documents.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>

#include "catn/endian.hpp"
#include "catn/error.hpp"
#include "catn/rng.hpp"

namespace catn {

std::string_view kind_name(DocumentKind kind) {
  switch (kind) {
    case DocumentKind::user: return "user";
    case DocumentKind::item: return "item";
    case DocumentKind::user_aux: return "user_aux";
  }
  return "unknown";
}

std::size_t Document::valid_count() const noexcept {
  return static_cast<std::size_t>(std::count(mask.begin(), mask.end(), std::uint8_t{1}));
}

Document make_document(std::span<const std::uint32_t> tokens, std::size_t length,
                       std::string owner, DocumentKind kind, Domain domain) {
  Document doc;
  doc.owner = std::move(owner);
  doc.kind = kind;
  doc.domain = domain;
  doc.token_ids.assign(length, Vocabulary::kPad);
  doc.mask.assign(length, 0);
  const std::size_t n = std::min(length, tokens.size());
  for (std::size_t j = 0; j < n; ++j) {
    doc.token_ids[j] = tokens[j];
    doc.mask[j] = 1;
  }
  return doc;
}

namespace {

// Indices of `records` in `domain` matching `pred`, stably ordered by key.
template <typename Pred, typename Key>
std::vector<std::size_t> ordered_records(std::span<const Interaction> records, Domain domain,
                                         Pred pred, Key key) {
  std::vector<std::size_t> idx;
  for (std::size_t r = 0; r < records.size(); ++r) {
    if (records[r].domain == domain && pred(records[r])) idx.push_back(r);
  }
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    return key(records[a]) < key(records[b]);
  });
  return idx;
}

void append(std::vector<std::uint32_t>& dst, const std::vector<std::uint32_t>& src) {
  dst.insert(dst.end(), src.begin(), src.end());
}

}  // namespace

Document build_user_document(std::string_view user, Domain domain,
                             std::span<const Interaction> interactions,
                             const Vocabulary& vocab, const CorpusConfig& cfg) {
  const auto idx = ordered_records(
      interactions, domain, [&](const Interaction& r) { return r.user_id == user; },
      [](const Interaction& r) -> const std::string& { return r.item_id; });
  if (idx.empty()) {
    throw DataError("unknown user '" + std::string(user) + "' in " +
                    std::string(domain_name(domain)) + " domain");
  }
  std::vector<std::uint32_t> tokens;
  for (auto r : idx) append(tokens, vocab.encode(interactions[r].review_text));
  return make_document(tokens, cfg.doc_length, std::string(user), DocumentKind::user, domain);
}

Document build_item_document(std::string_view item, Domain domain,
                             std::span<const Interaction> interactions,
                             const Vocabulary& vocab, const CorpusConfig& cfg) {
  const auto idx = ordered_records(
      interactions, domain, [&](const Interaction& r) { return r.item_id == item; },
      [](const Interaction& r) -> const std::string& { return r.user_id; });
  if (idx.empty()) {
    throw DataError("unknown item '" + std::string(item) + "' in " +
                    std::string(domain_name(domain)) + " domain");
  }
  std::vector<std::uint32_t> tokens;
  for (auto r : idx) append(tokens, vocab.encode(interactions[r].review_text));
  return make_document(tokens, cfg.doc_length, std::string(item), DocumentKind::item, domain);
}

std::uint64_t auxiliary_stream_seed(std::uint64_t seed, std::string_view user, Domain domain) {
  return mix_seed(seed, fnv1a(user) ^ (static_cast<std::uint64_t>(domain) + 1));
}

Document build_auxiliary_document(std::string_view user, Domain domain,
                                  std::span<const Interaction> interactions,
                                  const UserSet& overlap_users, const Vocabulary& vocab,
                                  const CorpusConfig& cfg, std::uint64_t seed) {
  const auto own = ordered_records(
      interactions, domain, [&](const Interaction& r) { return r.user_id == user; },
      [](const Interaction& r) -> const std::string& { return r.item_id; });
  if (own.empty()) {
    throw DataError("unknown user '" + std::string(user) + "' in " +
                    std::string(domain_name(domain)) + " domain");
  }
  Rng rng(auxiliary_stream_seed(seed, user, domain));
  std::vector<std::uint32_t> tokens;
  for (auto r : own) {
    const Interaction& mine = interactions[r];
    std::vector<std::size_t> candidates;
    for (std::size_t c = 0; c < interactions.size(); ++c) {
      const Interaction& other = interactions[c];
      if (other.domain == domain && other.item_id == mine.item_id &&
          other.rating == mine.rating && other.user_id != user &&
          !overlap_users.contains(other.user_id)) {
        candidates.push_back(c);
      }
    }
    if (candidates.empty()) continue;
    const auto pick = candidates[uniform_index(rng, candidates.size())];
    append(tokens, vocab.encode(interactions[pick].review_text));
  }
  return make_document(tokens, cfg.doc_length, std::string(user), DocumentKind::user_aux, domain);
}

void write_documents(std::ostream& out, std::span<const Document> docs) {
  const std::size_t length = docs.empty() ? 0 : docs.front().length();
  io::put_u64(out, docs.size());
  io::put_u64(out, length);
  for (const auto& d : docs) {
    if (d.length() != length || d.mask.size() != length) {
      throw DataError("documents file: all documents must share one length");
    }
    io::put_u64(out, d.owner.size());
    out.write(d.owner.data(), static_cast<std::streamsize>(d.owner.size()));
    io::put_u8(out, static_cast<std::uint8_t>(d.kind));
    io::put_u8(out, static_cast<std::uint8_t>(d.domain));
    for (auto t : d.token_ids) io::put_u32(out, t);
    for (auto m : d.mask) io::put_u8(out, m);
  }
  if (!out) throw DataError("documents file: write failed");
}

std::vector<Document> read_documents(std::istream& in) {
  const std::uint64_t count = io::get_u64(in);
  const std::uint64_t length = io::get_u64(in);
  std::vector<Document> docs;
  docs.reserve(static_cast<std::size_t>(std::min<std::uint64_t>(count, 1u << 20)));
  for (std::uint64_t n = 0; n < count; ++n) {
    Document d;
    const std::uint64_t owner_len = io::get_u64(in);
    if (owner_len > (1u << 20)) throw DataError("documents file: corrupt owner length");
    d.owner.resize(owner_len);
    in.read(d.owner.data(), static_cast<std::streamsize>(owner_len));
    const auto kind = io::get_u8(in);
    const auto domain = io::get_u8(in);
    if (kind > 2 || domain > 1) throw DataError("documents file: bad kind/domain byte");
    d.kind = static_cast<DocumentKind>(kind);
    d.domain = static_cast<Domain>(domain);
    d.token_ids.resize(length);
    d.mask.resize(length);
    for (auto& t : d.token_ids) t = io::get_u32(in);
    for (auto& m : d.mask) m = io::get_u8(in);
    docs.push_back(std::move(d));
  }
  return docs;
}

void save_documents(const std::filesystem::path& path, std::span<const Document> docs) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot open " + path.string() + " for writing");
  write_documents(out, docs);
}

std::vector<Document> load_documents(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open documents file " + path.string());
  return read_documents(in);
}

DocumentStore::DocumentStore(std::span<const Interaction> source,
                             std::span<const Interaction> target, const Vocabulary& vocab,
                             const CorpusConfig& cfg, UserSet overlap_users, std::uint64_t seed)
    : length_(cfg.doc_length), overlap_(std::move(overlap_users)) {
  cfg.validate();
  index_domain(Domain::source, source, vocab);
  index_domain(Domain::target, target, vocab);
  build_auxiliary(Domain::source, seed);
  build_auxiliary(Domain::target, seed);
}

void DocumentStore::index_domain(Domain domain, std::span<const Interaction> records,
                                 const Vocabulary& vocab) {
  DomainIndex& ix = domains_[static_cast<int>(domain)];
  for (const auto& r : records) {
    if (r.domain != domain) continue;
    ix.records.push_back({r.user_id, r.item_id, r.rating, vocab.encode(r.review_text)});
  }
  for (std::size_t i = 0; i < ix.records.size(); ++i) {
    ix.by_user[ix.records[i].user].push_back(i);
    ix.by_item[ix.records[i].item].push_back(i);
  }
  for (auto& [user, list] : ix.by_user) {
    std::stable_sort(list.begin(), list.end(), [&](std::size_t a, std::size_t b) {
      return ix.records[a].item < ix.records[b].item;
    });
  }
  for (auto& [item, list] : ix.by_item) {
    std::stable_sort(list.begin(), list.end(), [&](std::size_t a, std::size_t b) {
      return ix.records[a].user < ix.records[b].user;
    });
  }
}

void DocumentStore::build_auxiliary(Domain domain, std::uint64_t seed) {
  DomainIndex& ix = domains_[static_cast<int>(domain)];
  for (const auto& [user, own] : ix.by_user) {
    Rng rng(auxiliary_stream_seed(seed, user, domain));
    std::vector<std::uint32_t> tokens;
    for (auto r : own) {
      const Record& mine = ix.records[r];
      // Candidates in record order, as in the reference builder.
      std::vector<std::size_t> candidates;
      for (auto c : ix.by_item.at(mine.item)) {
        const Record& other = ix.records[c];
        if (other.rating == mine.rating && other.user != user && !overlap_.contains(other.user)) {
          candidates.push_back(c);
        }
      }
      if (candidates.empty()) continue;
      std::sort(candidates.begin(), candidates.end());
      append(tokens, ix.records[candidates[uniform_index(rng, candidates.size())]].tokens);
    }
    ix.auxiliary.emplace(user, make_document(tokens, length_, user, DocumentKind::user_aux, domain));
  }
}

bool DocumentStore::has_user(Domain domain, std::string_view user) const {
  return index(domain).by_user.contains(user);
}

bool DocumentStore::has_item(Domain domain, std::string_view item) const {
  return index(domain).by_item.contains(item);
}

Document DocumentStore::user_document(std::string_view user, Domain domain,
                                      std::optional<std::string_view> exclude_item) const {
  const DomainIndex& ix = index(domain);
  auto it = ix.by_user.find(user);
  if (it == ix.by_user.end()) {
    throw DataError("unknown user '" + std::string(user) + "' in " +
                    std::string(domain_name(domain)) + " domain");
  }
  std::vector<std::uint32_t> tokens;
  for (auto r : it->second) {
    if (exclude_item && ix.records[r].item == *exclude_item) continue;
    append(tokens, ix.records[r].tokens);
    if (tokens.size() >= length_) break;
  }
  return make_document(tokens, length_, std::string(user), DocumentKind::user, domain);
}

Document DocumentStore::item_document(std::string_view item, Domain domain,
                                      std::optional<std::string_view> exclude_user) const {
  const DomainIndex& ix = index(domain);
  auto it = ix.by_item.find(item);
  if (it == ix.by_item.end()) {
    throw DataError("unknown item '" + std::string(item) + "' in " +
                    std::string(domain_name(domain)) + " domain");
  }
  std::vector<std::uint32_t> tokens;
  for (auto r : it->second) {
    if (exclude_user && ix.records[r].user == *exclude_user) continue;
    append(tokens, ix.records[r].tokens);
    if (tokens.size() >= length_) break;
  }
  return make_document(tokens, length_, std::string(item), DocumentKind::item, domain);
}

const Document& DocumentStore::auxiliary_document(std::string_view user, Domain domain) const {
  const DomainIndex& ix = index(domain);
  auto it = ix.auxiliary.find(user);
  if (it == ix.auxiliary.end()) {
    throw DataError("unknown user '" + std::string(user) + "' in " +
                    std::string(domain_name(domain)) + " domain");
  }
  return it->second;
}

std::vector<std::string> DocumentStore::users(Domain domain) const {
  std::vector<std::string> out;
  for (const auto& [u, _] : index(domain).by_user) out.push_back(u);
  return out;
}

std::vector<std::string> DocumentStore::items(Domain domain) const {
  std::vector<std::string> out;
  for (const auto& [i, _] : index(domain).by_item) out.push_back(i);
  return out;
}

}  // namespace catn
