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
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "catn/text.hpp"
#include "catn/vocabulary.hpp"

namespace catn {

enum class DocumentKind : std::uint8_t { user = 0, item = 1, user_aux = 2 };

std::string_view kind_name(DocumentKind kind);

// Fixed-length token sequence. Real tokens are left-aligned, the mask is 1
// exactly on them and the PAD id 0 fills the rest.
struct Document {
  std::vector<std::uint32_t> token_ids;
  std::vector<std::uint8_t> mask;
  std::string owner;
  DocumentKind kind = DocumentKind::user;
  Domain domain = Domain::source;

  std::size_t length() const noexcept { return token_ids.size(); }
  std::size_t valid_count() const noexcept;
  bool all_padding() const noexcept { return valid_count() == 0; }

  friend bool operator==(const Document&, const Document&) = default;
};

// Truncates or pads a token stream to `length`.
Document make_document(std::span<const std::uint32_t> tokens, std::size_t length,
                       std::string owner, DocumentKind kind, Domain domain);

using UserSet = std::unordered_set<std::string>;

// Reference builders over a flat record list. Reviews are concatenated in
// ascending (item id, record order) for users and (user id, record order)
// for items; records of the other domain are ignored.
Document build_user_document(std::string_view user, Domain domain,
                             std::span<const Interaction> interactions,
                             const Vocabulary& vocab, const CorpusConfig& cfg);
Document build_item_document(std::string_view item, Domain domain,
                             std::span<const Interaction> interactions,
                             const Vocabulary& vocab, const CorpusConfig& cfg);

// For every rating the user gave in `domain`, picks one review of the same
// item with the same rating written by a user outside `overlap_users` (and
// not the user), uniformly at random; merged in user-document order.
Document build_auxiliary_document(std::string_view user, Domain domain,
                                  std::span<const Interaction> interactions,
                                  const UserSet& overlap_users, const Vocabulary& vocab,
                                  const CorpusConfig& cfg, std::uint64_t seed);

// Generator used for the auxiliary choice of one user; exposed so tests can
// replay the selection independently.
std::uint64_t auxiliary_stream_seed(std::uint64_t seed, std::string_view user, Domain domain);

// Documents file: u64 count, u64 length, then per document u64 owner length,
// owner bytes, u8 kind, u8 domain, length x u32 token ids, length x u8 mask.
void write_documents(std::ostream& out, std::span<const Document> docs);
std::vector<Document> read_documents(std::istream& in);
void save_documents(const std::filesystem::path& path, std::span<const Document> docs);
std::vector<Document> load_documents(const std::filesystem::path& path);

// Indexed builder over the records visible to the model. Callers drop hidden
// records (held-out ratings) before constructing it. Per-pair documents can
// exclude the review of the pair itself.
class DocumentStore {
 public:
  DocumentStore(std::span<const Interaction> source, std::span<const Interaction> target,
                const Vocabulary& vocab, const CorpusConfig& cfg, UserSet overlap_users,
                std::uint64_t seed);

  bool has_user(Domain domain, std::string_view user) const;
  bool has_item(Domain domain, std::string_view item) const;

  // exclude_item / exclude_user drop that single counterpart's reviews.
  Document user_document(std::string_view user, Domain domain,
                         std::optional<std::string_view> exclude_item = std::nullopt) const;
  Document item_document(std::string_view item, Domain domain,
                         std::optional<std::string_view> exclude_user = std::nullopt) const;
  // Auxiliary documents are built once at construction for every user.
  const Document& auxiliary_document(std::string_view user, Domain domain) const;

  std::vector<std::string> users(Domain domain) const;
  std::vector<std::string> items(Domain domain) const;
  std::size_t doc_length() const noexcept { return length_; }

 private:
  struct Record {
    std::string user;
    std::string item;
    double rating;
    std::vector<std::uint32_t> tokens;
  };
  struct DomainIndex {
    std::vector<Record> records;
    // Record indices already in document order.
    std::map<std::string, std::vector<std::size_t>, std::less<>> by_user;
    std::map<std::string, std::vector<std::size_t>, std::less<>> by_item;
    std::map<std::string, Document, std::less<>> auxiliary;
  };

  void index_domain(Domain domain, std::span<const Interaction> records, const Vocabulary& vocab);
  void build_auxiliary(Domain domain, std::uint64_t seed);
  const DomainIndex& index(Domain d) const { return domains_[static_cast<int>(d)]; }

  std::size_t length_;
  UserSet overlap_;
  DomainIndex domains_[2];
};

}  // namespace catn
