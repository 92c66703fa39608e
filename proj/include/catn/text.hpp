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
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace catn {

enum class Domain : std::uint8_t { source = 0, target = 1 };

std::string_view domain_name(Domain d);
Domain parse_domain(std::string_view name);
inline Domain other_domain(Domain d) {
  return d == Domain::source ? Domain::target : Domain::source;
}

struct Interaction {
  std::string user_id;
  std::string item_id;
  double rating = 0.0;
  std::string review_text;
  Domain domain = Domain::source;
};

// Lower-cases ASCII and splits on every byte that is neither an ASCII
// letter/digit nor part of a multi-byte UTF-8 sequence.
std::vector<std::string> tokenize(std::string_view text);

// One JSON object per line with keys user_id, item_id, rating, review_text.
// Blank lines are skipped. Errors carry the 1-based line number.
std::vector<Interaction> read_interactions(std::istream& in, Domain domain,
                                           std::string_view source_name = "<stream>");
std::vector<Interaction> read_interactions(const std::filesystem::path& path,
                                           Domain domain);
void write_interactions(std::ostream& out, std::span<const Interaction> records);
void write_interactions(const std::filesystem::path& path,
                        std::span<const Interaction> records);

// Drops records without review text, then repeatedly removes users with
// fewer than min_user and items with fewer than min_item records until both
// thresholds hold. Record order is preserved.
std::vector<Interaction> filter_interactions(std::span<const Interaction> raw,
                                             std::size_t min_user,
                                             std::size_t min_item);

}  // namespace catn
