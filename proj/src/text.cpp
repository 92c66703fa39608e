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

#include "catn/text.hpp"

#include <fstream>
#include <iostream>
#include <unordered_map>

#include <json.hpp>

#include "catn/error.hpp"

namespace catn {

std::string_view domain_name(Domain d) {
  return d == Domain::source ? "source" : "target";
}

Domain parse_domain(std::string_view name) {
  if (name == "source") return Domain::source;
  if (name == "target") return Domain::target;
  throw ConfigError("unknown domain '" + std::string(name) + "'");
}

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  for (char ch : text) {
    const auto c = static_cast<unsigned char>(ch);
    const bool word = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
                      (c >= '0' && c <= '9') || c >= 0x80;
    if (word) {
      current.push_back(c >= 'A' && c <= 'Z' ? static_cast<char>(c - 'A' + 'a') : ch);
    } else if (!current.empty()) {
      tokens.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

std::vector<Interaction> read_interactions(std::istream& in, Domain domain,
                                           std::string_view source_name) {
  std::vector<Interaction> records;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    auto fail = [&](const std::string& why) -> DataError {
      return DataError(std::string(source_name) + ":" + std::to_string(line_no) + ": " + why);
    };
    nlohmann::json obj;
    try {
      obj = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw fail(std::string("invalid JSON (") + e.what() + ")");
    }
    if (!obj.is_object()) throw fail("expected a JSON object");
    Interaction rec;
    rec.domain = domain;
    try {
      const auto& uid = obj.at("user_id");
      const auto& iid = obj.at("item_id");
      rec.user_id = uid.is_string() ? uid.get<std::string>() : uid.dump();
      rec.item_id = iid.is_string() ? iid.get<std::string>() : iid.dump();
      rec.rating = obj.at("rating").get<double>();
      const auto& text = obj.at("review_text");
      rec.review_text = text.is_null() ? std::string() : text.get<std::string>();
    } catch (const nlohmann::json::exception& e) {
      throw fail(std::string("bad record (") + e.what() + ")");
    }
    if (rec.rating < 1.0 || rec.rating > 5.0) {
      throw fail("rating " + std::to_string(rec.rating) + " outside [1, 5]");
    }
    records.push_back(std::move(rec));
  }
  return records;
}

std::vector<Interaction> read_interactions(const std::filesystem::path& path,
                                           Domain domain) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open interactions file " + path.string());
  return read_interactions(in, domain, path.string());
}

void write_interactions(std::ostream& out, std::span<const Interaction> records) {
  for (const auto& r : records) {
    nlohmann::ordered_json obj;
    obj["user_id"] = r.user_id;
    obj["item_id"] = r.item_id;
    obj["rating"] = r.rating;
    obj["review_text"] = r.review_text;
    out << obj.dump() << '\n';
  }
}

void write_interactions(const std::filesystem::path& path,
                        std::span<const Interaction> records) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError("cannot open " + path.string() + " for writing");
  write_interactions(out, records);
}

std::vector<Interaction> filter_interactions(std::span<const Interaction> raw,
                                             std::size_t min_user,
                                             std::size_t min_item) {
  std::vector<Interaction> kept;
  for (const auto& r : raw) {
    if (r.review_text.find_first_not_of(" \t\r\n") != std::string::npos) kept.push_back(r);
  }
  for (;;) {
    std::unordered_map<std::string, std::size_t> per_user, per_item;
    for (const auto& r : kept) {
      ++per_user[r.user_id];
      ++per_item[r.item_id];
    }
    std::vector<Interaction> next;
    next.reserve(kept.size());
    for (auto& r : kept) {
      if (per_user[r.user_id] >= min_user && per_item[r.item_id] >= min_item) {
        next.push_back(std::move(r));
      }
    }
    const bool stable = next.size() == kept.size();
    kept = std::move(next);
    if (stable) break;
  }
  if (kept.empty() && !raw.empty()) {
    std::cerr << "warning: interaction filters removed every record\n";
  }
  return kept;
}

}  // namespace catn
