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

#include "catn/checkpoint.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "catn/error.hpp"
#include "catn/endian.hpp"

namespace catn::ad {

namespace {

constexpr std::array<char, 4> kMagic{'C', 'A', 'T', 'N'};
constexpr std::uint64_t kMaxRank = 8;

}  // namespace

void write_checkpoint(std::ostream& out, std::span<const NamedTensor> tensors) {
  out.write(kMagic.data(), kMagic.size());
  io::put_u32(out, kCheckpointVersion);
  for (const auto& [name, tensor] : tensors) {
    io::put_u64(out, name.size());
    out.write(name.data(), static_cast<std::streamsize>(name.size()));
    io::put_u64(out, tensor.rank());
    for (auto d : tensor.shape()) io::put_u64(out, d);
    for (double v : tensor.values()) io::put_f64(out, v);
  }
  if (!out) throw DataError("checkpoint: write failed");
}

std::vector<NamedTensor> read_checkpoint(std::istream& in) {
  std::array<char, 4> magic{};
  in.read(magic.data(), magic.size());
  if (!in || magic != kMagic) throw DataError("checkpoint: bad magic bytes");
  const std::uint32_t version = io::get_u32(in);
  if (version != kCheckpointVersion) {
    throw DataError("checkpoint: unsupported format version " + std::to_string(version));
  }
  std::vector<NamedTensor> tensors;
  while (in.peek() != std::char_traits<char>::eof()) {
    NamedTensor entry;
    const std::uint64_t name_len = io::get_u64(in);
    if (name_len > (1u << 20)) throw DataError("checkpoint: corrupt name length");
    entry.name.resize(name_len);
    in.read(entry.name.data(), static_cast<std::streamsize>(name_len));
    const std::uint64_t rank = io::get_u64(in);
    if (rank == 0 || rank > kMaxRank) {
      throw DataError("checkpoint: bad rank for '" + entry.name + "'");
    }
    Shape shape(rank);
    for (auto& d : shape) d = io::get_u64(in);
    std::vector<double> values(num_elements(shape));
    for (double& v : values) v = io::get_f64(in);
    if (!in) throw DataError("checkpoint: truncated entry '" + entry.name + "'");
    entry.tensor = Tensor(std::move(shape), std::move(values));
    tensors.push_back(std::move(entry));
  }
  return tensors;
}

std::string checkpoint_bytes(std::span<const NamedTensor> tensors) {
  std::ostringstream out(std::ios::binary);
  write_checkpoint(out, tensors);
  return out.str();
}

std::vector<NamedTensor> parse_checkpoint(const std::string& bytes) {
  std::istringstream in(bytes, std::ios::binary);
  return read_checkpoint(in);
}

void save_checkpoint(const std::filesystem::path& path,
                     std::span<const NamedTensor> tensors) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot open " + path.string() + " for writing");
  write_checkpoint(out, tensors);
}

std::vector<NamedTensor> load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open checkpoint " + path.string());
  return read_checkpoint(in);
}

}  // namespace catn::ad
