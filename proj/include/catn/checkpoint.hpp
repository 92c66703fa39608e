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
#include <vector>

#include "catn/tensor.hpp"

namespace catn::ad {

struct NamedTensor {
  std::string name;
  Tensor tensor;
};

inline constexpr std::uint32_t kCheckpointVersion = 1;

// Layout: "CATN", u32 version, then per tensor until EOF:
//   u64 name length, name bytes (UTF-8), u64 rank, rank x u64 dims,
//   raw f64 values. All integers and doubles little-endian.
void write_checkpoint(std::ostream& out, std::span<const NamedTensor> tensors);
std::vector<NamedTensor> read_checkpoint(std::istream& in);

std::string checkpoint_bytes(std::span<const NamedTensor> tensors);
std::vector<NamedTensor> parse_checkpoint(const std::string& bytes);

void save_checkpoint(const std::filesystem::path& path,
                     std::span<const NamedTensor> tensors);
std::vector<NamedTensor> load_checkpoint(const std::filesystem::path& path);

}  // namespace catn::ad
