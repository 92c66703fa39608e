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
#include <map>
#include <span>
#include <string>
#include <vector>

#include "catn/tensor.hpp"

namespace catn {

struct AdamOptions {
  double learning_rate = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  void validate() const;
};

struct AdamSlot {
  std::vector<double> m;
  std::vector<double> v;
  std::uint64_t t = 0;
};

// Adam with bias correction, one slot per named parameter. Elements whose
// gradient is exactly zero keep their value; their moments still decay.
class Adam {
 public:
  explicit Adam(AdamOptions options);

  void step(const std::string& key, ad::Tensor& param, std::span<const double> grad);

  const AdamOptions& options() const noexcept { return options_; }
  const AdamSlot* slot(const std::string& key) const;

 private:
  AdamOptions options_;
  std::map<std::string, AdamSlot> slots_;
};

}  // namespace catn
