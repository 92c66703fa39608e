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
#include <string>
#include <vector>

#include "catn/model.hpp"

namespace catn {

struct GradcheckOptions {
  Variant variant = Variant::full;
  std::uint64_t seed = 7;
  double step = 1e-5;  // central difference half-width
  double l2 = 1e-2;
  // Relative error is |a - n| / max(|a|, |n|, floor).
  double floor = 1e-7;
};

struct TensorGradError {
  std::string name;
  std::size_t checked = 0;
  double max_rel_error = 0.0;
  double max_abs_error = 0.0;
};

struct GradcheckReport {
  std::vector<TensorGradError> tensors;
  double max_rel_error = 0.0;
  std::size_t checked = 0;
  double seconds = 0.0;
};

// Compares analytic gradients of the two-flow loss (both flows' MSE plus
// their L2 terms) with central differences on a tiny random model:
// l=8, d=4, n=3, k=2, M=2 and 20 words. The PAD embedding row is constant
// and skipped.
GradcheckReport run_gradcheck(const GradcheckOptions& options = {});

}  // namespace catn
