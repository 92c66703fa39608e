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

#include "catn/optimizer.hpp"

#include <cmath>

#include "catn/error.hpp"

namespace catn {

void AdamOptions::validate() const {
  if (!(learning_rate > 0.0)) throw ConfigError("learning_rate must be positive");
  if (!(beta1 >= 0.0 && beta1 < 1.0)) throw ConfigError("adam beta1 must be in [0, 1)");
  if (!(beta2 >= 0.0 && beta2 < 1.0)) throw ConfigError("adam beta2 must be in [0, 1)");
  if (!(epsilon > 0.0)) throw ConfigError("adam epsilon must be positive");
}

Adam::Adam(AdamOptions options) : options_(options) { options_.validate(); }

void Adam::step(const std::string& key, ad::Tensor& param, std::span<const double> grad) {
  if (grad.size() != param.size()) {
    throw ShapeError("adam: gradient for '" + key + "' has " + std::to_string(grad.size()) +
                     " entries, parameter has " + std::to_string(param.size()));
  }
  AdamSlot& s = slots_[key];
  if (s.m.empty()) {
    s.m.assign(param.size(), 0.0);
    s.v.assign(param.size(), 0.0);
  } else if (s.m.size() != param.size()) {
    throw ShapeError("adam: parameter '" + key + "' changed size");
  }
  ++s.t;
  const double b1 = options_.beta1, b2 = options_.beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(s.t));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(s.t));
  auto values = param.values();
  for (std::size_t j = 0; j < values.size(); ++j) {
    const double g = grad[j];
    s.m[j] = b1 * s.m[j] + (1.0 - b1) * g;
    s.v[j] = b2 * s.v[j] + (1.0 - b2) * g * g;
    if (g == 0.0) continue;
    const double m_hat = s.m[j] / c1;
    const double v_hat = s.v[j] / c2;
    values[j] -= options_.learning_rate * m_hat / (std::sqrt(v_hat) + options_.epsilon);
  }
}

const AdamSlot* Adam::slot(const std::string& key) const {
  auto it = slots_.find(key);
  return it == slots_.end() ? nullptr : &it->second;
}

}  // namespace catn
