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

#include "catn/graph.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>
#include <utility>

#include "catn/error.hpp"

namespace catn::ad {

namespace {

constexpr std::array<std::pair<OpTag, std::string_view>, 19> kOpNames{{
    {OpTag::leaf, "leaf"},
    {OpTag::constant, "constant"},
    {OpTag::matmul, "matmul"},
    {OpTag::conv1d_same, "conv1d_same"},
    {OpTag::embedding_lookup, "embedding_lookup"},
    {OpTag::relu, "relu"},
    {OpTag::sigmoid, "sigmoid"},
    {OpTag::tanh, "tanh"},
    {OpTag::leaky_relu, "leaky_relu"},
    {OpTag::elementwise_mul, "elementwise_mul"},
    {OpTag::elementwise_sub, "elementwise_sub"},
    {OpTag::add, "add"},
    {OpTag::concat, "concat"},
    {OpTag::masked_softmax, "masked_softmax"},
    {OpTag::weighted_sum, "weighted_sum"},
    {OpTag::mean_all, "mean_all"},
    {OpTag::scalar_add, "scalar_add"},
    {OpTag::select_row, "select_row"},
    {OpTag::transpose, "transpose"},
}};

double stable_sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

[[noreturn]] void shape_error(OpTag op, const Shape& a, const Shape& b,
                              std::string_view what = "incompatible shapes") {
  throw ShapeError(std::string(op_name(op)) + ": " + std::string(what) + " " +
                   shape_string(a) + " and " + shape_string(b));
}

void require_rank2(OpTag op, const Tensor& t) {
  if (t.rank() != 2) {
    throw ShapeError(std::string(op_name(op)) + ": expected a matrix, got " +
                     shape_string(t.shape()));
  }
}

}  // namespace

std::string_view op_name(OpTag op) {
  for (const auto& [tag, name] : kOpNames) {
    if (tag == op) return name;
  }
  return "unknown";
}

OpTag parse_op(std::string_view name) {
  for (const auto& [tag, op] : kOpNames) {
    if (op == name && tag != OpTag::leaf && tag != OpTag::constant) return tag;
  }
  throw Error("unknown op '" + std::string(name) + "'");
}

const Graph::Node& Graph::node(Var v) const {
  if (v.id >= nodes_.size()) {
    throw Error("variable " + std::to_string(v.id) + " is not on this graph");
  }
  return nodes_[v.id];
}

Var Graph::push(Node n) {
  nodes_.push_back(std::move(n));
  return Var{static_cast<std::uint32_t>(nodes_.size() - 1)};
}

Graph::Node Graph::make(OpTag op, std::initializer_list<Var> inputs) const {
  Node n;
  n.op = op;
  n.inputs.assign(inputs.begin(), inputs.end());
  for (Var v : n.inputs) n.requires_grad = n.requires_grad || node(v).requires_grad;
  return n;
}

Var Graph::constant(Tensor value) {
  Node n;
  n.op = OpTag::constant;
  n.owned = std::move(value);
  return push(std::move(n));
}

Var Graph::parameter(Tensor& param) {
  Node n;
  n.op = OpTag::leaf;
  n.param = &param;
  n.requires_grad = grad_enabled_ && param.requires_grad();
  return push(std::move(n));
}

const Tensor& Graph::value(Var v) const { return node(v).value(); }
bool Graph::requires_grad(Var v) const { return node(v).requires_grad; }
OpTag Graph::op(Var v) const { return node(v).op; }
std::span<const Var> Graph::inputs(Var v) const { return node(v).inputs; }
std::span<const double> Graph::grad(Var v) const { return node(v).grad; }

Var Graph::matmul(Var a, Var b, bool transpose_a, bool transpose_b) {
  const Tensor& x = value(a);
  const Tensor& y = value(b);
  require_rank2(OpTag::matmul, x);
  require_rank2(OpTag::matmul, y);
  const std::size_t m = transpose_a ? x.dim(1) : x.dim(0);
  const std::size_t k = transpose_a ? x.dim(0) : x.dim(1);
  const std::size_t k2 = transpose_b ? y.dim(1) : y.dim(0);
  const std::size_t n = transpose_b ? y.dim(0) : y.dim(1);
  if (k != k2) shape_error(OpTag::matmul, x.shape(), y.shape());

  Tensor out({m, n});
  const auto xv = x.values();
  const auto yv = y.values();
  auto ov = out.values();
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      double acc = 0.0;
      for (std::size_t p = 0; p < k; ++p) {
        const double xa = transpose_a ? xv[p * m + i] : xv[i * k + p];
        const double yb = transpose_b ? yv[j * k + p] : yv[p * n + j];
        acc += xa * yb;
      }
      ov[i * n + j] = acc;
    }
  }
  Node nd = make(OpTag::matmul, {a, b});
  nd.flag_a = transpose_a;
  nd.flag_b = transpose_b;
  nd.owned = std::move(out);
  return push(std::move(nd));
}

Var Graph::conv1d_same(Var input, Var weights, Var bias) {
  const Tensor& x = value(input);
  const Tensor& w = value(weights);
  const Tensor& b = value(bias);
  require_rank2(OpTag::conv1d_same, x);
  if (w.rank() != 3) {
    throw ShapeError("conv1d_same: weights must be n x s x d_in, got " +
                     shape_string(w.shape()));
  }
  const std::size_t len = x.dim(0), din = x.dim(1);
  const std::size_t filters = w.dim(0), window = w.dim(1);
  if (window % 2 == 0) {
    throw ShapeError("conv1d_same: window size must be odd, got " +
                     std::to_string(window));
  }
  if (w.dim(2) != din) shape_error(OpTag::conv1d_same, x.shape(), w.shape());
  if (b.size() != filters) shape_error(OpTag::conv1d_same, w.shape(), b.shape());

  const std::ptrdiff_t half = static_cast<std::ptrdiff_t>(window / 2);
  Tensor out({len, filters});
  const auto xv = x.values();
  const auto wv = w.values();
  auto ov = out.values();
  for (std::size_t h = 0; h < len; ++h) {
    for (std::size_t f = 0; f < filters; ++f) {
      double acc = b[f];
      for (std::size_t t = 0; t < window; ++t) {
        const std::ptrdiff_t pos = static_cast<std::ptrdiff_t>(h + t) - half;
        if (pos < 0 || pos >= static_cast<std::ptrdiff_t>(len)) continue;
        const double* wrow = &wv[(f * window + t) * din];
        const double* xrow = &xv[static_cast<std::size_t>(pos) * din];
        for (std::size_t c = 0; c < din; ++c) acc += wrow[c] * xrow[c];
      }
      ov[h * filters + f] = acc;
    }
  }
  Node nd = make(OpTag::conv1d_same, {input, weights, bias});
  nd.owned = std::move(out);
  return push(std::move(nd));
}

Var Graph::embedding_lookup(Var table, std::vector<std::uint32_t> ids,
                            std::uint32_t padding_id) {
  const Tensor& t = value(table);
  require_rank2(OpTag::embedding_lookup, t);
  if (ids.empty()) throw ShapeError("embedding_lookup: empty id list");
  const std::size_t vocab = t.dim(0), width = t.dim(1);
  Tensor out({ids.size(), width});
  for (std::size_t r = 0; r < ids.size(); ++r) {
    if (ids[r] >= vocab) {
      throw ShapeError("embedding_lookup: id " + std::to_string(ids[r]) +
                       " out of range for table " + shape_string(t.shape()));
    }
    std::copy_n(&t.values()[ids[r] * width], width, &out.values()[r * width]);
  }
  Node nd = make(OpTag::embedding_lookup, {table});
  nd.ids = std::move(ids);
  nd.index = padding_id;
  nd.owned = std::move(out);
  return push(std::move(nd));
}

namespace {

template <typename F>
Tensor map_values(const Tensor& x, F f) {
  Tensor out(x.shape());
  auto ov = out.values();
  const auto xv = x.values();
  for (std::size_t i = 0; i < xv.size(); ++i) ov[i] = f(xv[i]);
  return out;
}

}  // namespace

Var Graph::relu(Var x) {
  Node nd = make(OpTag::relu, {x});
  nd.owned = map_values(value(x), [](double v) { return v > 0.0 ? v : 0.0; });
  return push(std::move(nd));
}

Var Graph::sigmoid(Var x) {
  Node nd = make(OpTag::sigmoid, {x});
  nd.owned = map_values(value(x), stable_sigmoid);
  return push(std::move(nd));
}

Var Graph::tanh(Var x) {
  Node nd = make(OpTag::tanh, {x});
  nd.owned = map_values(value(x), [](double v) { return std::tanh(v); });
  return push(std::move(nd));
}

Var Graph::leaky_relu(Var x, double alpha) {
  if (!(alpha > 0.0)) {
    throw Error("leaky_relu: slope must be positive, got " + std::to_string(alpha));
  }
  Node nd = make(OpTag::leaky_relu, {x});
  nd.scalar = alpha;
  nd.owned = map_values(value(x), [alpha](double v) { return v > 0.0 ? v : alpha * v; });
  return push(std::move(nd));
}

Var Graph::mul(Var a, Var b) {
  const Tensor& x = value(a);
  const Tensor& y = value(b);
  if (x.shape() != y.shape()) shape_error(OpTag::elementwise_mul, x.shape(), y.shape());
  Tensor out(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] * y[i];
  Node nd = make(OpTag::elementwise_mul, {a, b});
  nd.owned = std::move(out);
  return push(std::move(nd));
}

Var Graph::sub(Var a, Var b) {
  const Tensor& x = value(a);
  const Tensor& y = value(b);
  if (x.shape() != y.shape()) shape_error(OpTag::elementwise_sub, x.shape(), y.shape());
  Tensor out(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] - y[i];
  Node nd = make(OpTag::elementwise_sub, {a, b});
  nd.owned = std::move(out);
  return push(std::move(nd));
}

Var Graph::add(Var a, Var b) {
  const Tensor& x = value(a);
  const Tensor& y = value(b);
  Tensor out(x.shape());
  bool broadcast = false;
  if (x.size() == y.size()) {
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] + y[i];
  } else if (x.rank() == 2 && y.size() == x.dim(1) &&
             (y.rank() == 1 || (y.rank() == 2 && y.dim(0) == 1))) {
    broadcast = true;
    const std::size_t c = x.dim(1);
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] + y[i % c];
  } else {
    shape_error(OpTag::add, x.shape(), y.shape());
  }
  Node nd = make(OpTag::add, {a, b});
  nd.flag_a = broadcast;
  nd.owned = std::move(out);
  return push(std::move(nd));
}

Var Graph::concat(std::span<const Var> parts, std::size_t axis) {
  if (parts.empty()) throw ShapeError("concat: no inputs");
  if (axis > 1) throw ShapeError("concat: axis must be 0 or 1");
  const Tensor& first = value(parts[0]);
  Shape shape = first.shape();
  if (axis == 1) require_rank2(OpTag::concat, first);
  for (std::size_t p = 1; p < parts.size(); ++p) {
    const Tensor& t = value(parts[p]);
    if (axis == 0) {
      if (t.rank() != first.rank() || t.cols() != first.cols()) {
        shape_error(OpTag::concat, first.shape(), t.shape());
      }
      shape[0] += t.dim(0);
    } else {
      if (t.rank() != 2 || t.dim(0) != first.dim(0)) {
        shape_error(OpTag::concat, first.shape(), t.shape());
      }
      shape[1] += t.dim(1);
    }
  }
  Tensor out(shape);
  if (axis == 0) {
    std::size_t offset = 0;
    for (Var v : parts) {
      const auto src = value(v).values();
      std::copy(src.begin(), src.end(), out.values().begin() + static_cast<std::ptrdiff_t>(offset));
      offset += src.size();
    }
  } else {
    const std::size_t rows = shape[0], width = shape[1];
    std::size_t col = 0;
    for (Var v : parts) {
      const Tensor& t = value(v);
      for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < t.dim(1); ++c) out[r * width + col + c] = t.at(r, c);
      }
      col += t.dim(1);
    }
  }
  Node nd;
  nd.op = OpTag::concat;
  nd.inputs.assign(parts.begin(), parts.end());
  for (Var v : parts) nd.requires_grad = nd.requires_grad || node(v).requires_grad;
  nd.index = axis;
  nd.owned = std::move(out);
  return push(std::move(nd));
}

Var Graph::masked_softmax(Var logits, std::vector<std::uint8_t> mask) {
  const Tensor& x = value(logits);
  if (mask.size() != x.size()) {
    shape_error(OpTag::masked_softmax, x.shape(), Shape{mask.size()}, "mask does not match");
  }
  Tensor out(x.shape());
  double hi = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (mask[i]) hi = std::max(hi, x[i]);
  }
  if (std::isfinite(hi)) {
    double total = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      if (mask[i]) {
        out[i] = std::exp(x[i] - hi);
        total += out[i];
      }
    }
    for (std::size_t i = 0; i < x.size(); ++i) out[i] /= total;
  }
  Node nd = make(OpTag::masked_softmax, {logits});
  nd.mask = std::move(mask);
  nd.owned = std::move(out);
  return push(std::move(nd));
}

Var Graph::weighted_sum(Var weights, Var values) {
  const Tensor& w = value(weights);
  const Tensor& v = value(values);
  require_rank2(OpTag::weighted_sum, v);
  if (w.size() != v.dim(0)) shape_error(OpTag::weighted_sum, w.shape(), v.shape());
  const std::size_t width = v.dim(1);
  Tensor out({1, width});
  for (std::size_t j = 0; j < w.size(); ++j) {
    for (std::size_t c = 0; c < width; ++c) out[c] += w[j] * v.at(j, c);
  }
  Node nd = make(OpTag::weighted_sum, {weights, values});
  nd.owned = std::move(out);
  return push(std::move(nd));
}

Var Graph::mean_all(Var x) {
  const Tensor& t = value(x);
  double total = 0.0;
  for (double v : t.values()) total += v;
  Node nd = make(OpTag::mean_all, {x});
  nd.owned = Tensor::scalar(total / static_cast<double>(t.size()));
  return push(std::move(nd));
}

Var Graph::scalar_add(Var x, double c) {
  Node nd = make(OpTag::scalar_add, {x});
  nd.scalar = c;
  nd.owned = map_values(value(x), [c](double v) { return v + c; });
  return push(std::move(nd));
}

Var Graph::select_row(Var x, std::size_t row) {
  const Tensor& t = value(x);
  require_rank2(OpTag::select_row, t);
  if (row >= t.dim(0)) {
    throw ShapeError("select_row: row " + std::to_string(row) + " out of range for " +
                     shape_string(t.shape()));
  }
  const std::size_t width = t.dim(1);
  Tensor out({1, width});
  std::copy_n(&t.values()[row * width], width, out.values().begin());
  Node nd = make(OpTag::select_row, {x});
  nd.index = row;
  nd.owned = std::move(out);
  return push(std::move(nd));
}

Var Graph::transpose(Var x) {
  const Tensor& t = value(x);
  require_rank2(OpTag::transpose, t);
  const std::size_t r = t.dim(0), c = t.dim(1);
  Tensor out({c, r});
  for (std::size_t i = 0; i < r; ++i) {
    for (std::size_t j = 0; j < c; ++j) out[j * r + i] = t[i * c + j];
  }
  Node nd = make(OpTag::transpose, {x});
  nd.owned = std::move(out);
  return push(std::move(nd));
}

Var Graph::apply(OpTag op, std::span<const Var> in, const OpAttributes& attrs) {
  auto arity = [&](std::size_t n) {
    if (in.size() != n) {
      throw Error(std::string(op_name(op)) + ": expected " + std::to_string(n) +
                  " inputs, got " + std::to_string(in.size()));
    }
  };
  switch (op) {
    case OpTag::matmul: arity(2); return matmul(in[0], in[1], attrs.transpose_a, attrs.transpose_b);
    case OpTag::conv1d_same: arity(3); return conv1d_same(in[0], in[1], in[2]);
    case OpTag::embedding_lookup: arity(1); return embedding_lookup(in[0], attrs.ids);
    case OpTag::relu: arity(1); return relu(in[0]);
    case OpTag::sigmoid: arity(1); return sigmoid(in[0]);
    case OpTag::tanh: arity(1); return tanh(in[0]);
    case OpTag::leaky_relu: arity(1); return leaky_relu(in[0], attrs.scalar);
    case OpTag::elementwise_mul: arity(2); return mul(in[0], in[1]);
    case OpTag::elementwise_sub: arity(2); return sub(in[0], in[1]);
    case OpTag::add: arity(2); return add(in[0], in[1]);
    case OpTag::concat: return concat(in, attrs.index);
    case OpTag::masked_softmax: arity(1); return masked_softmax(in[0], attrs.mask);
    case OpTag::weighted_sum: arity(2); return weighted_sum(in[0], in[1]);
    case OpTag::mean_all: arity(1); return mean_all(in[0]);
    case OpTag::scalar_add: arity(1); return scalar_add(in[0], attrs.scalar);
    case OpTag::select_row: arity(1); return select_row(in[0], attrs.index);
    case OpTag::transpose: arity(1); return transpose(in[0]);
    case OpTag::leaf:
    case OpTag::constant:
      break;
  }
  throw Error("unknown op '" + std::string(op_name(op)) + "'");
}

std::vector<double>& Graph::grad_slot(Var v) {
  Node& n = nodes_[v.id];
  if (n.grad.empty()) n.grad.assign(n.value().size(), 0.0);
  return n.grad;
}

void Graph::backward(Var loss, double seed) {
  const Node& root = node(loss);
  if (root.value().size() != 1) {
    throw Error("backward: loss must be a scalar, got shape " +
                shape_string(root.value().shape()));
  }
  for (Node& n : nodes_) n.grad.clear();
  if (!root.requires_grad) return;
  grad_slot(loss)[0] = seed;
  for (std::size_t i = loss.id + 1; i-- > 0;) {
    if (nodes_[i].requires_grad && !nodes_[i].grad.empty()) backward_node(i);
  }
}

void Graph::backward_node(std::size_t index) {
  // dy aliases this node's slot; inputs always own distinct slots.
  Node& self = nodes_[index];
  const std::span<const double> dy = self.grad;
  const Tensor& y = self.value();
  auto wants = [&](std::size_t slot) { return nodes_[self.inputs[slot].id].requires_grad; };
  auto in_value = [&](std::size_t slot) -> const Tensor& {
    return nodes_[self.inputs[slot].id].value();
  };

  switch (self.op) {
    case OpTag::leaf: {
      if (self.param != nullptr) {
        Tensor& p = *self.param;
        if (!p.has_grad()) p.zero_grad();
        auto g = p.grad();
        for (std::size_t i = 0; i < g.size(); ++i) g[i] += dy[i];
      }
      break;
    }
    case OpTag::constant:
      break;
    case OpTag::matmul: {
      const Tensor& a = in_value(0);
      const Tensor& b = in_value(1);
      const bool ta = self.flag_a, tb = self.flag_b;
      const std::size_t m = y.dim(0), n = y.dim(1);
      const std::size_t k = ta ? a.dim(0) : a.dim(1);
      const auto av = a.values();
      const auto bv = b.values();
      if (wants(0)) {
        auto& ga = grad_slot(self.inputs[0]);
        for (std::size_t i = 0; i < m; ++i) {
          for (std::size_t p = 0; p < k; ++p) {
            double acc = 0.0;
            for (std::size_t j = 0; j < n; ++j) {
              acc += dy[i * n + j] * (tb ? bv[j * k + p] : bv[p * n + j]);
            }
            ga[ta ? p * m + i : i * k + p] += acc;
          }
        }
      }
      if (wants(1)) {
        auto& gb = grad_slot(self.inputs[1]);
        for (std::size_t p = 0; p < k; ++p) {
          for (std::size_t j = 0; j < n; ++j) {
            double acc = 0.0;
            for (std::size_t i = 0; i < m; ++i) {
              acc += (ta ? av[p * m + i] : av[i * k + p]) * dy[i * n + j];
            }
            gb[tb ? j * k + p : p * n + j] += acc;
          }
        }
      }
      break;
    }
    case OpTag::conv1d_same: {
      const Tensor& x = in_value(0);
      const Tensor& w = in_value(1);
      const std::size_t len = x.dim(0), din = x.dim(1);
      const std::size_t filters = w.dim(0), window = w.dim(1);
      const std::ptrdiff_t half = static_cast<std::ptrdiff_t>(window / 2);
      double* gx = wants(0) ? grad_slot(self.inputs[0]).data() : nullptr;
      double* gw = wants(1) ? grad_slot(self.inputs[1]).data() : nullptr;
      double* gb = wants(2) ? grad_slot(self.inputs[2]).data() : nullptr;
      const auto xv = x.values();
      const auto wv = w.values();
      for (std::size_t h = 0; h < len; ++h) {
        for (std::size_t f = 0; f < filters; ++f) {
          const double g = dy[h * filters + f];
          if (g == 0.0) continue;
          if (gb) gb[f] += g;
          for (std::size_t t = 0; t < window; ++t) {
            const std::ptrdiff_t pos = static_cast<std::ptrdiff_t>(h + t) - half;
            if (pos < 0 || pos >= static_cast<std::ptrdiff_t>(len)) continue;
            const std::size_t woff = (f * window + t) * din;
            const std::size_t xoff = static_cast<std::size_t>(pos) * din;
            for (std::size_t c = 0; c < din; ++c) {
              if (gx) gx[xoff + c] += g * wv[woff + c];
              if (gw) gw[woff + c] += g * xv[xoff + c];
            }
          }
        }
      }
      break;
    }
    case OpTag::embedding_lookup: {
      if (!wants(0)) break;
      auto& gt = grad_slot(self.inputs[0]);
      const std::size_t width = y.dim(1);
      for (std::size_t r = 0; r < self.ids.size(); ++r) {
        if (self.ids[r] == self.index) continue;
        double* dst = &gt[self.ids[r] * width];
        for (std::size_t c = 0; c < width; ++c) dst[c] += dy[r * width + c];
      }
      break;
    }
    case OpTag::relu: {
      auto& gx = grad_slot(self.inputs[0]);
      const Tensor& x = in_value(0);
      for (std::size_t i = 0; i < dy.size(); ++i) gx[i] += x[i] > 0.0 ? dy[i] : 0.0;
      break;
    }
    case OpTag::sigmoid: {
      auto& gx = grad_slot(self.inputs[0]);
      for (std::size_t i = 0; i < dy.size(); ++i) gx[i] += dy[i] * y[i] * (1.0 - y[i]);
      break;
    }
    case OpTag::tanh: {
      auto& gx = grad_slot(self.inputs[0]);
      for (std::size_t i = 0; i < dy.size(); ++i) gx[i] += dy[i] * (1.0 - y[i] * y[i]);
      break;
    }
    case OpTag::leaky_relu: {
      auto& gx = grad_slot(self.inputs[0]);
      const Tensor& x = in_value(0);
      for (std::size_t i = 0; i < dy.size(); ++i) {
        gx[i] += x[i] > 0.0 ? dy[i] : self.scalar * dy[i];
      }
      break;
    }
    case OpTag::elementwise_mul: {
      const Tensor& a = in_value(0);
      const Tensor& b = in_value(1);
      if (wants(0)) {
        auto& ga = grad_slot(self.inputs[0]);
        for (std::size_t i = 0; i < dy.size(); ++i) ga[i] += dy[i] * b[i];
      }
      if (wants(1)) {
        auto& gb = grad_slot(self.inputs[1]);
        for (std::size_t i = 0; i < dy.size(); ++i) gb[i] += dy[i] * a[i];
      }
      break;
    }
    case OpTag::elementwise_sub: {
      if (wants(0)) {
        auto& ga = grad_slot(self.inputs[0]);
        for (std::size_t i = 0; i < dy.size(); ++i) ga[i] += dy[i];
      }
      if (wants(1)) {
        auto& gb = grad_slot(self.inputs[1]);
        for (std::size_t i = 0; i < dy.size(); ++i) gb[i] -= dy[i];
      }
      break;
    }
    case OpTag::add: {
      if (wants(0)) {
        auto& ga = grad_slot(self.inputs[0]);
        for (std::size_t i = 0; i < dy.size(); ++i) ga[i] += dy[i];
      }
      if (wants(1)) {
        auto& gb = grad_slot(self.inputs[1]);
        if (self.flag_a) {
          const std::size_t c = gb.size();
          for (std::size_t i = 0; i < dy.size(); ++i) gb[i % c] += dy[i];
        } else {
          for (std::size_t i = 0; i < dy.size(); ++i) gb[i] += dy[i];
        }
      }
      break;
    }
    case OpTag::concat: {
      if (self.index == 0) {
        std::size_t offset = 0;
        for (std::size_t s = 0; s < self.inputs.size(); ++s) {
          const std::size_t n = in_value(s).size();
          if (wants(s)) {
            auto& g = grad_slot(self.inputs[s]);
            for (std::size_t i = 0; i < n; ++i) g[i] += dy[offset + i];
          }
          offset += n;
        }
      } else {
        const std::size_t rows = y.dim(0), width = y.dim(1);
        std::size_t col = 0;
        for (std::size_t s = 0; s < self.inputs.size(); ++s) {
          const std::size_t w = in_value(s).dim(1);
          if (wants(s)) {
            auto& g = grad_slot(self.inputs[s]);
            for (std::size_t r = 0; r < rows; ++r) {
              for (std::size_t c = 0; c < w; ++c) g[r * w + c] += dy[r * width + col + c];
            }
          }
          col += w;
        }
      }
      break;
    }
    case OpTag::masked_softmax: {
      auto& gx = grad_slot(self.inputs[0]);
      double dot = 0.0;
      for (std::size_t i = 0; i < dy.size(); ++i) dot += y[i] * dy[i];
      for (std::size_t i = 0; i < dy.size(); ++i) gx[i] += y[i] * (dy[i] - dot);
      break;
    }
    case OpTag::weighted_sum: {
      const Tensor& w = in_value(0);
      const Tensor& v = in_value(1);
      const std::size_t width = v.dim(1);
      if (wants(0)) {
        auto& gw = grad_slot(self.inputs[0]);
        for (std::size_t j = 0; j < w.size(); ++j) {
          double acc = 0.0;
          for (std::size_t c = 0; c < width; ++c) acc += dy[c] * v.at(j, c);
          gw[j] += acc;
        }
      }
      if (wants(1)) {
        auto& gv = grad_slot(self.inputs[1]);
        for (std::size_t j = 0; j < w.size(); ++j) {
          for (std::size_t c = 0; c < width; ++c) gv[j * width + c] += w[j] * dy[c];
        }
      }
      break;
    }
    case OpTag::mean_all: {
      auto& gx = grad_slot(self.inputs[0]);
      const double g = dy[0] / static_cast<double>(gx.size());
      for (double& v : gx) v += g;
      break;
    }
    case OpTag::scalar_add: {
      auto& gx = grad_slot(self.inputs[0]);
      for (std::size_t i = 0; i < dy.size(); ++i) gx[i] += dy[i];
      break;
    }
    case OpTag::select_row: {
      auto& gx = grad_slot(self.inputs[0]);
      const std::size_t width = y.size();
      for (std::size_t c = 0; c < width; ++c) gx[self.index * width + c] += dy[c];
      break;
    }
    case OpTag::transpose: {
      auto& gx = grad_slot(self.inputs[0]);
      const std::size_t r = y.dim(1), c = y.dim(0);  // input is r x c
      for (std::size_t i = 0; i < r; ++i) {
        for (std::size_t j = 0; j < c; ++j) gx[i * c + j] += dy[j * r + i];
      }
      break;
    }
  }
}

}  // namespace catn::ad
