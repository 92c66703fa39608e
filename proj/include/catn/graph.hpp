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
#include <limits>
#include <span>
#include <string_view>
#include <vector>

#include "catn/tensor.hpp"

namespace catn::ad {

enum class OpTag : std::uint8_t {
  leaf,
  constant,
  matmul,
  conv1d_same,
  embedding_lookup,
  relu,
  sigmoid,
  tanh,
  leaky_relu,
  elementwise_mul,
  elementwise_sub,
  add,
  concat,
  masked_softmax,
  weighted_sum,
  mean_all,
  scalar_add,
  select_row,
  transpose,
};

std::string_view op_name(OpTag op);
// Throws catn::Error for names that do not denote a forward op.
OpTag parse_op(std::string_view name);

// Handle to a node of one Graph.
struct Var {
  static constexpr std::uint32_t kNone = std::numeric_limits<std::uint32_t>::max();
  std::uint32_t id = kNone;
  bool valid() const noexcept { return id != kNone; }
};

// Extra arguments for the generic apply() entry point.
struct OpAttributes {
  bool transpose_a = false;
  bool transpose_b = false;
  double scalar = 0.0;  // leaky_relu slope or scalar_add offset
  std::size_t index = 0;  // select_row row, concat axis
  std::vector<std::uint32_t> ids;  // embedding_lookup
  std::vector<std::uint8_t> mask;  // masked_softmax
};

// Define-by-run reverse-mode tape. Nodes are appended in evaluation order, so
// the append order is a topological order and backward() walks it in reverse.
//
// Parameters enter through parameter(): the node aliases the caller's tensor
// (no copy) and backward() accumulates into that tensor's grad slot. The
// tensor must outlive the graph.
class Graph {
 public:
  explicit Graph(bool grad_enabled = true) : grad_enabled_(grad_enabled) {}
  Graph(const Graph&) = delete;
  Graph& operator=(const Graph&) = delete;

  Var constant(Tensor value);
  Var parameter(Tensor& param);

  // op(a) * op(b) for rank-2 operands, op = optional transpose.
  Var matmul(Var a, Var b, bool transpose_a = false, bool transpose_b = false);
  // input l x d_in, weights n x s x d_in, bias n -> l x n. s must be odd; the
  // window is centred and zero padded at both ends.
  Var conv1d_same(Var input, Var weights, Var bias);
  // Rows of table (V x d) selected by ids. Rows listed as padding_id receive
  // no gradient.
  Var embedding_lookup(Var table, std::vector<std::uint32_t> ids,
                       std::uint32_t padding_id = kNoPadding);
  Var relu(Var x);
  Var sigmoid(Var x);
  Var tanh(Var x);
  Var leaky_relu(Var x, double alpha);
  Var mul(Var a, Var b);
  Var sub(Var a, Var b);
  // Same shape, equal element count, or b a row vector broadcast over a's rows.
  Var add(Var a, Var b);
  // axis 0 stacks rows, axis 1 joins columns of rank-2 parts.
  Var concat(std::span<const Var> parts, std::size_t axis);
  // Softmax over the unmasked entries; masked entries are exactly zero. An
  // all-masked input yields all zeros.
  Var masked_softmax(Var logits, std::vector<std::uint8_t> mask);
  // weights (L) . values (L x k) -> 1 x k
  Var weighted_sum(Var weights, Var values);
  Var mean_all(Var x);
  Var scalar_add(Var x, double c);
  Var select_row(Var x, std::size_t row);
  Var transpose(Var x);

  Var apply(OpTag op, std::span<const Var> inputs, const OpAttributes& attrs = {});

  const Tensor& value(Var v) const;
  bool requires_grad(Var v) const;
  // Gradient of the last backward() loss w.r.t. an intermediate node. Empty
  // when the node does not require grad.
  std::span<const double> grad(Var v) const;
  OpTag op(Var v) const;
  std::span<const Var> inputs(Var v) const;
  std::size_t size() const noexcept { return nodes_.size(); }

  // Loss must hold exactly one element; its adjoint starts at `seed`.
  void backward(Var loss, double seed = 1.0);

  static constexpr std::uint32_t kNoPadding = std::numeric_limits<std::uint32_t>::max();

 private:
  struct Node {
    OpTag op = OpTag::constant;
    std::vector<Var> inputs;
    Tensor owned;
    Tensor* param = nullptr;
    std::vector<double> grad;
    bool requires_grad = false;
    bool flag_a = false;
    bool flag_b = false;
    double scalar = 0.0;
    std::size_t index = 0;
    std::vector<std::uint32_t> ids;
    std::vector<std::uint8_t> mask;

    const Tensor& value() const { return param ? *param : owned; }
  };

  const Node& node(Var v) const;
  Var push(Node node);
  Node make(OpTag op, std::initializer_list<Var> inputs) const;
  std::vector<double>& grad_slot(Var v);
  void backward_node(std::size_t index);

  bool grad_enabled_;
  std::vector<Node> nodes_;
};

}  // namespace catn::ad
