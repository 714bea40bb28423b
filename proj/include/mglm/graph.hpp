#pragma once

#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "mglm/tensor.hpp"

namespace mglm {

// A learnable array plus its gradient accumulator.
struct Parameter {
  Tensor value;
  Tensor grad;
  std::string name;

  Parameter() = default;
  Parameter(std::string n, Tensor v) : value(std::move(v)), name(std::move(n)) {
    grad = Tensor::zeros(value.shape);
  }

  void zero_grad() { grad.fill(0.0); }
};

// One weighted target column within a logits row.
struct RowTarget {
  int index;
  double weight;
};

// Reverse-mode tape. Each op records its output value and a backward closure;
// backward() walks the tape in reverse and accumulates into leaf grads.
// Ops are coarse grained (whole matmul, whole attention core) so the tape
// stays short and the time goes into the kernels.
class Graph {
 public:
  // Leaves.
  int input(Tensor v);
  int param(Parameter& p);

  // [m,k] x [k,n] -> [m,n]
  int matmul(int a, int b);
  // Elementwise sum, same shape.
  int add(int a, int b);
  // Add a length-n row vector to every row of an [m,n] matrix.
  int add_rowvec(int x, int bias);
  int relu(int x);
  // Row-wise layer normalization with learned gain/offset, eps = 1e-5.
  int layer_norm(int x, int gamma, int beta);
  // Multi-head scaled dot-product attention over the full sequence (no mask).
  // q,k,v: [T,d], num_heads must divide d. Returns the concatenated head
  // outputs, [T,d]; output projection is the caller's matmul.
  int attention_core(int q, int k, int v, int num_heads);
  // Row i of the result = tok_table[tokens[i]] + pos_table[i] + chan_table[channels[i]].
  int embed_rows(int tok_table, int pos_table, int chan_table,
                 const std::vector<int>& tokens, const std::vector<int>& channels);
  // Scalar reductions (test oracles and tiny models).
  int sum(int x);
  int dot(int a, int b);
  // Weighted negative log likelihood under a per-row softmax of [T,V] logits.
  // banned[v] marks columns excluded from the softmax support (never targets).
  // loss = scale * sum_rows sum_{(c,w) in targets[row]} w * (-log p_row[c]).
  int weighted_nll_rows(int logits, const std::vector<uint8_t>& banned,
                        const std::vector<std::vector<RowTarget>>& targets, double scale);

  // Populates grads of everything reachable from `node` (must be scalar).
  // When accumulate_into_params is true, each bound Parameter's grad is
  // incremented; repeated calls without zero_grad therefore accumulate.
  // Trainers that batch across threads call backward(..., false) per example
  // and export serially with add_param_grads().
  void backward(int node, bool accumulate_into_params = true);
  void add_param_grads();

  const Tensor& value(int id) const { return nodes_[static_cast<size_t>(id)].value; }
  const Tensor& grad(int id) const { return nodes_[static_cast<size_t>(id)].grad; }
  int size() const { return static_cast<int>(nodes_.size()); }

 private:
  struct Node {
    Tensor value;
    Tensor grad;
    std::function<void(Graph&)> back;  // empty for leaves
    Parameter* bound = nullptr;
  };

  int push(Tensor value, std::function<void(Graph&)> back);
  Tensor& grad_mut(int id) { return nodes_[static_cast<size_t>(id)].grad; }
  void check_id(int id) const;

  std::vector<Node> nodes_;
};

}  // namespace mglm
