#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "fitb/param_store.hpp"
#include "fitb/tensor.hpp"

namespace fitb {

// Handle to a node in a Graph. Cheap to copy; valid only for the graph
// that produced it.
struct Value {
  int id = -1;
  bool valid() const { return id >= 0; }
};

// Reverse-mode tape. Nodes are recorded in creation order, which is a
// topological order by construction; backward() is a single reverse
// sweep. Tensors are never aliased in place: every op writes a fresh
// output. A graph instance is single-threaded; independent forward
// evaluations on shared read-only parameters may each use their own graph.
template <class S>
class Graph {
 public:
  Graph() = default;
  Graph(const Graph&) = delete;
  Graph& operator=(const Graph&) = delete;

  // When enabled every op output is scanned for NaN/Inf.
  void set_checked(bool on) { checked_ = on; }

  // Constant leaf; no gradient flows into it.
  Value input(Tensor<S> t);
  // Leaf bound to a parameter store entry; backward() accumulates the
  // node gradient into the entry and marks it populated.
  Value param(ParameterStore<S>& store, const std::string& name);

  const Tensor<S>& value(Value v) const { return node(v.id).value; }
  // Valid after backward(); zero tensor for nodes gradients never reached.
  const Tensor<S>& grad(Value v) const { return node(v.id).grad; }

  // ---- ops ----
  Value matmul(Value a, Value b);
  // a * b^T
  Value matmul_nt(Value a, Value b);
  // Elementwise add; b may also be a single row broadcast over a's rows.
  Value add(Value a, Value b);
  Value mul(Value a, Value b);
  Value scale(Value a, S k);
  Value tanh(Value a);
  Value relu(Value a);
  Value softmax_rows(Value a);
  Value concat_cols(const std::vector<Value>& parts);
  // Stacks parts (equal column counts) vertically.
  Value concat_rows(const std::vector<Value>& parts);
  // Same element count, new shape; gradient passes through untouched.
  Value reshape(Value a, std::vector<std::size_t> shape);
  Value slice_cols(Value a, std::size_t c0, std::size_t c1);
  Value slice_rows(Value a, std::size_t r0, std::size_t r1);
  // Gathers rows of `table` at the given indices (embedding lookup).
  Value lookup_rows(Value table, const std::vector<std::size_t>& ids);
  // Per-row normalization with affine gain/bias rows.
  Value layer_norm(Value x, Value gain, Value bias, S eps = S(1e-5));
  // Mean over unmasked rows of -log softmax(logits)[target].
  Value cross_entropy_from_logits(Value logits, const std::vector<std::size_t>& targets,
                                  const std::vector<std::uint8_t>* mask = nullptr);
  // Inverted-dropout with a seeded mask; identity when p == 0.
  Value dropout(Value a, double p, std::uint64_t seed);
  Value sum_all(Value a);
  Value mean_all(Value a);

  // Seeds d(loss)/d(loss) = 1 and sweeps the tape once. `loss` must be a
  // scalar. Parameter gradients are accumulated into their stores.
  void backward(Value loss);

  std::size_t node_count() const { return nodes_.size(); }

 private:
  struct Node {
    Tensor<S> value;
    Tensor<S> grad;
    bool needs_grad = false;
    std::function<void()> back;          // accumulates into parent grads
    ParamEntry<S>* param = nullptr;      // set for parameter leaves
  };

  Node& node(int id);
  const Node& node(int id) const;
  Value push(Tensor<S> value, bool needs_grad, std::function<void()> back = nullptr);
  Tensor<S>& grad_buf(int id);
  void check(const Tensor<S>& t, const char* op) const;

  std::vector<Node> nodes_;
  bool checked_ = false;
};

using GraphF = Graph<float>;
using GraphD = Graph<double>;

// Scaled dot-product attention composed from primitive ops:
// softmax(q k^T * scale + mask) v. `mask`, when valid, is added to the
// score matrix before the softmax (use large negative entries to block).
template <class S>
Value scaled_dot_product_attention(Graph<S>& g, Value q, Value k, Value v, Value mask, S scale);

}  // namespace fitb
