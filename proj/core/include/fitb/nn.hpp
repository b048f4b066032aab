#pragma once

#include <string>

#include "fitb/graph.hpp"
#include "fitb/param_store.hpp"
#include "fitb/rng.hpp"

namespace fitb {

// Shared transformer building blocks used by both the text encoder and the
// blank-sequence model. Parameters follow the naming scheme
//   <prefix>.l<i>.attn.{wq,wk,wv,wo,bq,bk,bv,bo}
//   <prefix>.l<i>.ln1.{g,b}  <prefix>.l<i>.ff.{w1,b1,w2,b2}  <prefix>.l<i>.ln2.{g,b}

struct TransformerConfig {
  std::size_t layers = 2;
  std::size_t width = 64;
  std::size_t heads = 4;
  std::size_t ff = 128;
  double dropout = 0.0;
};

struct ForwardOptions {
  bool train_mode = false;       // enables dropout when configured
  std::uint64_t dropout_seed = 0;
};

template <class S>
void register_transformer_params(ParameterStore<S>& ps, const std::string& prefix,
                                 const TransformerConfig& cfg, Rng& rng);

// x.w [in x out] (+ x.b [1 x out] when present).
template <class S>
Value linear(Graph<S>& g, Value x, ParameterStore<S>& ps, const std::string& prefix);

// Post-norm layer: x = LN1(x + MHSA(x)); x = LN2(x + FF(x)).
template <class S>
Value transformer_layer(Graph<S>& g, Value x, ParameterStore<S>& ps, const std::string& prefix,
                        const TransformerConfig& cfg, Value mask, const ForwardOptions& fwd,
                        std::size_t layer_index);

template <class S>
Value transformer_stack(Graph<S>& g, Value x, ParameterStore<S>& ps, const std::string& prefix,
                        const TransformerConfig& cfg, Value mask, const ForwardOptions& fwd = {});

// Standard sinusoidal position table, rows = positions.
template <class S>
Tensor<S> sinusoidal_positions(std::size_t n, std::size_t dim);

// [n x n] additive mask: 0 where key <= query position, -1e9 elsewhere.
template <class S>
Tensor<S> causal_mask(std::size_t n);

// [n x n] additive mask blocking the given key positions for every query.
template <class S>
Tensor<S> key_block_mask(std::size_t n, const std::vector<std::uint8_t>& blocked);

}  // namespace fitb
