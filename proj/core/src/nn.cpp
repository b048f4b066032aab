#include "fitb/nn.hpp"

#include <cmath>

#include "fitb/error.hpp"

namespace fitb {

namespace {
constexpr double kMaskValue = -1e9;
}

template <class S>
void register_transformer_params(ParameterStore<S>& ps, const std::string& prefix,
                                 const TransformerConfig& cfg, Rng& rng) {
  if (cfg.width == 0 || cfg.heads == 0 || cfg.width % cfg.heads != 0)
    throw ConfigError("transformer: width must be a positive multiple of heads");
  for (std::size_t l = 0; l < cfg.layers; ++l) {
    const std::string lp = prefix + ".l" + std::to_string(l);
    for (const char* w : {".attn.wq", ".attn.wk", ".attn.wv", ".attn.wo"})
      ps.add(lp + w, xavier_uniform<S>(cfg.width, cfg.width, rng));
    for (const char* b : {".attn.bq", ".attn.bk", ".attn.bv", ".attn.bo"})
      ps.add(lp + b, Tensor<S>::zeros({1, cfg.width}));
    ps.add(lp + ".ff.w1", xavier_uniform<S>(cfg.width, cfg.ff, rng));
    ps.add(lp + ".ff.b1", Tensor<S>::zeros({1, cfg.ff}));
    ps.add(lp + ".ff.w2", xavier_uniform<S>(cfg.ff, cfg.width, rng));
    ps.add(lp + ".ff.b2", Tensor<S>::zeros({1, cfg.width}));
    for (const char* ln : {".ln1", ".ln2"}) {
      ps.add(lp + ln + ".g", Tensor<S>::full({1, cfg.width}, S(1)));
      ps.add(lp + ln + ".b", Tensor<S>::zeros({1, cfg.width}));
    }
  }
}

template <class S>
Value linear(Graph<S>& g, Value x, ParameterStore<S>& ps, const std::string& prefix) {
  Value out = g.matmul(x, g.param(ps, prefix + ".w"));
  if (ps.has(prefix + ".b")) out = g.add(out, g.param(ps, prefix + ".b"));
  return out;
}

namespace {
template <class S>
Value attn_proj(Graph<S>& g, Value x, ParameterStore<S>& ps, const std::string& lp,
                const std::string& which) {
  Value out = g.matmul(x, g.param(ps, lp + ".attn.w" + which));
  return g.add(out, g.param(ps, lp + ".attn.b" + which));
}
}  // namespace

template <class S>
Value transformer_layer(Graph<S>& g, Value x, ParameterStore<S>& ps, const std::string& prefix,
                        const TransformerConfig& cfg, Value mask, const ForwardOptions& fwd,
                        std::size_t layer_index) {
  const std::string lp = prefix + ".l" + std::to_string(layer_index);
  const std::size_t dh = cfg.width / cfg.heads;
  Value q = attn_proj(g, x, ps, lp, "q");
  Value k = attn_proj(g, x, ps, lp, "k");
  Value v = attn_proj(g, x, ps, lp, "v");
  const S scale = static_cast<S>(1.0 / std::sqrt(static_cast<double>(dh)));
  std::vector<Value> head_outs;
  head_outs.reserve(cfg.heads);
  for (std::size_t h = 0; h < cfg.heads; ++h) {
    Value qh = g.slice_cols(q, h * dh, (h + 1) * dh);
    Value kh = g.slice_cols(k, h * dh, (h + 1) * dh);
    Value vh = g.slice_cols(v, h * dh, (h + 1) * dh);
    head_outs.push_back(scaled_dot_product_attention(g, qh, kh, vh, mask, scale));
  }
  Value attn = g.add(g.matmul(g.concat_cols(head_outs), g.param(ps, lp + ".attn.wo")),
                     g.param(ps, lp + ".attn.bo"));
  if (fwd.train_mode && cfg.dropout > 0.0)
    attn = g.dropout(attn, cfg.dropout, split_seed(fwd.dropout_seed, "attn", layer_index));
  x = g.layer_norm(g.add(x, attn), g.param(ps, lp + ".ln1.g"), g.param(ps, lp + ".ln1.b"));

  Value h1 = g.relu(g.add(g.matmul(x, g.param(ps, lp + ".ff.w1")), g.param(ps, lp + ".ff.b1")));
  Value ff = g.add(g.matmul(h1, g.param(ps, lp + ".ff.w2")), g.param(ps, lp + ".ff.b2"));
  if (fwd.train_mode && cfg.dropout > 0.0)
    ff = g.dropout(ff, cfg.dropout, split_seed(fwd.dropout_seed, "ff", layer_index));
  return g.layer_norm(g.add(x, ff), g.param(ps, lp + ".ln2.g"), g.param(ps, lp + ".ln2.b"));
}

template <class S>
Value transformer_stack(Graph<S>& g, Value x, ParameterStore<S>& ps, const std::string& prefix,
                        const TransformerConfig& cfg, Value mask, const ForwardOptions& fwd) {
  for (std::size_t l = 0; l < cfg.layers; ++l)
    x = transformer_layer(g, x, ps, prefix, cfg, mask, fwd, l);
  return x;
}

template <class S>
Tensor<S> sinusoidal_positions(std::size_t n, std::size_t dim) {
  Tensor<S> pe({n, dim});
  for (std::size_t pos = 0; pos < n; ++pos) {
    for (std::size_t i = 0; i < dim; ++i) {
      const double exponent = static_cast<double>(2 * (i / 2)) / static_cast<double>(dim);
      const double angle = static_cast<double>(pos) / std::pow(10000.0, exponent);
      pe[pos * dim + i] = static_cast<S>((i % 2 == 0) ? std::sin(angle) : std::cos(angle));
    }
  }
  return pe;
}

template <class S>
Tensor<S> causal_mask(std::size_t n) {
  Tensor<S> m({n, n});
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) m[i * n + j] = j <= i ? S(0) : static_cast<S>(kMaskValue);
  return m;
}

template <class S>
Tensor<S> key_block_mask(std::size_t n, const std::vector<std::uint8_t>& blocked) {
  if (blocked.size() != n) throw ShapeError("key_block_mask: flag length mismatch");
  Tensor<S> m({n, n});
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      m[i * n + j] = blocked[j] ? static_cast<S>(kMaskValue) : S(0);
  return m;
}

#define FITB_INSTANTIATE(S)                                                                     \
  template void register_transformer_params<S>(ParameterStore<S>&, const std::string&,         \
                                               const TransformerConfig&, Rng&);                 \
  template Value linear<S>(Graph<S>&, Value, ParameterStore<S>&, const std::string&);          \
  template Value transformer_layer<S>(Graph<S>&, Value, ParameterStore<S>&, const std::string&, \
                                      const TransformerConfig&, Value, const ForwardOptions&,   \
                                      std::size_t);                                             \
  template Value transformer_stack<S>(Graph<S>&, Value, ParameterStore<S>&, const std::string&, \
                                      const TransformerConfig&, Value, const ForwardOptions&);  \
  template Tensor<S> sinusoidal_positions<S>(std::size_t, std::size_t);                        \
  template Tensor<S> causal_mask<S>(std::size_t);                                              \
  template Tensor<S> key_block_mask<S>(std::size_t, const std::vector<std::uint8_t>&);

FITB_INSTANTIATE(float)
FITB_INSTANTIATE(double)
#undef FITB_INSTANTIATE

}  // namespace fitb
