#pragma once

#include <utility>
#include <vector>

#include "fitb/graph.hpp"
#include "fitb/nn.hpp"
#include "fitb/vocab.hpp"

namespace fitb {

struct TextEncoderConfig {
  std::size_t layers = 2;
  std::size_t width = 64;  // D_txt
  std::size_t heads = 4;
  std::size_t ff = 128;
  std::size_t max_positions = 512;
  double dropout = 0.0;

  TransformerConfig transformer() const { return {layers, width, heads, ff, dropout}; }
};

// Tokenized clip set: one token-id sequence per sentence plus the stream
// blank order (sentence index, token position within the sentence).
struct TokenizedSet {
  std::vector<std::vector<std::size_t>> sentences;
  std::vector<std::pair<std::size_t, std::size_t>> blanks;
};

// Gender-aware set encoder. All sentences of a set are processed jointly:
// one SUMMARY token is prepended to the concatenated token stream and the
// stack attends bidirectionally (PAD positions are blocked as keys). Each
// blank's encoding t_b is the concatenation of the final SUMMARY state and
// the final state at the blank's stream position; the same summary state
// serves every blank of the set.
template <class S>
class TextEncoder {
 public:
  TextEncoder(TextEncoderConfig cfg, std::size_t vocab_size)
      : cfg_(cfg), vocab_size_(vocab_size) {}

  const TextEncoderConfig& config() const { return cfg_; }
  std::size_t encoding_dim() const { return 2 * cfg_.width; }

  // Registers "txt.*" parameters.
  void register_params(ParameterStore<S>& ps, Rng& rng) const;

  struct SetEncoding {
    Value summary;                      // 1 x width
    std::vector<Value> blank_rows;      // each 1 x 2*width
    Value blanks;                       // B x 2*width; invalid when B == 0
  };

  SetEncoding encode_set(Graph<S>& g, ParameterStore<S>& ps, const TokenizedSet& set,
                         const ForwardOptions& fwd = {}) const;

  // 2-class logits of the text gender head on t_b rows.
  Value gender_logits(Graph<S>& g, ParameterStore<S>& ps, Value blank_encodings) const;

 private:
  TextEncoderConfig cfg_;
  std::size_t vocab_size_;
};

}  // namespace fitb
