#include "fitb/text_encoder.hpp"

#include "fitb/error.hpp"

namespace fitb {

template <class S>
void TextEncoder<S>::register_params(ParameterStore<S>& ps, Rng& rng) const {
  ps.add("txt.tok_emb", normal_init<S>({vocab_size_, cfg_.width}, 0.02, rng));
  register_transformer_params(ps, "txt", cfg_.transformer(), rng);
  ps.add("txt.gender.w", xavier_uniform<S>(encoding_dim(), 2, rng));
  ps.add("txt.gender.b", Tensor<S>::zeros({1, 2}));
}

template <class S>
typename TextEncoder<S>::SetEncoding TextEncoder<S>::encode_set(Graph<S>& g,
                                                                ParameterStore<S>& ps,
                                                                const TokenizedSet& set,
                                                                const ForwardOptions& fwd) const {
  if (set.sentences.empty()) throw DataError("encode_set: set has no sentences");

  // Stream: SUMMARY then every sentence in order.
  std::vector<std::size_t> stream = {Vocabulary::kSummary};
  std::vector<std::size_t> sentence_offset(set.sentences.size());
  for (std::size_t si = 0; si < set.sentences.size(); ++si) {
    sentence_offset[si] = stream.size();
    stream.insert(stream.end(), set.sentences[si].begin(), set.sentences[si].end());
  }
  if (stream.size() > cfg_.max_positions)
    throw LengthError("encode_set: stream of " + std::to_string(stream.size()) +
                      " tokens exceeds max length " + std::to_string(cfg_.max_positions));

  std::vector<std::uint8_t> pad_flags(stream.size(), 0);
  bool any_pad = false;
  for (std::size_t i = 0; i < stream.size(); ++i) {
    if (stream[i] == Vocabulary::kPad) {
      pad_flags[i] = 1;
      any_pad = true;
    }
  }

  Value x = g.lookup_rows(g.param(ps, "txt.tok_emb"), stream);
  x = g.add(x, g.input(sinusoidal_positions<S>(stream.size(), cfg_.width)));
  Value mask =
      any_pad ? g.input(key_block_mask<S>(stream.size(), pad_flags)) : Value{};
  x = transformer_stack(g, x, ps, "txt", cfg_.transformer(), mask, fwd);

  SetEncoding enc;
  enc.summary = g.slice_rows(x, 0, 1);
  for (const auto& [si, tp] : set.blanks) {
    if (si >= set.sentences.size() || tp >= set.sentences[si].size())
      throw DataError("encode_set: blank position out of range");
    if (set.sentences[si][tp] != Vocabulary::kBlank)
      throw DataError("encode_set: blank position does not hold the BLANK token");
    const std::size_t pos = sentence_offset[si] + tp;
    Value state = g.slice_rows(x, pos, pos + 1);
    enc.blank_rows.push_back(g.concat_cols({enc.summary, state}));
  }
  if (!enc.blank_rows.empty()) enc.blanks = g.concat_rows(enc.blank_rows);
  return enc;
}

template <class S>
Value TextEncoder<S>::gender_logits(Graph<S>& g, ParameterStore<S>& ps,
                                    Value blank_encodings) const {
  return linear(g, blank_encodings, ps, "txt.gender");
}

template class TextEncoder<float>;
template class TextEncoder<double>;

}  // namespace fitb
