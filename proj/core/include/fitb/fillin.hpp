#pragma once

#include <string>
#include <vector>

#include "fitb/cluster.hpp"
#include "fitb/corpus.hpp"
#include "fitb/text_encoder.hpp"

namespace fitb {

struct AblationFlags {
  bool no_face = false;         // text-only: attended face vector forced to zero
  bool no_video = false;        // v_f zeroed in the attention input
  bool no_aug = false;          // train on the non-overlapping segmentation only
  bool no_gender_loss = false;  // lambda = 0

  void validate() const;  // throws ConfigError on contradictory combinations
  std::string describe() const;
};

enum class DecodeKind { greedy, beam };

struct DecodeConfig {
  DecodeKind kind = DecodeKind::greedy;
  std::size_t beam_width = 3;
};

struct FillInConfig {
  std::size_t max_local_ids = 11;  // K
  std::size_t layers = 2;          // decoder self-attention layers (paper scale: 6)
  std::size_t heads = 4;
  std::size_t ff = 128;            // feedforward width (paper scale: 2048)
  std::size_t attn_hidden = 0;     // face-attention hidden width; 0 = model width
  double lambda_gender = 0.2;
  double lr = 5e-5;
  std::size_t epochs = 40;
  std::size_t batch_sets = 16;  // one set per batch element
  std::size_t max_blanks = 64;
  double dropout = 0.0;
  std::size_t pretrain_epochs = 4;  // gender pretraining phase of the text encoder
  double pretrain_lr = 3e-4;
  DecodeConfig decode;
  TextEncoderConfig text;
  DbscanParams clustering;
  AblationFlags ablation;
  std::uint64_t seed = 0;
  std::size_t d_face = 32;
  std::size_t d_vid = 16;

  // Blank representation width: s_b = [c_hat ; t_b].
  std::size_t model_width() const { return d_face + 2 * text.width; }
  std::size_t attention_hidden() const { return attn_hidden ? attn_hidden : model_width(); }

  void validate() const;

  static FillInConfig desk_default();
  // 6 layers / feedforward 2048 preset sized for 512-dim faces and a
  // 768-wide text encoder.
  static FillInConfig paper_scale();
};

// Preprocessed set: tokenized sentences plus per-blank cluster features.
// Pure data, cacheable across epochs.
struct PreparedBlank {
  std::size_t clip_index = 0;
  std::size_t token_position = 0;
  // F x (d_face + d_vid) rows [c_f ; v_f]; empty when the clip has no faces.
  Tensor<float> cluster_inputs;
  Tensor<float> centers;  // F x d_face
  std::vector<std::vector<std::size_t>> cluster_frames;
};

struct PreparedSet {
  std::string movie_id;
  std::size_t window_index = 0;
  TokenizedSet tokens;
  std::vector<PreparedBlank> blanks;
  std::vector<int> gt_ids;         // empty in inference mode
  std::vector<Gender> gt_genders;  // empty in inference mode
};

template <class S>
class FillInModel {
 public:
  FillInModel(FillInConfig cfg, std::size_t vocab_size);

  const FillInConfig& config() const { return cfg_; }
  const TextEncoder<S>& text_encoder() const { return text_; }

  // Registers every parameter the configured variant uses ("txt.*" and
  // "fill.*" namespaces).
  void register_params(ParameterStore<S>& ps, Rng& rng) const;

  PreparedSet prepare(const ClipSet& cs, const FeatureDims& dims, const Vocabulary& vocab) const;

  struct Forward {
    Value id_logits;       // B x K
    Value gender_logits;   // B x 2 (visual head; text head under no_face)
    Value blank_features;  // B x model_width (s rows)
    std::vector<Tensor<S>> attention;     // per blank, 1 x F (empty when F == 0)
    std::vector<std::uint8_t> has_face;   // per blank
  };

  // Teacher-forced forward: position b is conditioned on s_1..s_b and
  // prev_labels[0..b-1] (causal masking; position 0 sees only BEGIN).
  // prev_labels must hold B entries; entries at positions >= the decoded
  // prefix are ignored by causality.
  Forward forward_set(Graph<S>& g, ParameterStore<S>& ps, const PreparedSet& set,
                      const std::vector<int>& prev_labels, const ForwardOptions& fwd = {}) const;

  // L_character + lambda * L_gender. Gender terms are skipped for blanks
  // without any face cluster (no attended representation exists).
  Value total_loss(Graph<S>& g, const Forward& f, const std::vector<int>& gt_ids,
                   const std::vector<Gender>& gt_genders) const;

  struct Decoded {
    std::vector<int> ids;
    std::vector<Gender> genders;
    std::vector<std::vector<double>> attention;
    std::vector<std::vector<std::size_t>> chosen_frames;  // argmax-cluster members
  };

  // Left-to-right constrained decoding; predictions are always
  // first-occurrence canonical. Ties break toward the lowest ID.
  Decoded decode(ParameterStore<S>& ps, const PreparedSet& set, const DecodeConfig& dc) const;

 private:
  Value id_embedding_rows(Graph<S>& g, ParameterStore<S>& ps,
                          const std::vector<int>& prev_labels, std::size_t b) const;

  FillInConfig cfg_;
  TextEncoder<S> text_;
};

using FillInModelF = FillInModel<float>;
using FillInModelD = FillInModel<double>;

}  // namespace fitb
