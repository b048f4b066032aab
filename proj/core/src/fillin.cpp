#include "fitb/fillin.hpp"

#include <algorithm>
#include <cmath>

#include "fitb/error.hpp"

namespace fitb {

void AblationFlags::validate() const {
  if (no_face && no_video)
    throw ConfigError(
        "ablation: no_video has no effect under no_face (text-only already drops the "
        "attention input); pass only no_face");
}

std::string AblationFlags::describe() const {
  if (no_face) return no_gender_loss ? "text_only" : "text_only+gender_loss";
  std::string s = "full";
  if (no_video) s += "-video";
  if (no_aug) s += "-aug";
  if (no_gender_loss) s += "-gender_loss";
  return s;
}

void FillInConfig::validate() const {
  ablation.validate();
  if (max_local_ids == 0) throw ConfigError("fillin: K must be positive");
  if (layers == 0 || heads == 0 || ff == 0) throw ConfigError("fillin: transformer dims positive");
  if (model_width() % heads != 0)
    throw ConfigError("fillin: model width " + std::to_string(model_width()) +
                      " must be divisible by heads");
  if (lambda_gender < 0.0) throw ConfigError("fillin: lambda_gender must be >= 0");
  if (batch_sets == 0) throw ConfigError("fillin: batch_sets must be positive");
  if (max_blanks == 0) throw ConfigError("fillin: max_blanks must be positive");
  if (text.width == 0 || text.width % text.heads != 0)
    throw ConfigError("fillin: text width must be a positive multiple of text heads");
  if (decode.kind == DecodeKind::beam && decode.beam_width == 0)
    throw ConfigError("fillin: beam width must be positive");
}

FillInConfig FillInConfig::desk_default() { return FillInConfig{}; }

FillInConfig FillInConfig::paper_scale() {
  FillInConfig cfg;
  cfg.layers = 6;
  cfg.heads = 8;
  cfg.ff = 2048;
  cfg.d_face = 512;
  cfg.d_vid = 1024;
  cfg.text.width = 768;
  cfg.text.layers = 6;
  cfg.text.heads = 12;
  cfg.text.ff = 2048;
  return cfg;
}

template <class S>
FillInModel<S>::FillInModel(FillInConfig cfg, std::size_t vocab_size)
    : cfg_(std::move(cfg)), text_(cfg_.text, vocab_size) {
  cfg_.validate();
}

template <class S>
void FillInModel<S>::register_params(ParameterStore<S>& ps, Rng& rng) const {
  text_.register_params(ps, rng);
  const std::size_t width = cfg_.model_width();
  if (!cfg_.ablation.no_face) {
    const std::size_t attn_in = cfg_.d_face + cfg_.d_vid + 2 * cfg_.text.width;
    ps.add("fill.attn.w1", xavier_uniform<S>(attn_in, cfg_.attention_hidden(), rng));
    ps.add("fill.attn.w2", xavier_uniform<S>(cfg_.attention_hidden(), 1, rng));
    ps.add("fill.noface", normal_init<S>({1, cfg_.d_face}, 0.02, rng));
    ps.add("fill.gvis.w", xavier_uniform<S>(cfg_.d_face, 2, rng));
    ps.add("fill.gvis.b", Tensor<S>::zeros({1, 2}));
  }
  // Row 0 is the BEGIN embedding; rows 1..K are the local-ID embeddings.
  ps.add("fill.id_emb", normal_init<S>({cfg_.max_local_ids + 1, width}, 0.02, rng));
  TransformerConfig tc{cfg_.layers, width, cfg_.heads, cfg_.ff, cfg_.dropout};
  register_transformer_params(ps, "fill", tc, rng);
  ps.add("fill.out.w", xavier_uniform<S>(width, cfg_.max_local_ids, rng));
  ps.add("fill.out.b", Tensor<S>::zeros({1, cfg_.max_local_ids}));
}

template <class S>
PreparedSet FillInModel<S>::prepare(const ClipSet& cs, const FeatureDims& dims,
                                    const Vocabulary& vocab) const {
  if (dims.d_face != cfg_.d_face || dims.d_vid != cfg_.d_vid)
    throw ConfigError("prepare: dataset feature dims do not match model config");
  PreparedSet out;
  out.movie_id = cs.movie_id;
  out.window_index = cs.window_index;
  for (const auto& clip : cs.clips) out.tokens.sentences.push_back(vocab.tokenize(clip.sentence));

  std::vector<ClusterSet> per_clip;
  per_clip.reserve(cs.clips.size());
  for (const auto& clip : cs.clips) per_clip.push_back(cluster_clip(clip, cfg_.clustering));

  for (const auto& blank : cs.blanks) {
    out.tokens.blanks.emplace_back(blank.sentence_index, blank.token_position);
    PreparedBlank pb;
    pb.clip_index = blank.sentence_index;
    pb.token_position = blank.token_position;
    const ClusterSet& clusters = per_clip[blank.sentence_index];
    const std::size_t f = clusters.clusters.size();
    if (f > 0) {
      pb.cluster_inputs = Tensor<float>({f, cfg_.d_face + cfg_.d_vid});
      pb.centers = Tensor<float>({f, cfg_.d_face});
      for (std::size_t i = 0; i < f; ++i) {
        const auto& c = clusters.clusters[i];
        for (std::size_t d = 0; d < cfg_.d_face; ++d) {
          pb.cluster_inputs.at(i, d) = c.center[d];
          pb.centers.at(i, d) = c.center[d];
        }
        if (!cfg_.ablation.no_video)
          for (std::size_t d = 0; d < cfg_.d_vid; ++d)
            pb.cluster_inputs.at(i, cfg_.d_face + d) = c.visual_context[d];
        pb.cluster_frames.push_back(c.member_frames);
      }
    }
    out.blanks.push_back(std::move(pb));
  }
  out.gt_ids = cs.gt_local_ids;
  out.gt_genders = cs.gt_genders;
  return out;
}

template <class S>
Value FillInModel<S>::id_embedding_rows(Graph<S>& g, ParameterStore<S>& ps,
                                        const std::vector<int>& prev_labels,
                                        std::size_t b) const {
  std::vector<std::size_t> rows(b);
  for (std::size_t i = 0; i < b; ++i) {
    const int prev = i == 0 ? 0 : prev_labels[i - 1];
    if (prev < 0 || static_cast<std::size_t>(prev) > cfg_.max_local_ids)
      throw IndexError("forward_set: previous label " + std::to_string(prev) + " out of range");
    rows[i] = static_cast<std::size_t>(prev);
  }
  return g.lookup_rows(g.param(ps, "fill.id_emb"), rows);
}

template <class S>
typename FillInModel<S>::Forward FillInModel<S>::forward_set(Graph<S>& g, ParameterStore<S>& ps,
                                                             const PreparedSet& set,
                                                             const std::vector<int>& prev_labels,
                                                             const ForwardOptions& fwd) const {
  const std::size_t b = set.blanks.size();
  if (b == 0) throw DataError("forward_set: set has no blanks");
  if (b > cfg_.max_blanks)
    throw LengthError("forward_set: " + std::to_string(b) + " blanks exceed max " +
                      std::to_string(cfg_.max_blanks));
  if (prev_labels.size() != b) throw DataError("forward_set: prev_labels length mismatch");

  auto enc = text_.encode_set(g, ps, set.tokens, fwd);

  Forward out;
  out.has_face.resize(b, 0);
  std::vector<Value> s_rows(b);
  std::vector<Value> chat_rows(b);

  for (std::size_t i = 0; i < b; ++i) {
    const PreparedBlank& pb = set.blanks[i];
    Value t_b = enc.blank_rows[i];
    Value chat;
    if (cfg_.ablation.no_face) {
      chat = g.input(Tensor<S>::zeros({1, cfg_.d_face}));
    } else if (pb.cluster_inputs.empty()) {
      chat = g.param(ps, "fill.noface");
    } else {
      const std::size_t f = pb.cluster_inputs.rows();
      // Attention input rows [c_f ; v_f ; t_b]: replicate t_b over F rows.
      Value cv = g.input(pb.cluster_inputs.template cast<S>());
      Value ones = g.input(Tensor<S>::full({f, 1}, S(1)));
      Value attn_in = g.concat_cols({cv, g.matmul(ones, t_b)});
      Value hidden = g.tanh(g.matmul(attn_in, g.param(ps, "fill.attn.w1")));
      Value scores = g.matmul(hidden, g.param(ps, "fill.attn.w2"));  // F x 1
      Value alpha = g.softmax_rows(g.reshape(scores, {std::size_t(1), f}));
      chat = g.matmul(alpha, g.input(pb.centers.template cast<S>()));
      out.attention.push_back(g.value(alpha));
      out.has_face[i] = 1;
    }
    if (!out.has_face[i]) out.attention.emplace_back();
    chat_rows[i] = chat;
    s_rows[i] = g.concat_cols({chat, t_b});
  }

  Value s_mat = g.concat_rows(s_rows);
  out.blank_features = s_mat;
  Value x = g.add(s_mat, id_embedding_rows(g, ps, prev_labels, b));
  x = g.add(x, g.input(sinusoidal_positions<S>(b, cfg_.model_width())));
  TransformerConfig tc{cfg_.layers, cfg_.model_width(), cfg_.heads, cfg_.ff, cfg_.dropout};
  Value mask = g.input(causal_mask<S>(b));
  x = transformer_stack(g, x, ps, "fill", tc, mask, fwd);
  out.id_logits = g.add(g.matmul(x, g.param(ps, "fill.out.w")), g.param(ps, "fill.out.b"));

  if (cfg_.ablation.no_face) {
    out.gender_logits = text_.gender_logits(g, ps, enc.blanks);
  } else {
    Value chat_mat = g.concat_rows(chat_rows);
    out.gender_logits =
        g.add(g.matmul(chat_mat, g.param(ps, "fill.gvis.w")), g.param(ps, "fill.gvis.b"));
  }
  return out;
}

template <class S>
Value FillInModel<S>::total_loss(Graph<S>& g, const Forward& f, const std::vector<int>& gt_ids,
                                 const std::vector<Gender>& gt_genders) const {
  const std::size_t b = f.has_face.size();
  if (gt_ids.size() != b || gt_genders.size() != b)
    throw DataError("total_loss: ground truth length mismatch");
  std::vector<std::size_t> id_targets(b);
  for (std::size_t i = 0; i < b; ++i) {
    if (gt_ids[i] < 1 || static_cast<std::size_t>(gt_ids[i]) > cfg_.max_local_ids)
      throw IndexError("total_loss: local ID " + std::to_string(gt_ids[i]) +
                       " outside [1, K=" + std::to_string(cfg_.max_local_ids) + "]");
    id_targets[i] = static_cast<std::size_t>(gt_ids[i]) - 1;
  }
  Value loss = g.cross_entropy_from_logits(f.id_logits, id_targets);
  if (cfg_.lambda_gender > 0.0 && !cfg_.ablation.no_gender_loss) {
    std::vector<std::size_t> gender_targets(b);
    for (std::size_t i = 0; i < b; ++i)
      gender_targets[i] = gt_genders[i] == Gender::male ? 0 : 1;
    // Blanks with no attended face have no visual representation to
    // supervise; under no_face the text head covers every blank.
    std::vector<std::uint8_t> mask(b, 1);
    if (!cfg_.ablation.no_face) mask = f.has_face;
    bool any = false;
    for (auto m : mask) any = any || m;
    if (any) {
      Value gender_loss = g.cross_entropy_from_logits(f.gender_logits, gender_targets, &mask);
      loss = g.add(loss, g.scale(gender_loss, static_cast<S>(cfg_.lambda_gender)));
    }
  }
  return loss;
}

namespace {

struct Hypothesis {
  std::vector<int> labels;
  double log_prob = 0.0;
};

template <class S>
std::vector<double> row_log_softmax_t(const Tensor<S>& logits, std::size_t row) {
  const std::size_t k = logits.cols();
  double mx = static_cast<double>(logits.at(row, 0));
  for (std::size_t j = 1; j < k; ++j) mx = std::max(mx, static_cast<double>(logits.at(row, j)));
  double sum = 0.0;
  for (std::size_t j = 0; j < k; ++j) sum += std::exp(static_cast<double>(logits.at(row, j)) - mx);
  const double lse = mx + std::log(sum);
  std::vector<double> out(k);
  for (std::size_t j = 0; j < k; ++j) out[j] = static_cast<double>(logits.at(row, j)) - lse;
  return out;
}

}  // namespace

template <class S>
typename FillInModel<S>::Decoded FillInModel<S>::decode(ParameterStore<S>& ps,
                                                        const PreparedSet& set,
                                                        const DecodeConfig& dc) const {
  const std::size_t b = set.blanks.size();
  Decoded out;
  if (b == 0) return out;

  const std::size_t width = dc.kind == DecodeKind::greedy ? 1 : dc.beam_width;
  std::vector<Hypothesis> beam = {Hypothesis{}};

  for (std::size_t pos = 0; pos < b; ++pos) {
    std::vector<Hypothesis> next;
    for (const auto& hyp : beam) {
      std::vector<int> prev = hyp.labels;
      prev.resize(b, 0);  // positions >= pos are ignored by causality
      Graph<S> g;
      auto fwd = forward_set(g, ps, set, prev);
      const auto log_probs = row_log_softmax_t<S>(g.value(fwd.id_logits), pos);
      int max_prev = 0;
      for (int l : hyp.labels) max_prev = std::max(max_prev, l);
      const int max_valid = std::min<int>(max_prev + 1, static_cast<int>(cfg_.max_local_ids));
      for (int label = 1; label <= max_valid; ++label) {
        Hypothesis h = hyp;
        h.labels.push_back(label);
        h.log_prob += log_probs[static_cast<std::size_t>(label - 1)];
        next.push_back(std::move(h));
      }
    }
    // Highest log-probability first; ties break toward the lexicographically
    // smallest label sequence, so beam(1) matches greedy argmax-lowest-ID.
    std::sort(next.begin(), next.end(), [](const Hypothesis& a, const Hypothesis& b) {
      if (a.log_prob != b.log_prob) return a.log_prob > b.log_prob;
      return a.labels < b.labels;
    });
    if (next.size() > width) next.resize(width);
    beam = std::move(next);
  }

  out.ids = beam.front().labels;

  // Attention and gender do not depend on the decoded labels; one final
  // forward pass reads them off.
  std::vector<int> prev = out.ids;
  Graph<S> g;
  auto fwd = forward_set(g, ps, set, prev);
  const Tensor<S>& glog = g.value(fwd.gender_logits);
  for (std::size_t i = 0; i < b; ++i) {
    out.genders.push_back(glog.at(i, 0) >= glog.at(i, 1) ? Gender::male : Gender::female);
    if (fwd.has_face[i]) {
      const Tensor<S>& alpha = fwd.attention[i];
      std::vector<double> a(alpha.size());
      std::size_t best = 0;
      for (std::size_t j = 0; j < alpha.size(); ++j) {
        a[j] = static_cast<double>(alpha[j]);
        if (a[j] > a[best]) best = j;
      }
      out.attention.push_back(std::move(a));
      out.chosen_frames.push_back(set.blanks[i].cluster_frames[best]);
    } else {
      out.attention.emplace_back();
      out.chosen_frames.emplace_back();
    }
  }
  return out;
}

template class FillInModel<float>;
template class FillInModel<double>;

}  // namespace fitb
