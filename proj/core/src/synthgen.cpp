#include "fitb/synthgen.hpp"

#include <algorithm>
#include <cmath>

#include "fitb/error.hpp"

namespace fitb {

namespace {

const std::vector<std::string> kActionVerbs = {"walks", "runs",   "sits",  "waves",
                                               "climbs", "dances", "reads", "writes"};
const std::vector<std::string> kGenericVerbs = {"pauses", "waits", "appears", "lingers"};
const std::vector<std::string> kPlaces = {"room", "hall", "street", "kitchen", "garden", "office"};
const std::vector<std::vector<std::string>> kMaleCues = {{"and", "he", "smiles"},
                                                         {"as", "he", "frowns"}};
const std::vector<std::vector<std::string>> kFemaleCues = {{"and", "she", "smiles"},
                                                           {"as", "she", "frowns"}};

void normalize_unit(std::vector<float>& v) {
  double s = 0.0;
  for (float x : v) s += static_cast<double>(x) * x;
  s = std::sqrt(s);
  if (s == 0.0) {
    v[0] = 1.0f;
    return;
  }
  for (float& x : v) x = static_cast<float>(x / s);
}

std::vector<float> gauss_vec(std::size_t d, Rng& rng) {
  std::vector<float> v(d);
  for (auto& x : v) x = static_cast<float>(rng.normal());
  return v;
}

// Serves per-rank blank quotas: tracks how far each local-ID rank lags its
// target share and plans each window's rank multiset to serve the largest
// deficits, subject to the canonical-support constraint ({1..m} for some m).
class RankPlanner {
 public:
  explicit RankPlanner(const std::vector<double>& prior) : prior_(prior), served_(prior.size(), 0) {}

  // Returns a canonically ordered rank sequence of length b (max_m caps the
  // number of distinct ranks, e.g. by roster size).
  std::vector<int> plan(std::size_t b, std::size_t max_m, Rng& rng) {
    const std::size_t ranks = prior_.size();
    const std::size_t m_cap = std::min({b, ranks, max_m});
    std::vector<double> deficit(ranks);
    for (std::size_t k = 0; k < ranks; ++k)
      deficit[k] = prior_[k] * static_cast<double>(total_ + b) - static_cast<double>(served_[k]);

    // Pick the distinct-rank count m and per-rank counts greedily by
    // marginal deficit; a small jitter keeps ties from being stereotyped.
    std::vector<std::size_t> best_alloc;
    double best_value = -1e18;
    for (std::size_t m = 1; m <= m_cap; ++m) {
      std::vector<std::size_t> alloc(ranks, 0);
      double value = 0.0;
      for (std::size_t k = 0; k < m; ++k) {
        alloc[k] = 1;
        value += deficit[k];
      }
      for (std::size_t extra = m; extra < b; ++extra) {
        std::size_t pick = 0;
        double pick_value = -1e18;
        for (std::size_t k = 0; k < m; ++k) {
          const double v = deficit[k] - static_cast<double>(alloc[k]) + 1.0;
          if (v > pick_value) {
            pick_value = v;
            pick = k;
          }
        }
        alloc[pick] += 1;
        value += pick_value;
      }
      value += rng.uniform(0.0, 0.25);
      if (value > best_value) {
        best_value = value;
        best_alloc = alloc;
      }
    }

    std::size_t m = 0;
    for (std::size_t k = 0; k < ranks; ++k)
      if (best_alloc[k] > 0) m = k + 1;
    for (std::size_t k = 0; k < ranks; ++k) served_[k] += best_alloc[k];
    total_ += b;

    // Lay the counts out in canonical order: the first occurrences of
    // 1..m appear in order; repeats are interleaved at random positions.
    std::vector<int> seq;
    std::vector<std::size_t> remaining = best_alloc;
    std::size_t introduced = 0;
    for (std::size_t pos = 0; pos < b; ++pos) {
      const std::size_t slots_left = b - pos;
      const std::size_t not_introduced = m - introduced;
      std::vector<int> candidates;
      if (not_introduced < slots_left) {
        // Slack exists, so repeating an introduced rank stays feasible.
        for (std::size_t k = 0; k < introduced; ++k)
          if (remaining[k] > 0) candidates.push_back(static_cast<int>(k + 1));
      }
      if (introduced < m) candidates.push_back(static_cast<int>(introduced + 1));
      const int rank = candidates[rng.randint(static_cast<std::uint64_t>(candidates.size()))];
      seq.push_back(rank);
      remaining[static_cast<std::size_t>(rank - 1)] -= 1;
      if (static_cast<std::size_t>(rank) == introduced + 1) ++introduced;
    }
    return seq;
  }

 private:
  std::vector<double> prior_;
  std::vector<std::size_t> served_;
  std::size_t total_ = 0;
};

std::string fmt_id(std::size_t movie, std::size_t character) {
  return "m" + std::to_string(movie) + "_c" + std::to_string(character);
}

}  // namespace

void WorldConfig::validate() const {
  if (n_movies == 0 || clips_per_movie == 0) throw ConfigError("world: need movies and clips");
  if (window_length == 0) throw ConfigError("world: window_length must be >= 1");
  if (d_face == 0 || d_vid == 0 || t_segments == 0 || num_frames == 0)
    throw ConfigError("world: dims must be positive");
  if (characters_min < 1 || characters_max < characters_min)
    throw ConfigError("world: characters_per_movie range must be nonempty and >= 1");
  if (gender_cue_prob < 0.0 || gender_cue_prob > 1.0)
    throw ConfigError("world: gender_cue_prob outside [0,1]");
  if (action_slot_prob < 0.0 || action_slot_prob > 1.0)
    throw ConfigError("world: action_slot_prob outside [0,1]");
  if (face_noise_sigma < 0.0 || segment_noise_sigma < 0.0 || distractor_face_rate < 0.0)
    throw ConfigError("world: noise rates must be nonnegative");
  if (n_action_types == 0 || n_action_types > kActionVerbs.size())
    throw ConfigError("world: n_action_types must be in [1, " +
                      std::to_string(kActionVerbs.size()) + "]");
  if (id_prior.empty()) throw ConfigError("world: id_prior empty");
  double sum = 0.0;
  for (double p : id_prior) {
    if (p < 0.0 || p > 1.0) throw ConfigError("world: id_prior entries outside [0,1]");
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-9) throw ConfigError("world: id_prior must sum to 1");
  if (blanks_per_clip_probs.empty()) throw ConfigError("world: blanks_per_clip_probs empty");
  if (faces_per_character_min < 1 || faces_per_character_max < faces_per_character_min)
    throw ConfigError("world: faces_per_character range invalid");
}

std::vector<std::vector<float>> action_prototypes(std::size_t n_actions, std::size_t d_vid) {
  // World-fixed basis (independent of the dataset seed), playing the role
  // of a frozen pretrained feature extractor.
  Rng rng(split_seed(0xF17Bu, "action-prototypes"));
  std::vector<std::vector<float>> protos(n_actions);
  for (auto& p : protos) {
    p = gauss_vec(d_vid, rng);
    normalize_unit(p);
  }
  return protos;
}

std::vector<std::vector<float>> sample_faces(const CharacterProfile& profile, std::size_t count,
                                             double sigma, Rng& rng) {
  if (count < 1) throw ConfigError("sample_faces: count must be >= 1");
  if (sigma < 0.0) throw ConfigError("sample_faces: sigma must be >= 0");
  std::vector<std::vector<float>> out(count);
  for (auto& f : out) {
    f = profile.identity_embedding;
    if (sigma > 0.0)
      for (auto& x : f) x += static_cast<float>(rng.normal(0.0, sigma));
    normalize_unit(f);
  }
  return out;
}

std::vector<std::string> render_sentence(const std::vector<SentenceBlank>& blanks,
                                         double gender_cue_prob, Rng& rng) {
  std::vector<std::string> tokens;
  if (blanks.empty()) {
    tokens = {"the", kPlaces[rng.randint(kPlaces.size())], "is", "quiet", "."};
    return tokens;
  }
  for (std::size_t i = 0; i < blanks.size(); ++i) {
    const auto& b = blanks[i];
    if (i > 0) tokens.push_back("while");
    tokens.push_back(kBlankToken);
    if (b.with_action)
      tokens.push_back(kActionVerbs[b.action_index % kActionVerbs.size()]);
    else
      tokens.push_back(kGenericVerbs[rng.randint(kGenericVerbs.size())]);
    tokens.push_back("in");
    tokens.push_back("the");
    tokens.push_back(kPlaces[rng.randint(kPlaces.size())]);
    if (rng.bernoulli(gender_cue_prob)) {
      const auto& cues = b.gender == Gender::male ? kMaleCues : kFemaleCues;
      const auto& cue = cues[rng.randint(cues.size())];
      tokens.insert(tokens.end(), cue.begin(), cue.end());
    }
  }
  tokens.push_back(".");
  return tokens;
}

Dataset generate_dataset(const WorldConfig& cfg) {
  cfg.validate();
  Dataset ds;
  ds.split = cfg.split;
  ds.dims = {cfg.d_face, cfg.d_vid, cfg.t_segments};
  ds.window_length = cfg.window_length;

  const auto protos = action_prototypes(cfg.n_action_types, cfg.d_vid);
  RankPlanner planner(cfg.id_prior);

  for (std::size_t mi = 0; mi < cfg.n_movies; ++mi) {
    Rng rng(split_seed(cfg.seed, "movie", mi));
    Movie movie;
    movie.movie_id = "m" + std::to_string(mi);

    // Roster.
    const std::size_t roster =
        static_cast<std::size_t>(rng.randint(static_cast<std::int64_t>(cfg.characters_min),
                                             static_cast<std::int64_t>(cfg.characters_max)));
    std::vector<CharacterProfile> chars(roster);
    for (auto& c : chars) {
      c.identity_embedding = gauss_vec(cfg.d_face, rng);
      c.gender = rng.bernoulli(0.5) ? Gender::female : Gender::male;
      // Bake a world-fixed gender direction into coordinate 0 so that a
      // linear probe generalizes to unseen characters, as a real face
      // embedding would.
      c.identity_embedding[0] = static_cast<float>(
          (c.gender == Gender::male ? 1.0 : -1.0) * cfg.gender_axis_strength);
      normalize_unit(c.identity_embedding);
      c.action_index = rng.randint(cfg.n_action_types);
      c.action_embedding = protos[c.action_index];
    }

    // Windows are generated independently and concatenated; the dataset's
    // non-overlapping segmentation recovers exactly these windows.
    for (std::size_t start = 0; start < cfg.clips_per_movie; start += cfg.window_length) {
      const std::size_t len = std::min(cfg.window_length, cfg.clips_per_movie - start);

      std::vector<std::size_t> blanks_per_clip(len);
      std::size_t b_total = 0;
      for (auto& c : blanks_per_clip) {
        c = rng.categorical(cfg.blanks_per_clip_probs);
        b_total += c;
      }
      if (b_total == 0) {
        blanks_per_clip[rng.randint(len)] = 1;
        b_total = 1;
      }

      const std::vector<int> rank_seq = planner.plan(b_total, roster, rng);
      int m = 0;
      for (int r : rank_seq) m = std::max(m, r);
      const auto cast = rng.sample_without_replacement(roster, static_cast<std::size_t>(m));

      std::size_t next_blank = 0;
      for (std::size_t ci = 0; ci < len; ++ci) {
        Clip clip;
        clip.num_frames = cfg.num_frames;

        // Blanks of this clip and their characters.
        std::vector<std::size_t> blank_chars;
        std::vector<SentenceBlank> sentence_blanks;
        for (std::size_t k = 0; k < blanks_per_clip[ci]; ++k) {
          const std::size_t char_idx = cast[static_cast<std::size_t>(rank_seq[next_blank++] - 1)];
          blank_chars.push_back(char_idx);
          SentenceBlank sb;
          sb.gender = chars[char_idx].gender;
          sb.action_index = chars[char_idx].action_index;
          sb.with_action = rng.bernoulli(cfg.action_slot_prob);
          sentence_blanks.push_back(sb);
        }

        // Active characters: the blanks' characters, possibly one extra.
        std::vector<std::size_t> active = blank_chars;
        std::sort(active.begin(), active.end());
        active.erase(std::unique(active.begin(), active.end()), active.end());
        if (active.empty()) active.push_back(rng.randint(roster));
        if (active.size() < 3 && roster > active.size() && rng.bernoulli(cfg.extra_character_prob)) {
          std::size_t extra = rng.randint(roster);
          while (std::find(active.begin(), active.end(), extra) != active.end())
            extra = rng.randint(roster);
          active.push_back(extra);
        }

        // Each active character acts in its own temporal segment.
        auto segments = rng.sample_without_replacement(cfg.t_segments,
                                                       std::min(active.size(), cfg.t_segments));
        clip.segment_features = Tensor<float>({cfg.t_segments, cfg.d_vid});
        for (std::size_t t = 0; t < cfg.t_segments; ++t)
          for (std::size_t d = 0; d < cfg.d_vid; ++d)
            clip.segment_features.at(t, d) =
                static_cast<float>(rng.normal(0.0, cfg.segment_noise_sigma));
        for (std::size_t ai = 0; ai < active.size() && ai < segments.size(); ++ai) {
          const auto& ch = chars[active[ai]];
          for (std::size_t d = 0; d < cfg.d_vid; ++d)
            clip.segment_features.at(segments[ai], d) += ch.action_embedding[d];
        }

        // Face observations inside each character's segment frame band.
        const std::size_t band = std::max<std::size_t>(1, cfg.num_frames / cfg.t_segments);
        for (std::size_t ai = 0; ai < active.size(); ++ai) {
          const auto& ch = chars[active[ai]];
          const std::size_t seg = ai < segments.size() ? segments[ai] : rng.randint(cfg.t_segments);
          const std::size_t count = static_cast<std::size_t>(
              rng.randint(static_cast<std::int64_t>(cfg.faces_per_character_min),
                          static_cast<std::int64_t>(cfg.faces_per_character_max)));
          auto embeddings = sample_faces(ch, count, cfg.face_noise_sigma, rng);
          for (auto& e : embeddings) {
            FaceObservation obs;
            obs.frame_index = std::min(cfg.num_frames - 1, seg * band + rng.randint(band));
            obs.embedding = std::move(e);
            clip.face_observations.push_back(std::move(obs));
          }
        }

        // Distractors: faces of one-off identities.
        double rate = cfg.distractor_face_rate;
        std::size_t distractors = static_cast<std::size_t>(rate);
        if (rng.bernoulli(rate - std::floor(rate))) ++distractors;
        for (std::size_t k = 0; k < distractors; ++k) {
          CharacterProfile stranger;
          stranger.identity_embedding = gauss_vec(cfg.d_face, rng);
          stranger.gender = rng.bernoulli(0.5) ? Gender::female : Gender::male;
          stranger.identity_embedding[0] = static_cast<float>(
              (stranger.gender == Gender::male ? 1.0 : -1.0) * cfg.gender_axis_strength);
          normalize_unit(stranger.identity_embedding);
          FaceObservation obs;
          obs.frame_index = rng.randint(cfg.num_frames);
          obs.embedding = sample_faces(stranger, 1, cfg.face_noise_sigma, rng)[0];
          clip.face_observations.push_back(std::move(obs));
        }

        clip.sentence = render_sentence(sentence_blanks, cfg.gender_cue_prob, rng);
        std::size_t blank_no = 0;
        for (std::size_t tp = 0; tp < clip.sentence.size(); ++tp) {
          if (clip.sentence[tp] != kBlankToken) continue;
          Clip::ClipBlank cb;
          cb.token_position = tp;
          cb.gt_global_id = fmt_id(mi, blank_chars[blank_no]);
          cb.gt_gender = chars[blank_chars[blank_no]].gender;
          clip.blanks.push_back(cb);
          ++blank_no;
        }
        movie.clips.push_back(std::move(clip));
      }
    }
    ds.movies.push_back(std::move(movie));
  }

  rebuild_sets(ds);
  return ds;
}

}  // namespace fitb
