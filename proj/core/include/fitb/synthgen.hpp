#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fitb/corpus.hpp"
#include "fitb/rng.hpp"

namespace fitb {

// Synthetic world generator configuration. Embedding dims default to desk
// scale (32/16); the paper-scale sizes (512-dim faces, I3D-sized segments)
// remain configurable.
struct WorldConfig {
  std::size_t n_movies = 100;
  std::size_t clips_per_movie = 8;
  std::size_t window_length = 5;  // N, clips per set
  std::size_t d_face = 32;
  std::size_t d_vid = 16;
  std::size_t t_segments = 5;  // T
  std::size_t num_frames = 50;

  double face_noise_sigma = 0.05;
  double gender_cue_prob = 1.0;
  double distractor_face_rate = 0.1;  // expected distractor faces per clip
  std::size_t characters_min = 4;
  std::size_t characters_max = 8;
  // Target distribution of blanks over local-ID ranks.
  std::vector<double> id_prior = {0.52, 0.31, 0.12, 0.04, 0.01};
  std::uint64_t seed = 0;
  Split split = Split::train;

  // World texture knobs.
  double gender_axis_strength = 1.0;  // gender component baked into face embeddings
  std::size_t n_action_types = 4;
  double action_slot_prob = 0.5;  // chance a blank's sentence names its action word
  std::vector<double> blanks_per_clip_probs = {0.15, 0.60, 0.25};  // P(0), P(1), P(2), ...
  std::size_t faces_per_character_min = 3;
  std::size_t faces_per_character_max = 5;
  double segment_noise_sigma = 0.1;
  double extra_character_prob = 0.3;

  void validate() const;  // throws ConfigError
};

struct CharacterProfile {
  std::vector<float> identity_embedding;  // unit L2 norm
  Gender gender = Gender::male;
  std::vector<float> action_embedding;
  std::size_t action_index = 0;
};

// Deterministic given (cfg, cfg.seed). Per clip, 1..3 active characters
// each emit several noisy unit-normalized face observations; segment
// features carry each character's action prototype at its active segment;
// sentences are rendered from templates with optional gender cues. The
// realized local-ID histogram tracks cfg.id_prior via a deficit-driven
// rank planner.
Dataset generate_dataset(const WorldConfig& cfg);

// `count` noisy unit-normalized copies of the profile's identity embedding.
std::vector<std::vector<float>> sample_faces(const CharacterProfile& profile, std::size_t count,
                                             double sigma, Rng& rng);

struct SentenceBlank {
  Gender gender = Gender::male;
  std::size_t action_index = 0;
  bool with_action = false;  // whether the action word appears
};

// Template sentence over the closed vocabulary; one fragment per blank.
// With probability gender_cue_prob per blank a gendered token (he/she/
// his/her) coreferent with that blank is appended to its fragment.
std::vector<std::string> render_sentence(const std::vector<SentenceBlank>& blanks,
                                         double gender_cue_prob, Rng& rng);

// Fixed action prototype directions shared by every dataset (the stand-in
// for a pretrained video feature extractor; independent of cfg.seed).
std::vector<std::vector<float>> action_prototypes(std::size_t n_actions, std::size_t d_vid);

}  // namespace fitb
