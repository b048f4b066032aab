#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fitb/tensor.hpp"

namespace fitb {

enum class Gender : std::uint8_t { male = 0, female = 1 };

const char* to_string(Gender g);
Gender gender_from_string(const std::string& s);

// Token used in sentence token sequences to mark a person blank.
inline constexpr const char* kBlankToken = "[BLANK]";

struct FaceObservation {
  std::size_t frame_index = 0;
  std::vector<float> embedding;  // dim D_face, L2-normalized by the producer
};

struct BlankSlot {
  std::size_t sentence_index = 0;  // clip index within the set
  std::size_t token_position = 0;  // index of the blank token in the sentence
  std::string gt_global_id;        // empty in pure-inference datasets
  std::optional<Gender> gt_gender;
};

struct Clip {
  std::size_t num_frames = 1;
  std::vector<std::string> sentence;  // tokens, >= 0 of them kBlankToken
  std::vector<FaceObservation> face_observations;
  Tensor<float> segment_features;  // T x D_vid
  // Blank metadata local to the clip; ClipSet flattens these.
  struct ClipBlank {
    std::size_t token_position = 0;
    std::string gt_global_id;
    std::optional<Gender> gt_gender;
  };
  std::vector<ClipBlank> blanks;
};

struct FeatureDims {
  std::size_t d_face = 32;
  std::size_t d_vid = 16;
  std::size_t t = 5;
};

struct ClipSet {
  std::string movie_id;
  std::size_t window_index = 0;
  std::vector<Clip> clips;         // 1..N consecutive clips
  std::vector<BlankSlot> blanks;   // ordered by (sentence_index, token_position)
  std::vector<int> gt_local_ids;   // first-occurrence canonical, empty without gt
  std::vector<Gender> gt_genders;  // aligned with blanks, empty without gt

  bool has_ground_truth() const { return !blanks.empty() && gt_local_ids.size() == blanks.size(); }
};

struct Movie {
  std::string movie_id;
  std::vector<Clip> clips;
};

enum class Split : std::uint8_t { train = 0, val = 1, test = 2 };

const char* to_string(Split s);
Split split_from_string(const std::string& s);

struct Dataset {
  Split split = Split::train;
  FeatureDims dims;
  std::size_t window_length = 5;  // N
  int format_version = 1;
  std::vector<Movie> movies;
  std::vector<ClipSet> sets;  // derived: non-overlapping windows over each movie
};

// Maps opaque global identifiers to 1-based local IDs in first-occurrence
// order: [Jane, John, Jane, Bill] -> [1, 2, 1, 3].
std::vector<int> relabel_local_ids(const std::vector<std::string>& global_ids);

// Window segmentation over one movie's clips. Non-overlapping mode yields
// ceil(M/N) consecutive windows, the last possibly short; overlapping mode
// yields max(M-N+1, 1) stride-1 windows. Every window's gt_local_ids are
// re-derived within the window.
std::vector<ClipSet> split_windows(const Movie& movie, std::size_t n, bool overlapping);

// Builds a ClipSet from a span of clips, flattening blanks in
// (sentence, token position) order and deriving canonical local IDs.
ClipSet make_clip_set(const std::string& movie_id, std::size_t window_index,
                      std::vector<Clip> clips);

struct Violation {
  std::string field;
  std::size_t index = 0;
  std::string message;
};

// Empty result iff all ClipSet/Clip invariants hold. Violations are data,
// not errors.
std::vector<Violation> validate_set(const ClipSet& cs, const FeatureDims& dims);

// Re-derives ds.sets from ds.movies (non-overlapping windows of ds.window_length).
void rebuild_sets(Dataset& ds);

// True iff the sequence is first-occurrence canonical (1,2,... by first use).
bool is_canonical_id_sequence(const std::vector<int>& ids);

}  // namespace fitb
