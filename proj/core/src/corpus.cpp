#include "fitb/corpus.hpp"

#include <algorithm>
#include <unordered_map>

#include "fitb/error.hpp"

namespace fitb {

const char* to_string(Gender g) { return g == Gender::male ? "male" : "female"; }

Gender gender_from_string(const std::string& s) {
  if (s == "male") return Gender::male;
  if (s == "female") return Gender::female;
  throw DataError("unknown gender: " + s);
}

const char* to_string(Split s) {
  switch (s) {
    case Split::train: return "train";
    case Split::val: return "val";
    default: return "test";
  }
}

Split split_from_string(const std::string& s) {
  if (s == "train") return Split::train;
  if (s == "val") return Split::val;
  if (s == "test") return Split::test;
  throw DataError("unknown split: " + s);
}

std::vector<int> relabel_local_ids(const std::vector<std::string>& global_ids) {
  std::vector<int> out;
  out.reserve(global_ids.size());
  std::unordered_map<std::string, int> seen;
  for (const auto& gid : global_ids) {
    auto [it, inserted] = seen.emplace(gid, static_cast<int>(seen.size()) + 1);
    out.push_back(it->second);
  }
  return out;
}

bool is_canonical_id_sequence(const std::vector<int>& ids) {
  int max_seen = 0;
  for (int id : ids) {
    if (id < 1 || id > max_seen + 1) return false;
    max_seen = std::max(max_seen, id);
  }
  return true;
}

ClipSet make_clip_set(const std::string& movie_id, std::size_t window_index,
                      std::vector<Clip> clips) {
  ClipSet cs;
  cs.movie_id = movie_id;
  cs.window_index = window_index;
  cs.clips = std::move(clips);
  std::vector<std::string> gids;
  bool any_gt = false, all_gt = true;
  for (std::size_t ci = 0; ci < cs.clips.size(); ++ci) {
    // Clip blanks are kept sorted by token position.
    auto blanks = cs.clips[ci].blanks;
    std::sort(blanks.begin(), blanks.end(),
              [](const auto& a, const auto& b) { return a.token_position < b.token_position; });
    for (const auto& cb : blanks) {
      BlankSlot slot;
      slot.sentence_index = ci;
      slot.token_position = cb.token_position;
      slot.gt_global_id = cb.gt_global_id;
      slot.gt_gender = cb.gt_gender;
      cs.blanks.push_back(slot);
      if (cb.gt_global_id.empty())
        all_gt = false;
      else
        any_gt = true;
      gids.push_back(cb.gt_global_id);
    }
  }
  if (any_gt && !all_gt)
    throw DataError("clip set " + movie_id + ": blanks mix labeled and unlabeled ground truth");
  if (any_gt) {
    cs.gt_local_ids = relabel_local_ids(gids);
    cs.gt_genders.reserve(cs.blanks.size());
    for (const auto& b : cs.blanks) {
      if (!b.gt_gender)
        throw DataError("clip set " + movie_id + ": blank with ID but no gender annotation");
      cs.gt_genders.push_back(*b.gt_gender);
    }
  }
  return cs;
}

std::vector<ClipSet> split_windows(const Movie& movie, std::size_t n, bool overlapping) {
  if (n < 1) throw ConfigError("split_windows: window length must be >= 1");
  if (movie.clips.empty()) throw DataError("split_windows: movie has no clips");
  const std::size_t m = movie.clips.size();
  std::vector<ClipSet> out;
  if (!overlapping) {
    for (std::size_t start = 0, w = 0; start < m; start += n, ++w) {
      const std::size_t end = std::min(start + n, m);
      out.push_back(make_clip_set(
          movie.movie_id, w,
          std::vector<Clip>(movie.clips.begin() + static_cast<std::ptrdiff_t>(start),
                            movie.clips.begin() + static_cast<std::ptrdiff_t>(end))));
    }
  } else {
    const std::size_t count = m >= n ? m - n + 1 : 1;
    for (std::size_t start = 0; start < count; ++start) {
      const std::size_t end = std::min(start + n, m);
      out.push_back(make_clip_set(
          movie.movie_id, start,
          std::vector<Clip>(movie.clips.begin() + static_cast<std::ptrdiff_t>(start),
                            movie.clips.begin() + static_cast<std::ptrdiff_t>(end))));
    }
  }
  return out;
}

void rebuild_sets(Dataset& ds) {
  ds.sets.clear();
  for (const auto& movie : ds.movies) {
    auto windows = split_windows(movie, ds.window_length, /*overlapping=*/false);
    for (auto& w : windows) ds.sets.push_back(std::move(w));
  }
}

namespace {
void check_clip(const Clip& clip, std::size_t ci, const FeatureDims& dims,
                std::vector<Violation>& out) {
  if (clip.num_frames == 0)
    out.push_back({"clips.num_frames", ci, "num_frames must be positive"});
  for (std::size_t fi = 0; fi < clip.face_observations.size(); ++fi) {
    const auto& f = clip.face_observations[fi];
    if (f.frame_index >= clip.num_frames)
      out.push_back({"clips.face_observations.frame_index", fi,
                     "frame index " + std::to_string(f.frame_index) + " >= num_frames in clip " +
                         std::to_string(ci)});
    if (f.embedding.size() != dims.d_face)
      out.push_back({"clips.face_observations.embedding", fi,
                     "face embedding dim mismatch in clip " + std::to_string(ci)});
  }
  if (clip.segment_features.rows() != dims.t || clip.segment_features.cols() != dims.d_vid)
    out.push_back({"clips.segment_features", ci,
                   "expected " + std::to_string(dims.t) + "x" + std::to_string(dims.d_vid) +
                       ", got " + clip.segment_features.shape_str()});
}
}  // namespace

std::vector<Violation> validate_set(const ClipSet& cs, const FeatureDims& dims) {
  std::vector<Violation> out;
  if (cs.clips.empty()) out.push_back({"clips", 0, "clip set has no clips"});
  for (std::size_t ci = 0; ci < cs.clips.size(); ++ci) check_clip(cs.clips[ci], ci, dims, out);

  for (std::size_t bi = 0; bi < cs.blanks.size(); ++bi) {
    const auto& b = cs.blanks[bi];
    if (b.sentence_index >= cs.clips.size()) {
      out.push_back({"blanks.sentence_index", bi, "sentence index out of range"});
      continue;
    }
    const auto& sentence = cs.clips[b.sentence_index].sentence;
    if (b.token_position >= sentence.size())
      out.push_back({"blanks.token_position", bi, "token position beyond sentence length"});
    else if (sentence[b.token_position] != kBlankToken)
      out.push_back({"blanks.token_position", bi,
                     "token at position " + std::to_string(b.token_position) + " is not " +
                         kBlankToken});
    if (bi > 0) {
      const auto& prev = cs.blanks[bi - 1];
      if (std::pair(prev.sentence_index, prev.token_position) >=
          std::pair(b.sentence_index, b.token_position))
        out.push_back({"blanks", bi, "blanks not ordered by (sentence, token position)"});
    }
  }

  if (!cs.gt_local_ids.empty()) {
    if (cs.gt_local_ids.size() != cs.blanks.size())
      out.push_back({"gt_local_ids", 0, "length does not match blank count"});
    if (!is_canonical_id_sequence(cs.gt_local_ids))
      out.push_back({"gt_local_ids", 0, "not first-occurrence canonical"});
    // Local IDs must be consistent with global IDs when both are present.
    if (cs.gt_local_ids.size() == cs.blanks.size() && !cs.blanks.empty() &&
        !cs.blanks[0].gt_global_id.empty()) {
      std::vector<std::string> gids;
      for (const auto& b : cs.blanks) gids.push_back(b.gt_global_id);
      if (relabel_local_ids(gids) != cs.gt_local_ids)
        out.push_back({"gt_local_ids", 0, "inconsistent with global IDs"});
    }
  }
  if (!cs.gt_genders.empty() && cs.gt_genders.size() != cs.blanks.size())
    out.push_back({"gt_genders", 0, "length does not match blank count"});
  return out;
}

}  // namespace fitb
