#include "fitb/baselines.hpp"

#include <algorithm>
#include <map>

#include "fitb/error.hpp"
#include "fitb/rng.hpp"

namespace fitb {

const char* to_string(BaselineKind k) {
  switch (k) {
    case BaselineKind::same_id: return "same_id";
    case BaselineKind::all_different: return "all_different";
    case BaselineKind::gt_gender_as_id: return "gt_gender_as_id";
    case BaselineKind::random_face_cluster: return "random_face_cluster";
    default: return "most_frequent_face_cluster";
  }
}

BaselineKind baseline_from_string(const std::string& s) {
  if (s == "same_id") return BaselineKind::same_id;
  if (s == "all_different") return BaselineKind::all_different;
  if (s == "gt_gender_as_id") return BaselineKind::gt_gender_as_id;
  if (s == "random_face_cluster") return BaselineKind::random_face_cluster;
  if (s == "most_frequent_face_cluster") return BaselineKind::most_frequent_face_cluster;
  throw ConfigError("unknown baseline: " + s);
}

namespace {

std::vector<int> relabel_ints(const std::vector<int>& raw) {
  std::vector<int> out;
  out.reserve(raw.size());
  std::map<int, int> seen;
  for (int v : raw) {
    auto [it, inserted] = seen.emplace(v, static_cast<int>(seen.size()) + 1);
    out.push_back(it->second);
  }
  return out;
}

}  // namespace

std::vector<int> run_trivial(const BaselinePolicy& policy, const ClipSet& cs) {
  const std::size_t b = cs.blanks.size();
  std::vector<int> out(b);
  switch (policy.kind) {
    case BaselineKind::same_id:
      std::fill(out.begin(), out.end(), 1);
      return out;
    case BaselineKind::all_different:
      for (std::size_t i = 0; i < b; ++i) out[i] = static_cast<int>(i) + 1;
      return out;
    case BaselineKind::gt_gender_as_id: {
      if (cs.gt_genders.size() != b)
        throw DataError("gt_gender_as_id: set " + cs.movie_id + " lacks gender labels");
      std::vector<int> raw(b);
      for (std::size_t i = 0; i < b; ++i) raw[i] = cs.gt_genders[i] == Gender::male ? 0 : 1;
      return relabel_ints(raw);
    }
    default:
      throw ConfigError("run_trivial: not a trivial policy");
  }
}

std::vector<int> run_cluster_heuristic(const BaselinePolicy& policy, const ClipSet& cs) {
  if (policy.kind != BaselineKind::random_face_cluster &&
      policy.kind != BaselineKind::most_frequent_face_cluster)
    throw ConfigError("run_cluster_heuristic: not a clustering policy");

  std::vector<PooledFace> layout;
  const std::vector<int> labels = cluster_set_pooled(cs.clips, policy.clustering, &layout);

  // Member count of each set-level cluster within each clip.
  std::map<std::pair<std::size_t, int>, std::size_t> per_clip_count;
  int n_clusters = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    ++per_clip_count[{layout[i].clip_index, labels[i]}];
    n_clusters = std::max(n_clusters, labels[i] + 1);
  }

  Rng rng(split_seed(split_seed(policy.seed, "baseline"), cs.movie_id, cs.window_index));
  int fresh = n_clusters;
  std::vector<int> raw;
  raw.reserve(cs.blanks.size());
  for (const auto& blank : cs.blanks) {
    std::vector<int> candidates;
    for (int c = 0; c < n_clusters; ++c)
      if (per_clip_count.count({blank.sentence_index, c})) candidates.push_back(c);
    if (candidates.empty()) {
      raw.push_back(fresh++);  // clip without faces: fresh singleton
      continue;
    }
    if (policy.kind == BaselineKind::random_face_cluster) {
      raw.push_back(candidates[rng.randint(candidates.size())]);
    } else {
      int best = candidates[0];
      std::size_t best_count = per_clip_count[{blank.sentence_index, best}];
      for (int c : candidates) {
        const std::size_t count = per_clip_count[{blank.sentence_index, c}];
        if (count > best_count) {  // ties keep the lowest cluster index
          best = c;
          best_count = count;
        }
      }
      raw.push_back(best);
    }
  }
  return relabel_ints(raw);
}

std::vector<int> run_baseline(const BaselinePolicy& policy, const ClipSet& cs) {
  switch (policy.kind) {
    case BaselineKind::same_id:
    case BaselineKind::all_different:
    case BaselineKind::gt_gender_as_id:
      return run_trivial(policy, cs);
    default:
      return run_cluster_heuristic(policy, cs);
  }
}

Predictions run_baseline_dataset(const BaselinePolicy& policy, const Dataset& ds) {
  Predictions preds;
  for (const auto& cs : ds.sets) {
    SetPrediction p;
    p.movie_id = cs.movie_id;
    p.window_index = cs.window_index;
    p.ids = run_baseline(policy, cs);
    if (!p.ids.empty()) p.filled_sentences = fill_sentences(cs, p.ids);
    preds.push_back(std::move(p));
  }
  return preds;
}

}  // namespace fitb
