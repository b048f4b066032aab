#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fitb/cluster.hpp"
#include "fitb/corpus.hpp"
#include "fitb/train.hpp"

namespace fitb {

enum class BaselineKind {
  same_id,
  all_different,
  gt_gender_as_id,
  random_face_cluster,
  most_frequent_face_cluster
};

const char* to_string(BaselineKind k);
BaselineKind baseline_from_string(const std::string& s);

struct BaselinePolicy {
  BaselineKind kind = BaselineKind::same_id;
  std::uint64_t seed = 0;  // consulted by random_face_cluster only
  DbscanParams clustering;
};

// same_id / all_different / gt_gender_as_id.
std::vector<int> run_trivial(const BaselinePolicy& policy, const ClipSet& cs);

// random_face_cluster / most_frequent_face_cluster: set-scope clustering,
// per blank a cluster present in the blank's clip is chosen (uniformly at
// random, or the one with the most members in that clip; member-count ties
// break toward the lowest cluster index); chosen cluster indices are then
// relabeled first-occurrence. A blank in a clip without faces receives a
// fresh singleton ID.
std::vector<int> run_cluster_heuristic(const BaselinePolicy& policy, const ClipSet& cs);

std::vector<int> run_baseline(const BaselinePolicy& policy, const ClipSet& cs);

Predictions run_baseline_dataset(const BaselinePolicy& policy, const Dataset& ds);

}  // namespace fitb
