#pragma once

#include <vector>

#include "fitb/corpus.hpp"
#include "fitb/tensor.hpp"

namespace fitb {

inline constexpr int kNoiseLabel = -1;

struct DbscanParams {
  double eps = 0.2;
  std::size_t min_pts = 3;
};

// Classic DBSCAN under Euclidean distance. Neighborhoods include the point
// itself. Core points have >= min_pts neighbors within eps; clusters are
// the density-connected components of core points; a non-core point within
// eps of a core point joins its nearest core's cluster; everything else is
// noise (kNoiseLabel). Cluster labels are numbered by the first core point
// of each cluster in input order, so the labeling is deterministic and the
// partition is permutation-invariant.
std::vector<int> dbscan(const std::vector<std::vector<float>>& points, double eps,
                        std::size_t min_pts);

struct FaceCluster {
  std::vector<float> center;              // mean of member embeddings
  std::vector<std::size_t> member_frames;  // sorted frame indices
  std::vector<std::size_t> member_obs;     // indices into the source observations
  double relative_position = 0.0;          // r in [0, 1)
  std::size_t aligned_segment = 0;         // t = floor(r * T)
  std::vector<float> visual_context;       // v_f, the aligned segment feature
};

enum class ClusterScope { clip, set };

struct ClusterSet {
  std::vector<FaceCluster> clusters;
  ClusterScope source_scope = ClusterScope::clip;
};

// Clusters one clip's face observations. With promote_noise (the default)
// every noise point becomes a singleton cluster appended after the dense
// clusters in input order, so the clusters always partition the input.
ClusterSet build_clusters(const Clip& clip, const DbscanParams& params, bool promote_noise = true);

// floor(r * T); r must lie in [0, 1).
std::size_t align_segment(double r, std::size_t t_segments);

// Fills relative_position (median member frame / num_frames),
// aligned_segment, and visual_context from the clip's segment features.
void attach_visual_context(ClusterSet& cs, const Tensor<float>& segment_features,
                           std::size_t num_frames);

// Convenience: build_clusters + attach_visual_context.
ClusterSet cluster_clip(const Clip& clip, const DbscanParams& params, bool promote_noise = true);

// Set-scope clustering for the heuristic baselines: all faces of all clips
// pooled before DBSCAN. Returns labels per (clip, observation) pair.
struct PooledFace {
  std::size_t clip_index = 0;
  std::size_t obs_index = 0;
};
std::vector<int> cluster_set_pooled(const std::vector<Clip>& clips, const DbscanParams& params,
                                    std::vector<PooledFace>* layout = nullptr);

}  // namespace fitb
