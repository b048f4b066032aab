#include "fitb/cluster.hpp"

#include <algorithm>
#include <cmath>
#include <queue>

#include "fitb/error.hpp"

namespace fitb {

namespace {

double dist2(const std::vector<float>& a, const std::vector<float>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = static_cast<double>(a[i]) - static_cast<double>(b[i]);
    s += d * d;
  }
  return s;
}

}  // namespace

std::vector<int> dbscan(const std::vector<std::vector<float>>& points, double eps,
                        std::size_t min_pts) {
  if (eps <= 0.0) throw ConfigError("dbscan: eps must be positive");
  if (min_pts < 1) throw ConfigError("dbscan: min_pts must be >= 1");
  const std::size_t n = points.size();
  std::vector<int> labels(n, kNoiseLabel);
  if (n == 0) return labels;

  const double eps2 = eps * eps;
  std::vector<std::vector<std::size_t>> neighbors(n);
  for (std::size_t i = 0; i < n; ++i) {
    neighbors[i].push_back(i);
    for (std::size_t j = i + 1; j < n; ++j) {
      if (dist2(points[i], points[j]) <= eps2) {
        neighbors[i].push_back(j);
        neighbors[j].push_back(i);
      }
    }
  }
  std::vector<std::uint8_t> core(n, 0);
  for (std::size_t i = 0; i < n; ++i) core[i] = neighbors[i].size() >= min_pts;

  // Density-connected components over core points, labeled by first core
  // point in input order.
  int next = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!core[i] || labels[i] != kNoiseLabel) continue;
    const int label = next++;
    std::queue<std::size_t> frontier;
    labels[i] = label;
    frontier.push(i);
    while (!frontier.empty()) {
      const std::size_t p = frontier.front();
      frontier.pop();
      for (std::size_t q : neighbors[p]) {
        if (!core[q] || labels[q] != kNoiseLabel) continue;
        labels[q] = label;
        frontier.push(q);
      }
    }
  }

  // Border points: non-core within eps of some core; join the nearest
  // core's cluster (input-order-independent tie handling for exact ties).
  for (std::size_t i = 0; i < n; ++i) {
    if (core[i]) continue;
    double best = 0.0;
    int best_label = kNoiseLabel;
    for (std::size_t q : neighbors[i]) {
      if (!core[q]) continue;
      const double d = dist2(points[i], points[q]);
      if (best_label == kNoiseLabel || d < best ||
          (d == best && labels[q] < best_label)) {
        best = d;
        best_label = labels[q];
      }
    }
    labels[i] = best_label;
  }
  return labels;
}

ClusterSet build_clusters(const Clip& clip, const DbscanParams& params, bool promote_noise) {
  std::vector<std::vector<float>> points;
  points.reserve(clip.face_observations.size());
  for (const auto& f : clip.face_observations) points.push_back(f.embedding);
  const std::vector<int> labels = dbscan(points, params.eps, params.min_pts);

  ClusterSet out;
  out.source_scope = ClusterScope::clip;
  int max_label = -1;
  for (int l : labels) max_label = std::max(max_label, l);
  out.clusters.resize(static_cast<std::size_t>(max_label + 1));
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] == kNoiseLabel) continue;
    out.clusters[static_cast<std::size_t>(labels[i])].member_obs.push_back(i);
  }
  if (promote_noise) {
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (labels[i] != kNoiseLabel) continue;
      FaceCluster c;
      c.member_obs.push_back(i);
      out.clusters.push_back(std::move(c));
    }
  }

  const std::size_t d = clip.face_observations.empty() ? 0 : clip.face_observations[0].embedding.size();
  for (auto& c : out.clusters) {
    for (std::size_t oi : c.member_obs)
      c.member_frames.push_back(clip.face_observations[oi].frame_index);
    std::sort(c.member_frames.begin(), c.member_frames.end());
    c.center.assign(d, 0.0f);
    for (std::size_t k = 0; k < d; ++k) {
      double s = 0.0;
      for (std::size_t oi : c.member_obs) s += clip.face_observations[oi].embedding[k];
      c.center[k] = static_cast<float>(s / static_cast<double>(c.member_obs.size()));
    }
  }
  return out;
}

std::size_t align_segment(double r, std::size_t t_segments) {
  if (t_segments == 0) throw ConfigError("align_segment: T must be positive");
  if (!(r >= 0.0 && r < 1.0))
    throw IndexError("align_segment: relative position " + std::to_string(r) +
                     " outside [0, 1)");
  auto t = static_cast<std::size_t>(std::floor(r * static_cast<double>(t_segments)));
  return std::min(t, t_segments - 1);
}

void attach_visual_context(ClusterSet& cs, const Tensor<float>& segment_features,
                           std::size_t num_frames) {
  const std::size_t t_segments = segment_features.rows();
  const std::size_t d_vid = segment_features.cols();
  if (t_segments == 0) throw ShapeError("attach_visual_context: no segment rows");
  if (num_frames == 0) throw DataError("attach_visual_context: num_frames must be positive");
  for (auto& c : cs.clusters) {
    if (c.member_frames.empty()) throw DataError("attach_visual_context: empty cluster");
    // Median member frame; lower median for even counts.
    const std::size_t center = c.member_frames[(c.member_frames.size() - 1) / 2];
    c.relative_position = static_cast<double>(center) / static_cast<double>(num_frames);
    c.aligned_segment = align_segment(c.relative_position, t_segments);
    const float* row = segment_features.data() + c.aligned_segment * d_vid;
    c.visual_context.assign(row, row + d_vid);
  }
}

ClusterSet cluster_clip(const Clip& clip, const DbscanParams& params, bool promote_noise) {
  ClusterSet cs = build_clusters(clip, params, promote_noise);
  attach_visual_context(cs, clip.segment_features, clip.num_frames);
  return cs;
}

std::vector<int> cluster_set_pooled(const std::vector<Clip>& clips, const DbscanParams& params,
                                    std::vector<PooledFace>* layout) {
  std::vector<std::vector<float>> points;
  std::vector<PooledFace> pool;
  for (std::size_t ci = 0; ci < clips.size(); ++ci)
    for (std::size_t oi = 0; oi < clips[ci].face_observations.size(); ++oi) {
      points.push_back(clips[ci].face_observations[oi].embedding);
      pool.push_back({ci, oi});
    }
  std::vector<int> labels = dbscan(points, params.eps, params.min_pts);
  // Noise points become singleton clusters so baselines never drop faces.
  int next = 0;
  for (int l : labels) next = std::max(next, l + 1);
  for (auto& l : labels)
    if (l == kNoiseLabel) l = next++;
  if (layout) *layout = std::move(pool);
  return labels;
}

}  // namespace fitb
