#pragma once

#include <array>
#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bevkit/centerline.hpp"
#include "bevkit/scene.hpp"

namespace bevkit {

enum class DistanceKernel { kFrechet, kChamfer };

/// Number of points both centerlines are resampled to before either kernel.
inline constexpr std::size_t kMetricSamples = 11;

inline constexpr std::array<double, 3> kFrechetThresholds{1.0, 2.0, 3.0};
inline constexpr std::array<double, 3> kChamferThresholds{0.5, 1.0, 1.5};
inline constexpr double kTopologyLaneThreshold = 2.0;
inline constexpr double kTrafficElementIou = 0.75;
inline constexpr double kManipulationCutoff = 0.05;

double centerline_distance(const Polyline3& a, const Polyline3& b, DistanceKernel kernel);

struct MatchPair {
  InstanceId pred = 0;
  InstanceId gt = 0;
  double distance = 0.0;
};

struct MatchResult {
  std::vector<MatchPair> pairs;
  std::vector<InstanceId> unmatched_preds;
  std::vector<InstanceId> unmatched_gts;

  /// pred id -> gt id.
  std::map<InstanceId, InstanceId> pred_to_gt() const;
  std::map<InstanceId, InstanceId> gt_to_pred() const;
};

/// Greedy matching: predictions by descending confidence (ties by id), each
/// taking the nearest still-unmatched GT with distance < threshold.
MatchResult match_instances(const std::map<InstanceId, Centerline>& preds,
                            const std::map<InstanceId, Centerline>& gts, DistanceKernel kernel, double threshold);

/// Class-aware greedy box matching at IoU >= threshold.
MatchResult match_traffic_elements(const std::map<InstanceId, TrafficElement>& preds,
                                   const std::map<InstanceId, TrafficElement>& gts,
                                   double iou_threshold = kTrafficElementIou);

struct RankedDetection {
  double confidence = 0.0;
  bool true_positive = false;
};

/// All-point interpolated AP. Entries are ranked by descending confidence;
/// ties keep their given order. With n_gt = 0 the result is 1 for an empty
/// list and 0 otherwise.
double average_precision(std::span<const RankedDetection> ranked, std::size_t n_gt);

/// Mean AP over the Frechet thresholds {1, 2, 3} m for a single frame.
double det_l(const std::map<InstanceId, Centerline>& preds, const std::map<InstanceId, Centerline>& gts);
/// Mean AP over the Chamfer thresholds {0.5, 1, 1.5} m for a single frame.
double det_l_ch(const std::map<InstanceId, Centerline>& preds, const std::map<InstanceId, Centerline>& gts);
/// Per-class AP at IoU 0.75 averaged over classes present in the GT.
double det_t(const std::map<InstanceId, TrafficElement>& preds, const std::map<InstanceId, TrafficElement>& gts);

/// Vertex-centric topology APs, one per GT source vertex with at least one
/// GT neighbour. `sources` maps prediction ids of the source kind to GT ids,
/// `targets` does the same for the target kind. Predicted edges are ranked by
/// descending score, ties by target id.
std::vector<double> topology_vertex_aps(const EdgeSet& gt_edges, const TopologyEdges& pred_edges,
                                        const std::map<InstanceId, InstanceId>& sources,
                                        const std::map<InstanceId, InstanceId>& targets);

/// Mean of topology_vertex_aps. Edges leaving non-qualifying vertices are
/// never ranked, so a graph with no qualifying vertex scores 1.
double top_score(const EdgeSet& gt_edges, const TopologyEdges& pred_edges, const MatchResult& source_match,
                 const MatchResult& target_match);

/// s + 1 for every score s > 0.05; order preserving.
TopologyEdges manipulate_scores(const TopologyEdges& edges);

/// 1/4 (det_l + det_t + sqrt(top_ll) + sqrt(top_lt)). Inputs must be in [0, 1].
double ols(double det_l, double det_t, double top_ll, double top_lt);

struct EvalOptions {
  std::optional<double> score_threshold;
  bool manipulate = false;
};

struct EvalReport {
  double det_l = 0.0;
  double det_l_ch = 0.0;
  double det_t = 0.0;
  double top_ll = 0.0;
  double top_lt = 0.0;
  double ols = 0.0;
  std::size_t frames = 0;

  std::string to_json(int indent = 2) const;
  std::string to_table() const;
};

/// Score rendering used in reports and tables: x100, one decimal.
double render_score(double v);

/// Dataset-level evaluation: TP/FP lists are pooled across frames before AP.
/// Throws kSchemaViolation on an empty scene list and the validate_scene
/// errors for malformed frames.
EvalReport evaluate(std::span<const SceneAnnotation> scenes, const EvalOptions& options = {});

}  // namespace bevkit
