#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <utility>

#include "bevkit/centerline.hpp"

namespace bevkit {

using InstanceId = std::int64_t;

inline constexpr int kTrafficElementClasses = 13;

struct Box2 {
  double x1 = 0.0;
  double y1 = 0.0;
  double x2 = 0.0;
  double y2 = 0.0;

  double area() const { return (x2 - x1) * (y2 - y1); }
  friend bool operator==(const Box2&, const Box2&) = default;
};

double iou(const Box2& a, const Box2& b);

/// Image-space traffic element box with a class id in [0, 13).
struct TrafficElement {
  Box2 bbox;
  int attribute = 0;
  double confidence = 1.0;

  friend bool operator==(const TrafficElement&, const TrafficElement&) = default;
};

using EdgeKey = std::pair<InstanceId, InstanceId>;  // (source, target)
using EdgeSet = std::set<EdgeKey>;
/// Scored predicted relations; the map key makes (source, target) unique.
using TopologyEdges = std::map<EdgeKey, double>;

/// One frame: ground truth and predictions for lanes, traffic elements and
/// both relation graphs (lane -> lane, lane -> traffic element).
struct SceneAnnotation {
  std::string frame_id;
  std::map<InstanceId, Centerline> gt_centerlines;
  EdgeSet gt_topology_ll;
  std::map<InstanceId, TrafficElement> gt_traffic_elements;
  EdgeSet gt_topology_lt;
  std::map<InstanceId, Centerline> pred_centerlines;
  TopologyEdges pred_topology_ll;
  std::map<InstanceId, TrafficElement> pred_traffic_elements;
  TopologyEdges pred_topology_lt;

  friend bool operator==(const SceneAnnotation&, const SceneAnnotation&) = default;
};

/// Checks ids, ranges and edge endpoints. Throws kDanglingId for edges that
/// reference missing instances and kSchemaViolation otherwise; messages name
/// the frame and the offending item.
void validate_scene(const SceneAnnotation& scene);

}  // namespace bevkit
