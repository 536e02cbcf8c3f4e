#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "bevkit/bezier.hpp"
#include "bevkit/centerline.hpp"
#include "bevkit/scene.hpp"

namespace bevkit {

// Scene files are JSON objects with the keys
//   frame_id, gt_centerlines, gt_topology_ll, gt_traffic_elements,
//   gt_topology_lt, pred_centerlines, pred_topology_ll,
//   pred_traffic_elements, pred_topology_lt.
// Centerlines:      {"id": 3, "points": [[x, y, z], ...], "confidence": 0.9}
// Traffic elements: {"id": 0, "bbox": [x1, y1, x2, y2], "attribute": 4,
//                    "confidence": 0.8}
// GT edges:         [source, target]
// Predicted edges:  {"source": 3, "target": 0, "score": 0.7}
//
// Parse errors are reported as kMalformedJson, invariant violations as
// kSchemaViolation and unknown edge endpoints as kDanglingId. Messages carry
// a JSON pointer to the first offending value.

std::string scene_to_json(const SceneAnnotation& scene, int indent = 2);
SceneAnnotation scene_from_json(const std::string& text);

void save_scene(const std::filesystem::path& path, const SceneAnnotation& scene);
SceneAnnotation load_scene(const std::filesystem::path& path);

/// Scene files (*.json) of a directory in lexicographic order.
std::vector<std::filesystem::path> list_scene_files(const std::filesystem::path& dir);

// Standalone centerline:          {"points": [...], "confidence": c, "source": "mask"}
// Standalone Bezier head output:  {"control_points": [[x, y, z] x 4], "confidence": c}
std::string centerline_to_json(const Centerline& line, int indent = 2);
Centerline centerline_from_json(const std::string& text);
std::string bezier_to_json(const BezierCurve& curve, int indent = 2);
BezierCurve bezier_from_json(const std::string& text);

std::string read_text_file(const std::filesystem::path& path);
/// Writes to a temporary sibling and renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, const std::string& bytes);

}  // namespace bevkit
