#pragma once

#include <cstdint>
#include <random>
#include <string>

#include "bevkit/bezier.hpp"
#include "bevkit/scene.hpp"

namespace bevkit {

/// Lanes stay inside [-49, 49] x [-24, 24] m, one metre inside the default grid.
inline constexpr double kSyntheticHalfX = 49.0;
inline constexpr double kSyntheticHalfY = 24.0;
inline constexpr std::size_t kSyntheticPoints = 11;

/// Random cubic whose control points advance strictly along one axis, with
/// every lateral step at most 2/3 of the matching dominant step. The curve is
/// therefore monotone along that axis and its tangent never leaves the axis'
/// quadrant.
BezierCurve random_monotone_bezier(std::mt19937_64& rng);

/// Deterministic per seed. Predictions start as exact copies of the GT.
SceneAnnotation generate_synthetic_scene(std::uint64_t seed, int n_lanes, double topology_density = 0.5);

struct PerturbConfig {
  double xy_noise_sigma = 0.0;
  double z_noise_sigma = 0.0;
  double drop_rate = 0.0;
  /// Expected number of injected false-positive lanes per scene.
  double false_positive_rate = 0.0;
  double edge_score_noise = 0.0;
  std::uint64_t seed = 0;

  void validate() const;
};

PerturbConfig perturb_config_from_json(const std::string& text);
std::string perturb_config_to_json(const PerturbConfig& cfg);

/// Rewrites the prediction side only. Dropped lanes take their edges with
/// them. With edge_score_noise > 0 every predicted lane also gains one
/// spurious lane edge and one spurious traffic element edge with a low score,
/// whenever a target without an edge from that lane remains.
SceneAnnotation perturb_predictions(const SceneAnnotation& scene, const PerturbConfig& cfg);

}  // namespace bevkit
