#pragma once

#include <vector>

#include "bevkit/centerline.hpp"
#include "bevkit/geometry.hpp"
#include "bevkit/quad_direction.hpp"
#include "bevkit/rasterizer.hpp"

namespace bevkit {

struct ScoredPoint {
  Point3 position;  // z is always 0
  double score = 0.0;
};

struct DecoderConfig {
  double threshold = 0.95;
  int poly_degree = 3;
  int n_out = 11;

  void validate() const;
};

/// Probability-aware center point extraction. For up/down masks every row with
/// foreground (P > threshold) yields the probability-weighted column centroid;
/// left/right masks use the column-wise counterpart. A point is kept only if
/// the probability at the floor of its centroid index exceeds the threshold.
std::vector<ScoredPoint> extract_center_points(const FlowAwareMask& mask, const DecoderConfig& cfg);

/// Polynomial fit along the label's axis, dense evaluation at `sample_step`
/// meters, then arc-length resampling to cfg.n_out points. Throws
/// kDecodeFailure for fewer than two points or a degenerate fit.
Polyline3 refine_points(const std::vector<ScoredPoint>& points, QuadDirection direction,
                        const DecoderConfig& cfg, double sample_step = 0.5);

/// Full mask-to-centerline conversion: extraction, refinement, label-aware
/// ordering. Throws kDecodeFailure when the instance cannot be decoded.
Centerline decode_mask(const FlowAwareMask& mask, const DecoderConfig& cfg = {});

}  // namespace bevkit
