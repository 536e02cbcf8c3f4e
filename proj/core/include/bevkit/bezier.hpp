#pragma once

#include <array>
#include <cstddef>

#include "bevkit/centerline.hpp"
#include "bevkit/geometry.hpp"

namespace bevkit {

/// Cubic Bezier with exactly four control points.
struct BezierCurve {
  std::array<Point3, 4> control_points;
  double confidence = 1.0;

  friend bool operator==(const BezierCurve&, const BezierCurve&) = default;
};

Point3 bezier_eval(const BezierCurve& curve, double t);

/// n points at t = 0, 1/(n-1), ..., 1. Source is kBezier.
Centerline bezier_sample(const BezierCurve& curve, std::size_t n);

/// Least-squares cubic with chord-length parameters and pinned endpoints.
BezierCurve bezier_fit(const Polyline3& polyline, double confidence = 1.0);

/// Returns `other`, reversed when the reversed order is closer index-wise to
/// `reference` (sum of pointwise distances).
Centerline align_orientation(const Centerline& reference, const Centerline& other);

enum class FusedConfidence { kMask, kMax, kMean };

/// Pointwise mask/Bezier average: x and y averaged, z from the Bezier.
/// Both inputs must have the same point count and orientation.
Centerline fuse(const Centerline& mask_line, const Centerline& bezier_line,
                FusedConfidence policy = FusedConfidence::kMask);

inline constexpr std::size_t kDefaultFusionPoints = 11;

/// Resamples both inputs to `n` points, aligns the Bezier line to the mask
/// line's orientation and fuses them.
Centerline fuse_instance(const Centerline& mask_line, const Centerline& bezier_line,
                         std::size_t n = kDefaultFusionPoints,
                         FusedConfidence policy = FusedConfidence::kMask);

}  // namespace bevkit
