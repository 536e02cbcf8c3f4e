#pragma once

#include <optional>
#include <span>
#include <string_view>

#include "bevkit/geometry.hpp"

namespace bevkit {

// up = +x, down = -x, left = +y, right = -y in the vehicle frame.
enum class QuadDirection { kUp, kDown, kLeft, kRight };

std::string_view to_string(QuadDirection d);
std::optional<QuadDirection> parse_quad_direction(std::string_view text);
QuadDirection opposite(QuadDirection d);
/// Axis along which points are ordered for this label.
Axis sort_axis(QuadDirection d);

struct DirectionVotes {
  int up = 0;
  int down = 0;
  int left = 0;
  int right = 0;
};

DirectionVotes count_direction_votes(std::span<const Point3> points);

/// Majority vote over consecutive displacements. Every pair votes once per
/// axis with a nonzero delta. Ties are resolved by the total displacement:
/// |dx| >= |dy| picks up/down by the sign of dx, otherwise left/right.
QuadDirection encode_quad_direction(std::span<const Point3> points);
inline QuadDirection encode_quad_direction(const Polyline3& polyline) {
  return encode_quad_direction(polyline.points());
}

/// Stable sort: up ascending x, down descending x, left ascending y,
/// right descending y.
Polyline3 sort_points_by_label(std::span<const Point3> points, QuadDirection d);

}  // namespace bevkit
