#include "bevkit/quad_direction.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <vector>

#include "bevkit/error.hpp"

namespace bevkit {

std::string_view to_string(QuadDirection d) {
  switch (d) {
    case QuadDirection::kUp: return "up";
    case QuadDirection::kDown: return "down";
    case QuadDirection::kLeft: return "left";
    case QuadDirection::kRight: return "right";
  }
  return "up";
}

std::optional<QuadDirection> parse_quad_direction(std::string_view text) {
  if (text == "up") return QuadDirection::kUp;
  if (text == "down") return QuadDirection::kDown;
  if (text == "left") return QuadDirection::kLeft;
  if (text == "right") return QuadDirection::kRight;
  return std::nullopt;
}

QuadDirection opposite(QuadDirection d) {
  switch (d) {
    case QuadDirection::kUp: return QuadDirection::kDown;
    case QuadDirection::kDown: return QuadDirection::kUp;
    case QuadDirection::kLeft: return QuadDirection::kRight;
    case QuadDirection::kRight: return QuadDirection::kLeft;
  }
  return d;
}

Axis sort_axis(QuadDirection d) {
  return d == QuadDirection::kUp || d == QuadDirection::kDown ? Axis::kX : Axis::kY;
}

DirectionVotes count_direction_votes(std::span<const Point3> points) {
  DirectionVotes votes;
  for (std::size_t i = 1; i < points.size(); ++i) {
    const double dx = points[i].x - points[i - 1].x;
    const double dy = points[i].y - points[i - 1].y;
    if (dx > 0.0) ++votes.up;
    if (dx < 0.0) ++votes.down;
    if (dy > 0.0) ++votes.left;
    if (dy < 0.0) ++votes.right;
  }
  return votes;
}

QuadDirection encode_quad_direction(std::span<const Point3> points) {
  require(points.size() >= 2, "encode_quad_direction needs at least two points");
  const DirectionVotes v = count_direction_votes(points);
  const std::array<std::pair<int, QuadDirection>, 4> tally{{
      {v.up, QuadDirection::kUp},
      {v.down, QuadDirection::kDown},
      {v.left, QuadDirection::kLeft},
      {v.right, QuadDirection::kRight},
  }};
  int best = -1;
  int winners = 0;
  QuadDirection winner = QuadDirection::kUp;
  for (const auto& [count, label] : tally) {
    if (count > best) {
      best = count;
      winners = 1;
      winner = label;
    } else if (count == best) {
      ++winners;
    }
  }
  if (winners == 1) return winner;

  const double dx = points.back().x - points.front().x;
  const double dy = points.back().y - points.front().y;
  if (std::abs(dx) >= std::abs(dy)) return dx >= 0.0 ? QuadDirection::kUp : QuadDirection::kDown;
  return dy > 0.0 ? QuadDirection::kLeft : QuadDirection::kRight;
}

Polyline3 sort_points_by_label(std::span<const Point3> points, QuadDirection d) {
  require(points.size() >= 2, "sort_points_by_label needs at least two points");
  std::vector<Point3> sorted(points.begin(), points.end());
  switch (d) {
    case QuadDirection::kUp:
      std::stable_sort(sorted.begin(), sorted.end(), [](const Point3& a, const Point3& b) { return a.x < b.x; });
      break;
    case QuadDirection::kDown:
      std::stable_sort(sorted.begin(), sorted.end(), [](const Point3& a, const Point3& b) { return a.x > b.x; });
      break;
    case QuadDirection::kLeft:
      std::stable_sort(sorted.begin(), sorted.end(), [](const Point3& a, const Point3& b) { return a.y < b.y; });
      break;
    case QuadDirection::kRight:
      std::stable_sort(sorted.begin(), sorted.end(), [](const Point3& a, const Point3& b) { return a.y > b.y; });
      break;
  }
  return Polyline3(std::move(sorted));
}

}  // namespace bevkit
