#include "bevkit/rasterizer.hpp"

#include <algorithm>
#include <cmath>

#include "bevkit/error.hpp"

namespace bevkit {

ProbMap::ProbMap(const BevGridSpec& grid) : grid_(grid) {
  grid_.validate();
  values_.assign(grid_.cell_count(), 0.0f);
}

ProbMap::ProbMap(const BevGridSpec& grid, std::vector<float> values) : grid_(grid), values_(std::move(values)) {
  grid_.validate();
  require(values_.size() == grid_.cell_count(), "probability map size does not match grid");
  for (float v : values_) require(v >= 0.0f && v <= 1.0f, "probability outside [0, 1]");
}

void ProbMap::set(int row, int col, float value) {
  require(row >= 0 && row < grid_.rows && col >= 0 && col < grid_.cols, "probability map index out of bounds");
  require(value >= 0.0f && value <= 1.0f, "probability outside [0, 1]");
  values_[index(row, col)] = value;
}

std::size_t ProbMap::nonzero_count() const {
  return static_cast<std::size_t>(std::count_if(values_.begin(), values_.end(), [](float v) { return v != 0.0f; }));
}

namespace {

// Squared distance from (pr, pc) to segment a-b, all in continuous cell units.
double segment_distance_sq(double pr, double pc, double ar, double ac, double br, double bc) {
  const double dr = br - ar;
  const double dc = bc - ac;
  const double len_sq = dr * dr + dc * dc;
  double t = 0.0;
  if (len_sq > 0.0) t = std::clamp(((pr - ar) * dr + (pc - ac) * dc) / len_sq, 0.0, 1.0);
  const double er = pr - (ar + t * dr);
  const double ec = pc - (ac + t * dc);
  return er * er + ec * ec;
}

}  // namespace

RasterResult rasterize_centerline(const Polyline3& polyline, const BevGridSpec& grid, int width_cells) {
  require(width_cells >= 1, "mask width must be >= 1 cell");
  RasterResult result{ProbMap(grid), true};
  const double radius = 0.5 * width_cells;
  const double radius_sq = radius * radius;

  // Continuous cell coordinates; cell (r, c) has its center at (r + 0.5, c + 0.5).
  std::vector<std::pair<double, double>> pts;
  pts.reserve(polyline.size());
  for (const auto& p : polyline.points()) {
    pts.emplace_back((p.x - grid.x_min) / grid.cell_size, (p.y - grid.y_min) / grid.cell_size);
  }

  for (std::size_t s = 1; s < pts.size(); ++s) {
    const auto [ar, ac] = pts[s - 1];
    const auto [br, bc] = pts[s];
    const auto clamp_index = [](double v, int hi) {
      return static_cast<int>(std::clamp(v, -1.0, static_cast<double>(hi)));
    };
    const int r0 = std::max(0, clamp_index(std::floor(std::min(ar, br) - radius - 1.0), grid.rows));
    const int r1 = std::min(grid.rows - 1, clamp_index(std::ceil(std::max(ar, br) + radius + 1.0), grid.rows));
    const int c0 = std::max(0, clamp_index(std::floor(std::min(ac, bc) - radius - 1.0), grid.cols));
    const int c1 = std::min(grid.cols - 1, clamp_index(std::ceil(std::max(ac, bc) + radius + 1.0), grid.cols));
    for (int r = r0; r <= r1; ++r) {
      for (int c = c0; c <= c1; ++c) {
        if (segment_distance_sq(r + 0.5, c + 0.5, ar, ac, br, bc) <= radius_sq) {
          result.mask.set(r, c, 1.0f);
          result.empty = false;
        }
      }
    }
  }
  return result;
}

FlowAwareMask make_flow_aware_mask(const Polyline3& polyline, const BevGridSpec& grid, int width_cells) {
  auto raster = rasterize_centerline(polyline, grid, width_cells);
  return FlowAwareMask{std::move(raster.mask), encode_quad_direction(polyline), 1.0};
}

}  // namespace bevkit
