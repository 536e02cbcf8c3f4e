#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "bevkit/geometry.hpp"
#include "bevkit/quad_direction.hpp"

namespace bevkit {

/// Row-major rows x cols probability raster over a BevGridSpec.
class ProbMap {
 public:
  explicit ProbMap(const BevGridSpec& grid);
  ProbMap(const BevGridSpec& grid, std::vector<float> values);

  const BevGridSpec& grid() const { return grid_; }
  float at(int row, int col) const { return values_[index(row, col)]; }
  void set(int row, int col, float value);
  std::span<const float> values() const { return values_; }
  std::size_t nonzero_count() const;

  friend bool operator==(const ProbMap&, const ProbMap&) = default;

 private:
  std::size_t index(int row, int col) const {
    return static_cast<std::size_t>(row) * static_cast<std::size_t>(grid_.cols) + static_cast<std::size_t>(col);
  }

  BevGridSpec grid_;
  std::vector<float> values_;
};

struct FlowAwareMask {
  ProbMap prob;
  QuadDirection direction = QuadDirection::kUp;
  double confidence = 1.0;
};

inline constexpr int kDefaultMaskWidth = 4;

struct RasterResult {
  ProbMap mask;
  /// True when no cell was covered, e.g. the polyline lies outside the grid.
  bool empty = true;
};

/// Sets cells whose center is within width_cells / 2 cell widths of the x-y
/// projection of any polyline segment to 1, everything else to 0.
RasterResult rasterize_centerline(const Polyline3& polyline, const BevGridSpec& grid,
                                  int width_cells = kDefaultMaskWidth);

/// Ground-truth mask: rasterized band, voted direction label, confidence 1.
FlowAwareMask make_flow_aware_mask(const Polyline3& polyline, const BevGridSpec& grid,
                                   int width_cells = kDefaultMaskWidth);

}  // namespace bevkit
