#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace bevkit {

// Vehicle frame: +x forward, +y left, +z up. Meters.
struct Point3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  friend bool operator==(const Point3&, const Point3&) = default;
};

inline Point3 operator+(const Point3& a, const Point3& b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
inline Point3 operator-(const Point3& a, const Point3& b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
inline Point3 operator*(const Point3& a, double s) { return {a.x * s, a.y * s, a.z * s}; }
inline Point3 operator*(double s, const Point3& a) { return a * s; }

double norm(const Point3& p);
double distance(const Point3& a, const Point3& b);
bool is_finite(const Point3& p);

struct Point2 {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point2&, const Point2&) = default;
};

/// Ordered point sequence with at least two points, all finite, and no two
/// consecutive points identical. The order encodes traffic flow.
class Polyline3 {
 public:
  explicit Polyline3(std::vector<Point3> points);

  std::span<const Point3> points() const { return points_; }
  std::size_t size() const { return points_.size(); }
  const Point3& operator[](std::size_t i) const { return points_[i]; }
  const Point3& front() const { return points_.front(); }
  const Point3& back() const { return points_.back(); }

  double length() const;
  Polyline3 reversed() const;

  friend bool operator==(const Polyline3&, const Polyline3&) = default;

 private:
  std::vector<Point3> points_;
};

/// BEV raster geometry. Rows index x, columns index y, cells are half-open.
struct BevGridSpec {
  int rows = 200;
  int cols = 104;
  double cell_size = 0.5;
  double x_min = -50.0;
  double y_min = -26.0;

  double x_max() const { return x_min + rows * cell_size; }
  double y_max() const { return y_min + cols * cell_size; }
  std::size_t cell_count() const { return static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols); }
  void validate() const;

  friend bool operator==(const BevGridSpec&, const BevGridSpec&) = default;
};

struct GridCell {
  int row = 0;
  int col = 0;

  friend bool operator==(const GridCell&, const GridCell&) = default;
};

std::optional<GridCell> world_to_grid(const Point3& p, const BevGridSpec& grid);

/// Cell-center world coordinates with z = 0. Throws on an out-of-bounds cell.
Point3 grid_to_world(const GridCell& cell, const BevGridSpec& grid);

/// Resamples to `n` points equally spaced in cumulative arc length, keeping
/// both endpoints exactly.
Polyline3 arc_length_resample(const Polyline3& polyline, std::size_t n);

/// Discrete Frechet distance over the coupling lattice. Accepts any non-empty
/// point sequences.
double discrete_frechet(std::span<const Point3> a, std::span<const Point3> b);
inline double discrete_frechet(const Polyline3& a, const Polyline3& b) {
  return discrete_frechet(a.points(), b.points());
}

inline constexpr std::size_t kDefaultChamferSamples = 11;

/// Symmetric mean nearest-neighbour distance. Sequences of two or more points
/// are arc-length resampled to `samples` points first; a single point is used
/// as is.
double chamfer(std::span<const Point3> a, std::span<const Point3> b,
               std::size_t samples = kDefaultChamferSamples);
inline double chamfer(const Polyline3& a, const Polyline3& b,
                      std::size_t samples = kDefaultChamferSamples) {
  return chamfer(a.points(), b.points(), samples);
}

enum class Axis { kX, kY };

/// Least-squares polynomial in the dominant coordinate. Stored internally on
/// a centered and scaled abscissa; coefficients() expands to the raw basis.
class Polynomial {
 public:
  Polynomial(double center, double scale, std::vector<double> normalized_coefficients);

  double operator()(double t) const;
  int degree() const { return static_cast<int>(normalized_.size()) - 1; }
  /// Ascending-power coefficients in the original abscissa.
  std::vector<double> coefficients() const;

 private:
  double center_;
  double scale_;
  std::vector<double> normalized_;
};

struct PolyFit {
  Axis dominant_axis;
  Polynomial polynomial;

  /// Evaluates the fitted curve at dominant coordinate `t` and returns (x, y).
  Point2 at(double t) const;
};

/// Fits other = f(dominant). The degree is clamped to the number of distinct
/// dominant values minus one. Throws kDegenerateFit when every dominant value
/// is identical.
PolyFit polyfit(std::span<const Point2> points, Axis dominant_axis, int degree = 3);

}  // namespace bevkit
