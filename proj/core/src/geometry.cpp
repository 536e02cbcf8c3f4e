#include "bevkit/geometry.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <string>

#include "bevkit/error.hpp"

namespace bevkit {

double norm(const Point3& p) { return std::sqrt(p.x * p.x + p.y * p.y + p.z * p.z); }

double distance(const Point3& a, const Point3& b) { return norm(a - b); }

bool is_finite(const Point3& p) {
  return std::isfinite(p.x) && std::isfinite(p.y) && std::isfinite(p.z);
}

Polyline3::Polyline3(std::vector<Point3> points) : points_(std::move(points)) {
  require(points_.size() >= 2, "polyline needs at least two points");
  for (std::size_t i = 0; i < points_.size(); ++i) {
    require(is_finite(points_[i]), "polyline point is not finite");
    if (i > 0 && points_[i] == points_[i - 1]) {
      raise(ErrorKind::kContractViolation,
            "polyline has identical consecutive points at index " + std::to_string(i));
    }
  }
}

double Polyline3::length() const {
  double total = 0.0;
  for (std::size_t i = 1; i < points_.size(); ++i) total += distance(points_[i - 1], points_[i]);
  return total;
}

Polyline3 Polyline3::reversed() const {
  return Polyline3(std::vector<Point3>(points_.rbegin(), points_.rend()));
}

void BevGridSpec::validate() const {
  if (rows <= 0 || cols <= 0) raise(ErrorKind::kConfiguration, "grid needs positive rows and cols");
  if (!(cell_size > 0.0) || !std::isfinite(cell_size)) {
    raise(ErrorKind::kConfiguration, "grid cell_size must be positive");
  }
  if (!std::isfinite(x_min) || !std::isfinite(y_min)) {
    raise(ErrorKind::kConfiguration, "grid origin must be finite");
  }
}

std::optional<GridCell> world_to_grid(const Point3& p, const BevGridSpec& grid) {
  if (!std::isfinite(p.x) || !std::isfinite(p.y)) return std::nullopt;
  const double r = std::floor((p.x - grid.x_min) / grid.cell_size);
  const double c = std::floor((p.y - grid.y_min) / grid.cell_size);
  if (r < 0.0 || c < 0.0 || r >= grid.rows || c >= grid.cols) return std::nullopt;
  return GridCell{static_cast<int>(r), static_cast<int>(c)};
}

Point3 grid_to_world(const GridCell& cell, const BevGridSpec& grid) {
  if (cell.row < 0 || cell.row >= grid.rows || cell.col < 0 || cell.col >= grid.cols) {
    raise(ErrorKind::kContractViolation, "grid cell (" + std::to_string(cell.row) + ", " +
                                             std::to_string(cell.col) + ") is out of bounds");
  }
  return {grid.x_min + (cell.row + 0.5) * grid.cell_size,
          grid.y_min + (cell.col + 0.5) * grid.cell_size, 0.0};
}

Polyline3 arc_length_resample(const Polyline3& polyline, std::size_t n) {
  require(n >= 2, "arc_length_resample needs n >= 2");
  const auto pts = polyline.points();
  std::vector<double> cumulative(pts.size(), 0.0);
  for (std::size_t i = 1; i < pts.size(); ++i) {
    cumulative[i] = cumulative[i - 1] + distance(pts[i - 1], pts[i]);
  }
  const double total = cumulative.back();

  std::vector<Point3> out;
  out.reserve(n);
  out.push_back(pts.front());
  std::size_t seg = 1;
  for (std::size_t k = 1; k + 1 < n; ++k) {
    const double target = total * static_cast<double>(k) / static_cast<double>(n - 1);
    while (seg + 1 < pts.size() && cumulative[seg] < target) ++seg;
    const double seg_len = cumulative[seg] - cumulative[seg - 1];
    const double t = seg_len > 0.0 ? std::clamp((target - cumulative[seg - 1]) / seg_len, 0.0, 1.0) : 0.0;
    out.push_back(pts[seg - 1] + (pts[seg] - pts[seg - 1]) * t);
  }
  out.push_back(pts.back());
  return Polyline3(std::move(out));
}

double discrete_frechet(std::span<const Point3> a, std::span<const Point3> b) {
  require(!a.empty() && !b.empty(), "discrete_frechet needs non-empty inputs");
  // Rolling row over the m x n coupling lattice.
  std::vector<double> prev(b.size()), curr(b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = 0; j < b.size(); ++j) {
      const double d = distance(a[i], b[j]);
      double reach;
      if (i == 0 && j == 0) {
        reach = d;
      } else if (i == 0) {
        reach = std::max(curr[j - 1], d);
      } else if (j == 0) {
        reach = std::max(prev[j], d);
      } else {
        reach = std::max(std::min({prev[j], prev[j - 1], curr[j - 1]}), d);
      }
      curr[j] = reach;
    }
    std::swap(prev, curr);
  }
  return prev.back();
}

namespace {

std::vector<Point3> chamfer_samples(std::span<const Point3> pts, std::size_t samples) {
  if (pts.size() < 2) return {pts.begin(), pts.end()};
  // Drop repeated consecutive points so the resampler's invariant holds.
  std::vector<Point3> dedup;
  dedup.reserve(pts.size());
  for (const auto& p : pts) {
    if (dedup.empty() || !(dedup.back() == p)) dedup.push_back(p);
  }
  if (dedup.size() < 2) return dedup;
  const auto resampled = arc_length_resample(Polyline3(std::move(dedup)), samples);
  return {resampled.points().begin(), resampled.points().end()};
}

double mean_nearest(std::span<const Point3> from, std::span<const Point3> to) {
  double sum = 0.0;
  for (const auto& p : from) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& q : to) best = std::min(best, distance(p, q));
    sum += best;
  }
  return sum / static_cast<double>(from.size());
}

}  // namespace

double chamfer(std::span<const Point3> a, std::span<const Point3> b, std::size_t samples) {
  require(!a.empty() && !b.empty(), "chamfer needs non-empty inputs");
  require(samples >= 2, "chamfer needs at least two samples");
  const auto sa = chamfer_samples(a, samples);
  const auto sb = chamfer_samples(b, samples);
  return 0.5 * (mean_nearest(sa, sb) + mean_nearest(sb, sa));
}

Polynomial::Polynomial(double center, double scale, std::vector<double> normalized_coefficients)
    : center_(center), scale_(scale), normalized_(std::move(normalized_coefficients)) {
  require(!normalized_.empty(), "polynomial needs at least one coefficient");
  require(scale_ > 0.0, "polynomial scale must be positive");
}

double Polynomial::operator()(double t) const {
  const double u = (t - center_) / scale_;
  double acc = 0.0;
  for (auto it = normalized_.rbegin(); it != normalized_.rend(); ++it) acc = acc * u + *it;
  return acc;
}

std::vector<double> Polynomial::coefficients() const {
  // sum_k a_k ((t - c)/s)^k expanded with the binomial theorem.
  const std::size_t n = normalized_.size();
  std::vector<double> raw(n, 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    const double ak = normalized_[k] / std::pow(scale_, static_cast<double>(k));
    double binom = 1.0;
    for (std::size_t j = 0; j <= k; ++j) {
      if (j > 0) binom = binom * static_cast<double>(k - j + 1) / static_cast<double>(j);
      raw[j] += ak * binom * std::pow(-center_, static_cast<double>(k - j));
    }
  }
  return raw;
}

Point2 PolyFit::at(double t) const {
  const double other = polynomial(t);
  return dominant_axis == Axis::kX ? Point2{t, other} : Point2{other, t};
}

PolyFit polyfit(std::span<const Point2> points, Axis dominant_axis, int degree) {
  require(points.size() >= 2, "polyfit needs at least two points");
  require(degree >= 1, "polyfit degree must be >= 1");

  const auto dom = [&](const Point2& p) { return dominant_axis == Axis::kX ? p.x : p.y; };
  const auto oth = [&](const Point2& p) { return dominant_axis == Axis::kX ? p.y : p.x; };

  std::set<double> distinct;
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (const auto& p : points) {
    require(std::isfinite(p.x) && std::isfinite(p.y), "polyfit point is not finite");
    distinct.insert(dom(p));
    lo = std::min(lo, dom(p));
    hi = std::max(hi, dom(p));
  }
  if (distinct.size() < 2) raise(ErrorKind::kDegenerateFit, "all dominant-axis values are identical");

  const int eff = std::min<int>(degree, static_cast<int>(distinct.size()) - 1);
  const double center = 0.5 * (lo + hi);
  const double scale = 0.5 * (hi - lo);

  const auto m = static_cast<Eigen::Index>(points.size());
  Eigen::MatrixXd vander(m, eff + 1);
  Eigen::VectorXd rhs(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    const double u = (dom(points[i]) - center) / scale;
    double pw = 1.0;
    for (int k = 0; k <= eff; ++k) {
      vander(i, k) = pw;
      pw *= u;
    }
    rhs(i) = oth(points[i]);
  }
  const Eigen::VectorXd sol = vander.colPivHouseholderQr().solve(rhs);
  return PolyFit{dominant_axis, Polynomial(center, scale, std::vector<double>(sol.data(), sol.data() + sol.size()))};
}

}  // namespace bevkit
