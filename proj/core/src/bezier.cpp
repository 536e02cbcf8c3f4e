#include "bevkit/bezier.hpp"

#include <cmath>
#include <vector>

#include "bevkit/error.hpp"

namespace bevkit {

std::string_view to_string(CenterlineSource s) {
  switch (s) {
    case CenterlineSource::kMask: return "mask";
    case CenterlineSource::kBezier: return "bezier";
    case CenterlineSource::kFused: return "fused";
    case CenterlineSource::kGroundTruth: return "ground_truth";
  }
  return "ground_truth";
}

std::optional<CenterlineSource> parse_centerline_source(std::string_view text) {
  if (text == "mask") return CenterlineSource::kMask;
  if (text == "bezier") return CenterlineSource::kBezier;
  if (text == "fused") return CenterlineSource::kFused;
  if (text == "ground_truth") return CenterlineSource::kGroundTruth;
  return std::nullopt;
}

Centerline::Centerline(Polyline3 pl, double conf, CenterlineSource src)
    : polyline(std::move(pl)), confidence(conf), source(src) {
  require(confidence >= 0.0 && confidence <= 1.0, "centerline confidence outside [0, 1]");
}

Point3 bezier_eval(const BezierCurve& curve, double t) {
  require(t >= 0.0 && t <= 1.0, "bezier parameter outside [0, 1]");
  const auto& p = curve.control_points;
  const double s = 1.0 - t;
  return p[0] * (s * s * s) + p[1] * (3.0 * s * s * t) + p[2] * (3.0 * s * t * t) + p[3] * (t * t * t);
}

Centerline bezier_sample(const BezierCurve& curve, std::size_t n) {
  require(n >= 2, "bezier_sample needs n >= 2");
  std::vector<Point3> pts;
  pts.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = i + 1 == n ? 1.0 : static_cast<double>(i) / static_cast<double>(n - 1);
    pts.push_back(bezier_eval(curve, t));
  }
  return Centerline(Polyline3(std::move(pts)), curve.confidence, CenterlineSource::kBezier);
}

BezierCurve bezier_fit(const Polyline3& polyline, double confidence) {
  require(polyline.size() >= 4, "bezier_fit needs at least four points");
  const auto pts = polyline.points();
  const std::size_t n = pts.size();

  std::vector<double> u(n, 0.0);
  for (std::size_t i = 1; i < n; ++i) u[i] = u[i - 1] + distance(pts[i - 1], pts[i]);
  const double total = u.back();
  for (auto& v : u) v /= total;
  u.back() = 1.0;

  // With P0 and P3 pinned, solve the 2x2 normal equations for P1 and P2.
  const Point3& p0 = pts.front();
  const Point3& p3 = pts.back();
  double a11 = 0.0, a12 = 0.0, a22 = 0.0;
  Point3 r1, r2;
  for (std::size_t i = 0; i < n; ++i) {
    const double t = u[i];
    const double s = 1.0 - t;
    const double b0 = s * s * s, b1 = 3.0 * s * s * t, b2 = 3.0 * s * t * t, b3 = t * t * t;
    const Point3 residual = pts[i] - p0 * b0 - p3 * b3;
    a11 += b1 * b1;
    a12 += b1 * b2;
    a22 += b2 * b2;
    r1 = r1 + residual * b1;
    r2 = r2 + residual * b2;
  }
  const double det = a11 * a22 - a12 * a12;
  if (std::abs(det) < 1e-14) raise(ErrorKind::kDegenerateFit, "bezier normal equations are singular");
  const Point3 p1 = (r1 * a22 - r2 * a12) * (1.0 / det);
  const Point3 p2 = (r2 * a11 - r1 * a12) * (1.0 / det);
  return BezierCurve{{p0, p1, p2, p3}, confidence};
}

Centerline align_orientation(const Centerline& reference, const Centerline& other) {
  const std::size_t n = reference.polyline.size();
  require(other.polyline.size() == n, "align_orientation needs equal point counts");
  double forward = 0.0;
  double backward = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    forward += distance(reference.polyline[i], other.polyline[i]);
    backward += distance(reference.polyline[i], other.polyline[n - 1 - i]);
  }
  if (forward > backward) return Centerline(other.polyline.reversed(), other.confidence, other.source);
  return other;
}

Centerline fuse(const Centerline& mask_line, const Centerline& bezier_line, FusedConfidence policy) {
  const std::size_t n = mask_line.polyline.size();
  require(bezier_line.polyline.size() == n, "fuse needs equal point counts");
  std::vector<Point3> fused;
  fused.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Point3& m = mask_line.polyline[i];
    const Point3& b = bezier_line.polyline[i];
    fused.push_back({(m.x + b.x) / 2.0, (m.y + b.y) / 2.0, b.z});
  }
  double confidence = mask_line.confidence;
  if (policy == FusedConfidence::kMax) confidence = std::max(mask_line.confidence, bezier_line.confidence);
  if (policy == FusedConfidence::kMean) confidence = 0.5 * (mask_line.confidence + bezier_line.confidence);
  return Centerline(Polyline3(std::move(fused)), confidence, CenterlineSource::kFused);
}

Centerline fuse_instance(const Centerline& mask_line, const Centerline& bezier_line, std::size_t n,
                         FusedConfidence policy) {
  const Centerline m(arc_length_resample(mask_line.polyline, n), mask_line.confidence, mask_line.source);
  const Centerline b(arc_length_resample(bezier_line.polyline, n), bezier_line.confidence, bezier_line.source);
  return fuse(m, align_orientation(m, b), policy);
}

}  // namespace bevkit
