#include "bevkit/mask_decoder.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "bevkit/error.hpp"

namespace bevkit {

void DecoderConfig::validate() const {
  if (!(threshold > 0.0 && threshold < 1.0)) raise(ErrorKind::kConfiguration, "decoder threshold must be in (0, 1)");
  if (poly_degree < 1) raise(ErrorKind::kConfiguration, "decoder polynomial degree must be >= 1");
  if (n_out < 2) raise(ErrorKind::kConfiguration, "decoder n_out must be >= 2");
}

std::vector<ScoredPoint> extract_center_points(const FlowAwareMask& mask, const DecoderConfig& cfg) {
  cfg.validate();
  const ProbMap& prob = mask.prob;
  const BevGridSpec& g = prob.grid();
  const bool row_wise = sort_axis(mask.direction) == Axis::kX;
  const int lines = row_wise ? g.rows : g.cols;
  const int span = row_wise ? g.cols : g.rows;
  const auto value = [&](int line, int k) { return row_wise ? prob.at(line, k) : prob.at(k, line); };

  std::vector<ScoredPoint> out;
  for (int line = 0; line < lines; ++line) {
    double weight = 0.0;
    double moment = 0.0;
    for (int k = 0; k < span; ++k) {
      const double p = value(line, k);
      if (p > cfg.threshold) {
        weight += p;
        moment += p * k;
      }
    }
    if (weight <= 0.0) continue;
    const double expectation = moment / weight;
    const int lookup = std::clamp(static_cast<int>(std::floor(expectation)), 0, span - 1);
    const double score = value(line, lookup);
    if (!(score > cfg.threshold)) continue;

    const double along = (line + 0.5) * g.cell_size;
    const double across = (expectation + 0.5) * g.cell_size;
    Point3 pos = row_wise ? Point3{g.x_min + along, g.y_min + across, 0.0}
                          : Point3{g.x_min + across, g.y_min + along, 0.0};
    out.push_back({pos, score});
  }
  return out;
}

Polyline3 refine_points(const std::vector<ScoredPoint>& points, QuadDirection direction,
                        const DecoderConfig& cfg, double sample_step) {
  cfg.validate();
  require(sample_step > 0.0, "sample_step must be positive");
  if (points.size() < 2) {
    raise(ErrorKind::kDecodeFailure, "need at least two center points, got " + std::to_string(points.size()));
  }
  const Axis axis = sort_axis(direction);
  std::vector<Point2> planar;
  planar.reserve(points.size());
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (const auto& sp : points) {
    planar.push_back({sp.position.x, sp.position.y});
    const double d = axis == Axis::kX ? sp.position.x : sp.position.y;
    lo = std::min(lo, d);
    hi = std::max(hi, d);
  }

  std::optional<PolyFit> fit;
  try {
    fit = polyfit(planar, axis, cfg.poly_degree);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::kDegenerateFit) throw;
    raise(ErrorKind::kDecodeFailure, std::string("degenerate fit: ") + e.what());
  }

  const auto dense_count = std::max<std::size_t>(2, static_cast<std::size_t>(std::ceil((hi - lo) / sample_step)) + 1);
  std::vector<Point3> dense;
  dense.reserve(dense_count);
  for (std::size_t i = 0; i < dense_count; ++i) {
    const double t = i + 1 == dense_count ? hi : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(dense_count - 1);
    const Point2 p = fit->at(t);
    dense.push_back({p.x, p.y, 0.0});
  }
  return arc_length_resample(Polyline3(std::move(dense)), static_cast<std::size_t>(cfg.n_out));
}

Centerline decode_mask(const FlowAwareMask& mask, const DecoderConfig& cfg) {
  const auto points = extract_center_points(mask, cfg);
  if (points.empty()) raise(ErrorKind::kDecodeFailure, "mask has no foreground above threshold");
  const Polyline3 refined = refine_points(points, mask.direction, cfg, mask.prob.grid().cell_size);
  return Centerline(sort_points_by_label(refined.points(), mask.direction), mask.confidence, CenterlineSource::kMask);
}

}  // namespace bevkit
