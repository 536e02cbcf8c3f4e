#pragma once

#include <optional>
#include <string_view>

#include "bevkit/geometry.hpp"

namespace bevkit {

enum class CenterlineSource { kMask, kBezier, kFused, kGroundTruth };

std::string_view to_string(CenterlineSource s);
std::optional<CenterlineSource> parse_centerline_source(std::string_view text);

/// A lane centerline with its confidence in [0, 1].
struct Centerline {
  Polyline3 polyline;
  double confidence = 1.0;
  CenterlineSource source = CenterlineSource::kGroundTruth;

  Centerline(Polyline3 pl, double conf, CenterlineSource src);

  friend bool operator==(const Centerline&, const Centerline&) = default;
};

}  // namespace bevkit
