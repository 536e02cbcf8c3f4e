#include "bevkit/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include <json.hpp>

#include "bevkit/error.hpp"

namespace bevkit {

namespace {

constexpr double kMinExtent = 6.0;
constexpr double kMaxExtent = 30.0;
constexpr double kMaxSlope = 2.0 / 3.0;

double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

struct LaneFrame {
  Axis axis = Axis::kX;
  double sign = 1.0;
};

Point3 make_point(const LaneFrame& f, double along, double across, double z) {
  return f.axis == Axis::kX ? Point3{along, across, z} : Point3{across, along, z};
}

double dominant_half(Axis a) { return a == Axis::kX ? kSyntheticHalfX : kSyntheticHalfY; }
double lateral_half(Axis a) { return a == Axis::kX ? kSyntheticHalfY : kSyntheticHalfX; }

// Builds a curve from a start position (along, across) heading `sign` along
// the axis. Returns false when the remaining room is too short.
bool build_curve(std::mt19937_64& rng, const LaneFrame& f, double along0, double across0, double z0,
                 BezierCurve& out) {
  const double limit = dominant_half(f.axis);
  const double room = f.sign > 0 ? limit - along0 : along0 + limit;
  if (room < kMinExtent) return false;
  const double extent = uniform(rng, kMinExtent, std::min(kMaxExtent, room));
  const double lat = lateral_half(f.axis);

  // Strictly increasing fractions of the extent for the four controls.
  std::array<double, 4> frac{0.0, uniform(rng, 0.2, 0.45), uniform(rng, 0.55, 0.8), 1.0};
  double across = std::clamp(across0, -lat, lat);
  double z = std::clamp(z0, -1.0, 1.0);
  for (int k = 0; k < 4; ++k) {
    if (k > 0) {
      const double step = (frac[k] - frac[k - 1]) * extent;
      across = std::clamp(across + uniform(rng, -kMaxSlope, kMaxSlope) * step, -lat, lat);
      z = std::clamp(z + uniform(rng, -0.3, 0.3), -1.0, 1.0);
    }
    const double along = along0 + f.sign * frac[k] * extent;
    out.control_points[k] = make_point(f, along, across, z);
  }
  out.confidence = 1.0;
  return true;
}

BezierCurve fresh_curve(std::mt19937_64& rng) {
  for (;;) {
    LaneFrame f;
    f.axis = std::bernoulli_distribution(0.5)(rng) ? Axis::kX : Axis::kY;
    f.sign = std::bernoulli_distribution(0.5)(rng) ? 1.0 : -1.0;
    const double dom = dominant_half(f.axis);
    const double lat = lateral_half(f.axis);
    BezierCurve c;
    if (build_curve(rng, f, uniform(rng, -dom, dom), uniform(rng, -lat, lat), uniform(rng, -1.0, 1.0), c)) return c;
  }
}

LaneFrame frame_of(const BezierCurve& c) {
  const Point3 d = c.control_points[3] - c.control_points[0];
  LaneFrame f;
  f.axis = std::abs(d.x) >= std::abs(d.y) ? Axis::kX : Axis::kY;
  const double along = f.axis == Axis::kX ? d.x : d.y;
  f.sign = along >= 0 ? 1.0 : -1.0;
  return f;
}

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  return h;
}

double clamp_unit(double v) { return std::clamp(v, 0.0, 1.0); }

BezierCurve random_continuation(std::mt19937_64& rng, const BezierCurve& prev, bool& ok) {
  const LaneFrame f = frame_of(prev);
  const Point3 end = prev.control_points[3];
  const double along_end = f.axis == Axis::kX ? end.x : end.y;
  const double across_end = f.axis == Axis::kX ? end.y : end.x;
  BezierCurve c;
  ok = build_curve(rng, f, along_end + f.sign * uniform(rng, 0.05, 0.35), across_end + uniform(rng, -0.35, 0.35),
                   end.z, c);
  return c;
}

}  // namespace

BezierCurve random_monotone_bezier(std::mt19937_64& rng) { return fresh_curve(rng); }

SceneAnnotation generate_synthetic_scene(std::uint64_t seed, int n_lanes, double topology_density) {
  require(n_lanes >= 1, "generate_synthetic_scene needs n_lanes >= 1");
  require(topology_density >= 0.0 && topology_density <= 1.0, "topology density outside [0, 1]");
  std::mt19937_64 rng(seed);
  SceneAnnotation s;
  s.frame_id = "frame_" + std::to_string(seed);

  std::vector<BezierCurve> curves;
  for (int i = 0; i < n_lanes; ++i) {
    bool ok = false;
    BezierCurve c;
    if (!curves.empty() && std::bernoulli_distribution(0.5)(rng)) {
      const auto j = std::uniform_int_distribution<std::size_t>(0, curves.size() - 1)(rng);
      c = random_continuation(rng, curves[j], ok);
    }
    if (!ok) c = fresh_curve(rng);
    curves.push_back(c);
    s.gt_centerlines.emplace(i, Centerline(bezier_sample(c, kSyntheticPoints).polyline, 1.0,
                                           CenterlineSource::kGroundTruth));
  }

  std::bernoulli_distribution keep(topology_density);
  for (int i = 0; i < n_lanes; ++i) {
    for (int j = i + 1; j < n_lanes; ++j) {
      const double gap = distance(s.gt_centerlines.at(i).polyline.back(), s.gt_centerlines.at(j).polyline.front());
      if (gap <= 2.0 && keep(rng)) s.gt_topology_ll.emplace(i, j);
    }
  }

  const int n_te = std::uniform_int_distribution<int>(1, 4)(rng);
  for (int k = 0; k < n_te; ++k) {
    TrafficElement te;
    const double w = uniform(rng, 20.0, 120.0);
    const double h = uniform(rng, 20.0, 120.0);
    te.bbox.x1 = uniform(rng, 0.0, 1920.0 - w);
    te.bbox.y1 = uniform(rng, 0.0, 1080.0 - h);
    te.bbox.x2 = te.bbox.x1 + w;
    te.bbox.y2 = te.bbox.y1 + h;
    te.attribute = std::uniform_int_distribution<int>(0, kTrafficElementClasses - 1)(rng);
    s.gt_traffic_elements.emplace(k, te);
  }
  std::uniform_int_distribution<int> pick_te(0, n_te - 1);
  for (int i = 0; i < n_lanes; ++i) {
    const int k = pick_te(rng);
    if (keep(rng)) s.gt_topology_lt.emplace(i, k);
  }

  s.pred_centerlines = s.gt_centerlines;
  s.pred_traffic_elements = s.gt_traffic_elements;
  for (const auto& e : s.gt_topology_ll) s.pred_topology_ll.emplace(e, 1.0);
  for (const auto& e : s.gt_topology_lt) s.pred_topology_lt.emplace(e, 1.0);
  return s;
}

void PerturbConfig::validate() const {
  const auto sigma = [](double v, const char* name) {
    if (!(v >= 0.0) || !std::isfinite(v)) raise(ErrorKind::kConfiguration, std::string(name) + " must be >= 0");
  };
  const auto rate = [](double v, const char* name) {
    if (!(v >= 0.0 && v <= 1.0)) raise(ErrorKind::kConfiguration, std::string(name) + " must lie in [0, 1]");
  };
  sigma(xy_noise_sigma, "xy_noise_sigma");
  sigma(z_noise_sigma, "z_noise_sigma");
  sigma(edge_score_noise, "edge_score_noise");
  rate(drop_rate, "drop_rate");
  rate(false_positive_rate, "false_positive_rate");
}

PerturbConfig perturb_config_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    raise(ErrorKind::kMalformedJson, e.what());
  }
  if (!j.is_object()) raise(ErrorKind::kSchemaViolation, ": perturb config must be an object");
  PerturbConfig cfg;
  for (const auto& [key, value] : j.items()) {
    const std::string where = "/" + key;
    if (key == "seed") {
      if (!value.is_number_unsigned() && !(value.is_number_integer() && value.get<std::int64_t>() >= 0)) {
        raise(ErrorKind::kSchemaViolation, where + ": expected a non-negative integer");
      }
      cfg.seed = value.get<std::uint64_t>();
      continue;
    }
    double* field = key == "xy_noise_sigma"        ? &cfg.xy_noise_sigma
                    : key == "z_noise_sigma"       ? &cfg.z_noise_sigma
                    : key == "drop_rate"           ? &cfg.drop_rate
                    : key == "false_positive_rate" ? &cfg.false_positive_rate
                    : key == "edge_score_noise"    ? &cfg.edge_score_noise
                                                   : nullptr;
    if (!field) raise(ErrorKind::kSchemaViolation, where + ": unknown field");
    if (!value.is_number()) raise(ErrorKind::kSchemaViolation, where + ": expected a number");
    *field = value.get<double>();
  }
  cfg.validate();
  return cfg;
}

std::string perturb_config_to_json(const PerturbConfig& cfg) {
  nlohmann::ordered_json j;
  j["xy_noise_sigma"] = cfg.xy_noise_sigma;
  j["z_noise_sigma"] = cfg.z_noise_sigma;
  j["drop_rate"] = cfg.drop_rate;
  j["false_positive_rate"] = cfg.false_positive_rate;
  j["edge_score_noise"] = cfg.edge_score_noise;
  j["seed"] = cfg.seed;
  return j.dump(2);
}

SceneAnnotation perturb_predictions(const SceneAnnotation& scene, const PerturbConfig& cfg) {
  cfg.validate();
  std::seed_seq seq{static_cast<std::uint32_t>(cfg.seed), static_cast<std::uint32_t>(cfg.seed >> 32),
                    static_cast<std::uint32_t>(fnv1a(scene.frame_id)),
                    static_cast<std::uint32_t>(fnv1a(scene.frame_id) >> 32)};
  std::mt19937_64 rng(seq);
  std::normal_distribution<double> unit(0.0, 1.0);
  SceneAnnotation out = scene;

  std::bernoulli_distribution drop(cfg.drop_rate);
  for (auto it = out.pred_centerlines.begin(); it != out.pred_centerlines.end();) {
    it = drop(rng) ? out.pred_centerlines.erase(it) : std::next(it);
  }
  std::erase_if(out.pred_topology_ll, [&](const auto& kv) {
    return !out.pred_centerlines.count(kv.first.first) || !out.pred_centerlines.count(kv.first.second);
  });
  std::erase_if(out.pred_topology_lt, [&](const auto& kv) { return !out.pred_centerlines.count(kv.first.first); });

  if (cfg.xy_noise_sigma > 0.0 || cfg.z_noise_sigma > 0.0) {
    for (auto& [id, c] : out.pred_centerlines) {
      std::vector<Point3> pts(c.polyline.points().begin(), c.polyline.points().end());
      for (auto& p : pts) {
        p.x += cfg.xy_noise_sigma * unit(rng);
        p.y += cfg.xy_noise_sigma * unit(rng);
        p.z += cfg.z_noise_sigma * unit(rng);
      }
      c.polyline = Polyline3(std::move(pts));
    }
  }

  InstanceId next_id = 0;
  for (const auto& m : {std::cref(scene.gt_centerlines), std::cref(scene.pred_centerlines)}) {
    if (!m.get().empty()) next_id = std::max(next_id, m.get().rbegin()->first + 1);
  }
  const int n_fp = std::poisson_distribution<int>(cfg.false_positive_rate)(rng);
  for (int k = 0; k < n_fp; ++k) {
    const BezierCurve c = fresh_curve(rng);
    out.pred_centerlines.emplace(next_id++, Centerline(bezier_sample(c, kSyntheticPoints).polyline,
                                                       uniform(rng, 0.0, 1.0), CenterlineSource::kMask));
  }

  if (cfg.edge_score_noise > 0.0) {
    const double sd = cfg.edge_score_noise;
    for (auto* edges : {&out.pred_topology_ll, &out.pred_topology_lt}) {
      for (auto& [e, score] : *edges) score = clamp_unit(score + sd * unit(rng));
    }
    std::vector<InstanceId> lanes;
    for (const auto& [id, c] : out.pred_centerlines) lanes.push_back(id);
    std::vector<InstanceId> tes;
    for (const auto& [id, te] : out.pred_traffic_elements) tes.push_back(id);
    // Spurious targets are drawn among those without an edge from src yet.
    const auto spurious = [&](TopologyEdges& edges, InstanceId src, const std::vector<InstanceId>& targets,
                              bool allow_self) {
      std::vector<InstanceId> free;
      for (InstanceId t : targets) {
        if ((allow_self || t != src) && !edges.count({src, t})) free.push_back(t);
      }
      if (free.empty()) return;
      const InstanceId dst = free[std::uniform_int_distribution<std::size_t>(0, free.size() - 1)(rng)];
      edges.emplace(EdgeKey{src, dst}, clamp_unit(std::abs(sd * unit(rng))));
    };
    for (InstanceId src : lanes) {
      spurious(out.pred_topology_ll, src, lanes, false);
      spurious(out.pred_topology_lt, src, tes, true);
    }
  }
  return out;
}

}  // namespace bevkit
