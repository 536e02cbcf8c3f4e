#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <string>

#include "bevkit/error.hpp"
#include "bevkit/metrics.hpp"
#include "bevkit/quad_direction.hpp"
#include "bevkit/scene_io.hpp"
#include "bevkit/synthetic.hpp"

using namespace bevkit;

namespace {

bool inside_roi(const Polyline3& pl) {
  return std::all_of(pl.points().begin(), pl.points().end(), [](const Point3& p) {
    return std::abs(p.x) <= kSyntheticHalfX + 1e-9 && std::abs(p.y) <= kSyntheticHalfY + 1e-9;
  });
}

// Strictly monotone along x or along y.
bool monotone(const Polyline3& pl) {
  const auto pts = pl.points();
  const auto strictly = [&](auto coord) {
    bool inc = true, dec = true;
    for (std::size_t i = 1; i < pts.size(); ++i) {
      inc = inc && coord(pts[i]) > coord(pts[i - 1]);
      dec = dec && coord(pts[i]) < coord(pts[i - 1]);
    }
    return inc || dec;
  };
  return strictly([](const Point3& p) { return p.x; }) || strictly([](const Point3& p) { return p.y; });
}

}  // namespace

TEST_CASE("same seed gives the same scene") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    CHECK(generate_synthetic_scene(seed, 7) == generate_synthetic_scene(seed, 7));
  }
  CHECK_FALSE(generate_synthetic_scene(1, 7) == generate_synthetic_scene(2, 7));
  CHECK(generate_synthetic_scene(12, 3).frame_id == "frame_12");
}

TEST_CASE("lanes are monotone cubic curves inside the ROI") {
  const auto s = generate_synthetic_scene(5, 5);
  CHECK(s.gt_centerlines.size() == 5);
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const auto scene = generate_synthetic_scene(seed, 10);
    REQUIRE(scene.gt_centerlines.size() == 10);
    for (const auto& [id, c] : scene.gt_centerlines) {
      CHECK(c.polyline.size() == kSyntheticPoints);
      CHECK(c.source == CenterlineSource::kGroundTruth);
      CHECK(inside_roi(c.polyline));
      CHECK(monotone(c.polyline));
    }
  }
}

TEST_CASE("random_monotone_bezier keeps the tangent in one quadrant") {
  std::mt19937_64 rng(4);
  for (int k = 0; k < 500; ++k) {
    const auto c = random_monotone_bezier(rng);
    const auto dense = bezier_sample(c, 200).polyline;
    CHECK(inside_roi(dense));
    CHECK(monotone(dense));
    const auto label = encode_quad_direction(dense);
    const auto& p = c.control_points;
    const double dx = p[3].x - p[0].x, dy = p[3].y - p[0].y;
    if (std::abs(dx) > std::abs(dy)) {
      CHECK(label == (dx > 0 ? QuadDirection::kUp : QuadDirection::kDown));
    } else {
      CHECK(label == (dy > 0 ? QuadDirection::kLeft : QuadDirection::kRight));
    }
  }
}

TEST_CASE("topology follows lane endpoints") {
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    const auto s = generate_synthetic_scene(seed, 8, 1.0);
    for (const auto& [a, b] : s.gt_topology_ll) {
      CHECK(a < b);
      CHECK(distance(s.gt_centerlines.at(a).polyline.back(), s.gt_centerlines.at(b).polyline.front()) <= 2.0);
    }
    // Density 1 keeps every candidate pair.
    for (const auto& [a, la] : s.gt_centerlines) {
      for (const auto& [b, lb] : s.gt_centerlines) {
        if (a < b && distance(la.polyline.back(), lb.polyline.front()) <= 2.0) CHECK(s.gt_topology_ll.count({a, b}) == 1);
      }
    }
    for (const auto& [id, te] : s.gt_traffic_elements) {
      CHECK(te.bbox.x1 >= 0.0);
      CHECK(te.bbox.y1 >= 0.0);
      CHECK(te.bbox.x2 <= 1920.0);
      CHECK(te.bbox.y2 <= 1080.0);
      CHECK(te.bbox.x2 > te.bbox.x1);
      CHECK(te.bbox.y2 > te.bbox.y1);
    }
    CHECK_FALSE(s.gt_traffic_elements.empty());
    CHECK(s.gt_topology_lt.size() == s.gt_centerlines.size());
    CHECK_NOTHROW(validate_scene(s));
  }
  std::size_t ll = 0;
  for (std::uint64_t seed = 0; seed < 40; ++seed) ll += generate_synthetic_scene(seed, 8, 1.0).gt_topology_ll.size();
  CHECK(ll > 20);
}

TEST_CASE("density 0 gives no lane or traffic element edges") {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const auto s = generate_synthetic_scene(seed, 8, 0.0);
    CHECK(s.gt_topology_ll.empty());
    CHECK(s.gt_topology_lt.empty());
  }
}

TEST_CASE("predictions start as copies of the GT") {
  const auto s = generate_synthetic_scene(9, 6, 0.6);
  REQUIRE(s.pred_centerlines.size() == s.gt_centerlines.size());
  for (const auto& [id, c] : s.gt_centerlines) CHECK(s.pred_centerlines.at(id).polyline == c.polyline);
  CHECK(s.pred_traffic_elements == s.gt_traffic_elements);
  CHECK(s.pred_topology_ll.size() == s.gt_topology_ll.size());
  for (const auto& [e, score] : s.pred_topology_ll) {
    CHECK(s.gt_topology_ll.count(e) == 1);
    CHECK(score == 1.0);
  }
  for (const auto& [e, score] : s.pred_topology_lt) CHECK(s.gt_topology_lt.count(e) == 1);
  CHECK_THROWS_AS(generate_synthetic_scene(1, 0), Error);
}

TEST_CASE("zero perturbation is the identity") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto s = generate_synthetic_scene(seed, 6);
    PerturbConfig cfg;
    cfg.seed = seed;
    CHECK(perturb_predictions(s, cfg) == s);
  }
}

TEST_CASE("drop_rate 1 removes every predicted lane and its edges") {
  const auto s = generate_synthetic_scene(3, 6, 1.0);
  PerturbConfig cfg;
  cfg.drop_rate = 1.0;
  const auto p = perturb_predictions(s, cfg);
  CHECK(p.pred_centerlines.empty());
  CHECK(p.pred_topology_ll.empty());
  CHECK(p.pred_topology_lt.empty());
  CHECK(p.gt_centerlines == s.gt_centerlines);
}

TEST_CASE("perturbation leaves the GT untouched and stays valid") {
  PerturbConfig cfg;
  cfg.xy_noise_sigma = 0.5;
  cfg.z_noise_sigma = 0.2;
  cfg.drop_rate = 0.3;
  cfg.false_positive_rate = 1.0;
  cfg.edge_score_noise = 0.3;
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    cfg.seed = seed;
    const auto s = generate_synthetic_scene(seed, 8, 0.7);
    const auto p = perturb_predictions(s, cfg);
    CHECK(p.frame_id == s.frame_id);
    CHECK(p.gt_centerlines == s.gt_centerlines);
    CHECK(p.gt_topology_ll == s.gt_topology_ll);
    CHECK(p.gt_traffic_elements == s.gt_traffic_elements);
    CHECK(p.gt_topology_lt == s.gt_topology_lt);
    CHECK_NOTHROW(validate_scene(p));
    CHECK(perturb_predictions(s, cfg) == p);
    for (const auto& [id, c] : p.pred_centerlines) {
      if (s.gt_centerlines.count(id) == 0) CHECK(c.source == CenterlineSource::kMask);
    }
    // Every surviving lane gains a spurious edge of each kind when a free
    // target remains.
    for (const auto& [id, c] : p.pred_centerlines) {
      std::size_t true_ll = 0, true_lt = 0, extra_ll = 0, extra_lt = 0;
      for (const auto& [e, score] : p.pred_topology_ll) {
        if (e.first == id) (s.gt_topology_ll.count(e) ? true_ll : extra_ll)++;
      }
      for (const auto& [e, score] : p.pred_topology_lt) {
        if (e.first == id) (s.gt_topology_lt.count(e) ? true_lt : extra_lt)++;
      }
      if (p.pred_centerlines.size() > 1 + true_ll) CHECK(extra_ll == 1);
      if (p.pred_traffic_elements.size() > true_lt) CHECK(extra_lt == 1);
    }
  }
}

TEST_CASE("false positives are fresh ids above the GT range") {
  PerturbConfig cfg;
  cfg.false_positive_rate = 1.0;
  std::size_t injected = 0;
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    cfg.seed = seed;
    const auto s = generate_synthetic_scene(seed, 4);
    const auto p = perturb_predictions(s, cfg);
    const InstanceId max_gt = s.gt_centerlines.rbegin()->first;
    for (const auto& [id, c] : p.pred_centerlines) {
      if (id > max_gt) {
        ++injected;
        CHECK(inside_roi(c.polyline));
      } else {
        CHECK(c.polyline == s.pred_centerlines.at(id).polyline);
      }
    }
  }
  CHECK(injected > 10);
}

TEST_CASE("point noise lowers DET_l once it reaches the Frechet thresholds") {
  PerturbConfig cfg;
  cfg.xy_noise_sigma = 0.5;
  int below_one = 0;
  double sum = 0.0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    cfg.seed = seed;
    const auto p = perturb_predictions(generate_synthetic_scene(seed, 8), cfg);
    const double v = det_l(p.pred_centerlines, p.gt_centerlines);
    CHECK(v > 0.0);
    below_one += v < 1.0;
    sum += v;
  }
  CHECK(below_one >= 95);
  CHECK(sum / 100.0 < 0.9);

  // At 0.2 m the smallest Frechet threshold (1 m) still absorbs the noise.
  cfg.xy_noise_sigma = 0.2;
  int perfect = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    cfg.seed = seed;
    const auto p = perturb_predictions(generate_synthetic_scene(seed, 8), cfg);
    perfect += det_l(p.pred_centerlines, p.gt_centerlines) == 1.0;
  }
  CHECK(perfect == 100);
}

TEST_CASE("PerturbConfig validation and JSON") {
  PerturbConfig ok;
  ok.xy_noise_sigma = 0.3;
  ok.drop_rate = 0.2;
  ok.seed = 77;
  CHECK_NOTHROW(ok.validate());
  const auto back = perturb_config_from_json(perturb_config_to_json(ok));
  CHECK(back.xy_noise_sigma == 0.3);
  CHECK(back.drop_rate == 0.2);
  CHECK(back.seed == 77);
  const auto partial = perturb_config_from_json(R"({"xy_noise_sigma": 0.1})");
  CHECK(partial.xy_noise_sigma == 0.1);
  CHECK(partial.drop_rate == 0.0);

  for (const char* bad : {R"({"drop_rate": 1.5})", R"({"xy_noise_sigma": -1})", R"({"false_positive_rate": -0.1})",
                          R"({"z_noise_sigma": -0.5})", R"({"edge_score_noise": -1})"}) {
    CAPTURE(bad);
    try {
      perturb_config_from_json(bad);
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::kConfiguration);
    }
  }
  try {
    perturb_config_from_json(R"({"noise": 1})");
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kSchemaViolation);
  }
  CHECK_THROWS_AS(perturb_config_from_json("{"), Error);
}
