#include <doctest.h>

#include <cmath>
#include <functional>
#include <random>

#include "bevkit/error.hpp"
#include "bevkit/mask_decoder.hpp"
#include "bevkit/synthetic.hpp"
#include "oracles.hpp"

using namespace bevkit;

namespace {

Polyline3 line(std::initializer_list<Point3> pts) { return Polyline3(std::vector<Point3>(pts)); }

FlowAwareMask empty_mask(QuadDirection d) { return {ProbMap(BevGridSpec{}), d, 1.0}; }

ErrorKind kind_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an exception");
  return ErrorKind::kIo;
}

}  // namespace

TEST_CASE("row-wise expectation example") {
  auto m = empty_mask(QuadDirection::kUp);
  m.prob.set(10, 1, 0.96f);
  m.prob.set(10, 2, 0.98f);
  const auto pts = extract_center_points(m, {});
  REQUIRE(pts.size() == 1);
  const BevGridSpec g;
  const double expectation = (0.96 * 1 + 0.98 * 2) / 1.94;
  CHECK(expectation == doctest::Approx(1.5052).epsilon(1e-4));
  CHECK(pts[0].score == doctest::Approx(0.96).epsilon(1e-6));
  CHECK(pts[0].position.x == doctest::Approx(g.x_min + 10.5 * g.cell_size));
  CHECK(pts[0].position.y == doctest::Approx(g.y_min + (expectation + 0.5) * g.cell_size).epsilon(1e-6));
  CHECK(pts[0].position.z == 0.0);
}

TEST_CASE("column-wise expectation mirrors the row-wise one") {
  auto m = empty_mask(QuadDirection::kLeft);
  m.prob.set(4, 30, 1.0f);
  m.prob.set(5, 30, 1.0f);
  const auto pts = extract_center_points(m, {});
  REQUIRE(pts.size() == 1);
  const BevGridSpec g;
  CHECK(pts[0].position.y == doctest::Approx(g.y_min + 30.5 * g.cell_size));
  CHECK(pts[0].position.x == doctest::Approx(g.x_min + 5.0 * g.cell_size));
}

TEST_CASE("a centroid that falls on background is rejected") {
  auto m = empty_mask(QuadDirection::kLeft);
  m.prob.set(4, 30, 1.0f);
  m.prob.set(6, 30, 1.0f);
  CHECK(extract_center_points(m, {}).empty());
}

TEST_CASE("single foreground cell per row lands on cell centres") {
  auto m = empty_mask(QuadDirection::kUp);
  for (int r = 20; r < 30; ++r) m.prob.set(r, 40, 1.0f);
  const auto pts = extract_center_points(m, {});
  REQUIRE(pts.size() == 10);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const auto c = grid_to_world({20 + static_cast<int>(i), 40}, BevGridSpec{});
    CHECK(distance(pts[i].position, c) < 1e-12);
    CHECK(pts[i].score == 1.0);
  }
}

TEST_CASE("nothing above threshold gives no points and a decode failure") {
  auto m = empty_mask(QuadDirection::kUp);
  for (int r = 0; r < 200; ++r) m.prob.set(r, 10, 0.95f);
  CHECK(extract_center_points(m, {}).empty());
  CHECK(kind_of([&] { decode_mask(m); }) == ErrorKind::kDecodeFailure);
  CHECK(kind_of([&] { decode_mask(empty_mask(QuadDirection::kDown)); }) == ErrorKind::kDecodeFailure);
}

TEST_CASE("config validation") {
  DecoderConfig cfg;
  cfg.threshold = 1.0;
  CHECK(kind_of([&] { cfg.validate(); }) == ErrorKind::kConfiguration);
  cfg = {};
  cfg.n_out = 1;
  CHECK(kind_of([&] { cfg.validate(); }) == ErrorKind::kConfiguration);
}

TEST_CASE("extracted points always score above the threshold") {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<float> u(0.0f, 1.0f);
  for (int trial = 0; trial < 40; ++trial) {
    auto m = empty_mask(trial % 2 ? QuadDirection::kUp : QuadDirection::kRight);
    for (int r = 0; r < 200; ++r) {
      for (int c = 0; c < 104; ++c) {
        if (u(rng) < 0.1f) m.prob.set(r, c, 0.8f + 0.2f * u(rng));
      }
    }
    DecoderConfig cfg;
    cfg.threshold = 0.85 + 0.1 * (trial % 3) / 2.0;
    for (const auto& p : extract_center_points(m, cfg)) CHECK(p.score > cfg.threshold);
  }
}

TEST_CASE("refine_points on collinear input stays on the line") {
  std::vector<ScoredPoint> pts;
  for (int i = 0; i < 20; ++i) pts.push_back({{-5.0 + i, 1.0 + 0.5 * (-5.0 + i), 0.0}, 1.0});
  const auto out = refine_points(pts, QuadDirection::kUp, {});
  REQUIRE(out.size() == 11);
  for (const auto& p : out.points()) {
    CHECK(std::abs(p.y - (1.0 + 0.5 * p.x)) < 1e-6);
    CHECK(p.z == 0.0);
  }
}

TEST_CASE("refine_points suppresses an outlier on a parabola") {
  const double cell = 0.5;
  std::vector<ScoredPoint> pts;
  for (int i = 0; i <= 40; ++i) {
    const double x = -10.0 + 0.5 * i;
    pts.push_back({{x, 0.01 * x * x, 0.0}, 1.0});
  }
  pts[20].position.y += 2 * cell;
  const double raw = 2 * cell;
  DecoderConfig cfg;
  cfg.poly_degree = 2;
  cfg.n_out = 101;
  const auto out = refine_points(pts, QuadDirection::kUp, cfg);
  double worst = 0.0;
  for (const auto& p : out.points()) worst = std::max(worst, std::abs(p.y - 0.01 * p.x * p.x));
  CHECK(worst < raw);
}

TEST_CASE("refine_points output count and spacing") {
  std::vector<ScoredPoint> pts;
  for (int i = 0; i < 30; ++i) pts.push_back({{0.3 * i, 0.02 * i * i, 0.0}, 1.0});
  const auto out = refine_points(pts, QuadDirection::kUp, {});
  REQUIRE(out.size() == 11);
  const double step = out.length() / 10.0;
  for (std::size_t i = 1; i < out.size(); ++i) CHECK(distance(out[i - 1], out[i]) == doctest::Approx(step).epsilon(3e-2));
  CHECK(kind_of([&] { refine_points({pts[0]}, QuadDirection::kUp, {}); }) == ErrorKind::kDecodeFailure);
  std::vector<ScoredPoint> flat{{{1, 0, 0}, 1}, {{1, 2, 0}, 1}};
  CHECK(kind_of([&] { refine_points(flat, QuadDirection::kUp, {}); }) == ErrorKind::kDecodeFailure);
}

TEST_CASE("straight +x line decodes to the covered row span") {
  // GT along y = 0.25 (a column centre) from x = -10.25 to 10.25. The decoded
  // polyline runs from the first to the last covered row centre, which the
  // cell-by-cell oracle determines independently.
  const BevGridSpec g;
  const auto gt = line({{-10.25, 0.25, 0}, {10.25, 0.25, 0}});
  const auto cells = oracle::raster_cells(gt, g, 4);
  int lo = g.rows;
  int hi = -1;
  for (const auto& [r, c] : cells) {
    lo = std::min(lo, r);
    hi = std::max(hi, r);
  }
  const auto first = grid_to_world({lo, 52}, g);
  const auto last = grid_to_world({hi, 52}, g);

  const auto out = decode_mask(make_flow_aware_mask(gt, g)).polyline;
  CHECK(distance(out.front(), first) < 1e-6);
  CHECK(distance(out.back(), last) < 1e-6);
  for (const auto& p : out.points()) CHECK(std::abs(p.y - 0.25) < 1e-6);
  for (std::size_t i = 1; i < out.size(); ++i) CHECK(out[i].x > out[i - 1].x);
  // Round mask ends add one covered row centre past each endpoint.
  CHECK(first.x == doctest::Approx(-11.25));
  CHECK(last.x == doctest::Approx(11.25));
  CHECK(discrete_frechet(out, arc_length_resample(gt, 11)) == doctest::Approx(1.0).epsilon(1e-6));

  auto down = make_flow_aware_mask(gt, g);
  down.direction = QuadDirection::kDown;
  const auto rev = decode_mask(down).polyline;
  REQUIRE(rev.size() == out.size());
  for (std::size_t i = 0; i < out.size(); ++i) CHECK(distance(rev[i], out[out.size() - 1 - i]) < 1e-9);
}

TEST_CASE("decode carries confidence and is deterministic") {
  std::mt19937_64 rng(8);
  const auto gt = bezier_sample(random_monotone_bezier(rng), 11).polyline;
  auto m = make_flow_aware_mask(gt, BevGridSpec{});
  m.confidence = 0.37;
  const auto a = decode_mask(m);
  const auto b = decode_mask(m);
  CHECK(a == b);
  CHECK(a.confidence == 0.37);
  CHECK(a.source == CenterlineSource::kMask);
}

TEST_CASE("synthetic lanes keep their label through rasterize and decode") {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    std::mt19937_64 rng(seed);
    const auto gt = bezier_sample(random_monotone_bezier(rng), 11).polyline;
    const auto m = make_flow_aware_mask(gt, BevGridSpec{});
    const auto out = decode_mask(m).polyline;
    CHECK(encode_quad_direction(out) == encode_quad_direction(gt));
    // Laterally the decoded line hugs the GT; the endpoint overshoot is
    // bounded by the mask radius plus the slope-induced cap widening.
    std::vector<Point3> flat(gt.points().begin(), gt.points().end());
    for (auto& p : flat) p.z = 0.0;
    CHECK(discrete_frechet(out, Polyline3(flat)) < 2.5);
  }
}
