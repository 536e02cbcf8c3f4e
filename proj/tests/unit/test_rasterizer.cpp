#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "bevkit/error.hpp"
#include "bevkit/rasterizer.hpp"
#include "bevkit/synthetic.hpp"
#include "oracles.hpp"

using namespace bevkit;

namespace {

Polyline3 line(std::initializer_list<Point3> pts) { return Polyline3(std::vector<Point3>(pts)); }

std::set<std::pair<int, int>> cells_of(const ProbMap& m) {
  std::set<std::pair<int, int>> out;
  for (int r = 0; r < m.grid().rows; ++r) {
    for (int c = 0; c < m.grid().cols; ++c) {
      if (m.at(r, c) != 0.0f) out.emplace(r, c);
    }
  }
  return out;
}

// Column span covered in one row.
int band_thickness(const ProbMap& m, int row) {
  int n = 0;
  for (int c = 0; c < m.grid().cols; ++c) n += m.at(row, c) == 1.0f;
  return n;
}

}  // namespace

TEST_CASE("ProbMap validates its values") {
  const BevGridSpec g;
  CHECK_THROWS_AS(ProbMap(g, std::vector<float>(10, 0.0f)), Error);
  std::vector<float> bad(g.cell_count(), 0.0f);
  bad[7] = 1.5f;
  CHECK_THROWS_AS(ProbMap(g, bad), Error);
  ProbMap m(g);
  CHECK_THROWS_AS(m.set(0, 0, -0.1f), Error);
  m.set(3, 4, 0.5f);
  CHECK(m.at(3, 4) == 0.5f);
  CHECK(m.nonzero_count() == 1);
}

TEST_CASE("straight line along x through cell centres, width 4") {
  const BevGridSpec g;
  // y = 0.25 is the centre of column 52.
  const auto r = rasterize_centerline(line({{-10.25, 0.25, 0}, {10.25, 0.25, 0}}), g, 4);
  CHECK_FALSE(r.empty);
  for (float v : r.mask.values()) CHECK((v == 0.0f || v == 1.0f));
  // Interior rows: columns 50..54 have centre distances 0, 1, 2 cells -> 5 cells.
  CHECK(band_thickness(r.mask, 100) == 5);
  // On a cell boundary (y = 0.0) the band is 4 cells thick.
  const auto b = rasterize_centerline(line({{-10, 0.0, 0}, {10, 0.0, 0}}), g, 4);
  CHECK(band_thickness(b.mask, 100) == 4);
}

TEST_CASE("width 1 on an axis-aligned line through cell centres") {
  const BevGridSpec g;
  const auto r = rasterize_centerline(line({{0.25, 0.25, 0}, {5.25, 0.25, 0}}), g, 1);
  // Rows 100..110 on column 52 exactly; neighbours are a full cell away (> 0.5).
  CHECK(r.mask.nonzero_count() == 11);
  for (int row = 100; row <= 110; ++row) CHECK(r.mask.at(row, 52) == 1.0f);
}

TEST_CASE("out-of-grid polyline gives an empty mask") {
  const auto r = rasterize_centerline(line({{100, 100, 0}, {120, 100, 0}}), BevGridSpec{}, 4);
  CHECK(r.empty);
  CHECK(r.mask.nonzero_count() == 0);
  // Far outside but crossing the grid is not empty.
  const auto c = rasterize_centerline(line({{-1e6, 0, 0}, {1e6, 0, 0}}), BevGridSpec{}, 4);
  CHECK_FALSE(c.empty);
  CHECK(band_thickness(c.mask, 0) == 4);
}

TEST_CASE("invalid width is rejected") {
  CHECK_THROWS_AS(rasterize_centerline(line({{0, 0, 0}, {1, 0, 0}}), BevGridSpec{}, 0), Error);
}

TEST_CASE("mask equals the per-cell distance oracle on random polylines") {
  const BevGridSpec g;
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 120; ++trial) {
    const auto pl = oracle::random_polyline(rng, 2 + trial % 6, 30.0);
    const int width = 1 + trial % 6;
    const auto mask = rasterize_centerline(pl, g, width).mask;
    CHECK(cells_of(mask) == oracle::raster_cells(pl, g, width));
  }
}

TEST_CASE("wider masks contain narrower ones") {
  const BevGridSpec g;
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 40; ++trial) {
    const auto pl = oracle::random_polyline(rng, 4, 25.0);
    auto prev = cells_of(rasterize_centerline(pl, g, 1).mask);
    for (int w = 2; w <= 6; ++w) {
      const auto cur = cells_of(rasterize_centerline(pl, g, w).mask);
      CHECK(std::includes(cur.begin(), cur.end(), prev.begin(), prev.end()));
      prev = cur;
    }
  }
}

TEST_CASE("make_flow_aware_mask labels") {
  const BevGridSpec g;
  const auto up = make_flow_aware_mask(line({{-5, 0, 0}, {5, 0, 0}}), g);
  CHECK(up.direction == QuadDirection::kUp);
  CHECK(up.confidence == 1.0);
  CHECK(up.prob.nonzero_count() > 0);
  CHECK(make_flow_aware_mask(line({{0, 5, 0}, {0, -5, 0}}), g).direction == QuadDirection::kRight);

  // S-curve monotone in x.
  std::vector<Point3> s;
  for (int i = 0; i <= 40; ++i) {
    const double x = -10.0 + 0.5 * i;
    s.push_back({x, 2.0 * std::sin(x / 3.0), 0});
  }
  const Polyline3 curve(s);
  const auto m = make_flow_aware_mask(curve, g);
  CHECK(m.direction == QuadDirection::kUp);
  CHECK(cells_of(m.prob) == oracle::raster_cells(curve, g, 4));
}

TEST_CASE("synthetic lanes rasterize to the oracle set") {
  const BevGridSpec g;
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    std::mt19937_64 rng(seed);
    const auto pl = bezier_sample(random_monotone_bezier(rng), 11).polyline;
    CHECK(cells_of(rasterize_centerline(pl, g).mask) == oracle::raster_cells(pl, g, 4));
  }
}
