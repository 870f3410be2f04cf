#include <doctest.h>

#include <algorithm>
#include <numeric>

#include <nlohmann/json.hpp>

#include "topic_grids/error.hpp"
#include "topic_grids/random.hpp"
#include "topic_grids/topology_metrics.hpp"

using namespace topic_grids;

namespace {

// Independent oracle: walks ordered pairs and both axes explicitly, then
// halves the counts (each unordered pair is seen twice).
struct OracleCounts {
  long strict = 0;
  long loose = 0;
};

OracleCounts brute_force(const std::vector<Point2D>& pts, const std::vector<GridCoord>& cells) {
  OracleCounts c;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    for (std::size_t j = 0; j < pts.size(); ++j) {
      if (i == j) continue;
      for (int axis = 0; axis < 2; ++axis) {
        const double a = axis == 0 ? pts[i].x : pts[i].y;
        const double b = axis == 0 ? pts[j].x : pts[j].y;
        const int ga = axis == 0 ? cells[i].col : cells[i].row;
        const int gb = axis == 0 ? cells[j].col : cells[j].row;
        const bool right_before = a > b;
        const bool right_after = ga > gb;
        const bool same_before = a == b;
        const bool same_after = ga == gb;
        const bool violated = right_before != right_after || same_before != same_after;
        if (violated) {
          ++c.strict;
          if (!same_after) ++c.loose;
        }
      }
    }
  }
  c.strict /= 2;
  c.loose /= 2;
  return c;
}

Placement placement_of(std::vector<GridCoord> cells) {
  Placement p;
  p.cells = std::move(cells);
  int h = 0;
  while ((std::size_t{1} << (2 * h)) < p.cells.size()) ++h;
  p.h = h;
  return p;
}

}  // namespace

TEST_CASE("constraint_count matches the published layouts") {
  CHECK(constraint_count(16) == 240);
  CHECK(constraint_count(64) == 4032);
  CHECK(constraint_count(256) == 65280);
  CHECK(constraint_count(1024) == 1047552);
  CHECK(constraint_count(4096) == 16773120);
  CHECK_THROWS_AS(constraint_count(1), DomainError);
}

TEST_CASE("evaluate: identity placement has no violations") {
  const std::vector<Point2D> pts = {{0, 0}, {0, 1}, {1, 0}, {1, 1}};
  const auto r = evaluate(pts, placement_of({{0, 0}, {0, 1}, {1, 0}, {1, 1}}));
  CHECK(r.total == 12);
  CHECK(r.err_I == 0.0);
  CHECK(r.err_II == 0.0);
}

TEST_CASE("evaluate: swapped x order") {
  const std::vector<Point2D> pts = {{0.1, 0.5}, {0.2, 0.5}};
  const auto r = evaluate(pts, placement_of({{1, 0}, {0, 0}}));
  CHECK(r.total == 2);
  CHECK(r.violations_strict == 1);
  CHECK(r.err_I == 0.5);
  CHECK(r.err_II == 0.5);
}

TEST_CASE("evaluate: grid tie is forgiven only by err_II") {
  const std::vector<Point2D> pts = {{0.1, 0.2}, {0.3, 0.4}};
  const auto r = evaluate(pts, placement_of({{0, 1}, {1, 1}}));
  CHECK(r.err_I == 0.5);
  CHECK(r.err_II == 0.0);
}

TEST_CASE("evaluate: index mismatch is a domain error") {
  const std::vector<Point2D> pts(4);
  CHECK_THROWS_AS(evaluate(pts, placement_of({{0, 0}})), DomainError);
}

TEST_CASE("evaluate: grid-shaped input in row-major order is error free") {
  for (int h = 1; h <= 3; ++h) {
    const int side = 1 << h;
    std::vector<Point2D> pts;
    for (int r = 0; r < side; ++r) {
      for (int c = 0; c < side; ++c) pts.push_back({static_cast<double>(c), static_cast<double>(r)});
    }
    const auto report = evaluate(pts, split_diffuse(pts, h));
    CHECK(report.err_I == 0.0);
  }
}

TEST_CASE("property: brute-force oracle agreement for n <= 8") {
  Rng rng(2024);
  for (int trial = 0; trial < 2000; ++trial) {
    const std::size_t n = 2 + rng.below(7);
    std::vector<Point2D> pts(n);
    std::vector<GridCoord> cells(n);
    for (std::size_t i = 0; i < n; ++i) {
      // Coarse values so that ties occur on both sides.
      pts[i] = {static_cast<double>(rng.below(4)), static_cast<double>(rng.below(4))};
      cells[i] = {static_cast<int>(rng.below(3)), static_cast<int>(rng.below(3))};
    }
    Placement p;
    p.cells = cells;
    const auto r = evaluate(pts, p);
    const auto o = brute_force(pts, cells);
    REQUIRE(r.violations_strict == static_cast<std::uint64_t>(o.strict));
    REQUIRE(r.violations_loose == static_cast<std::uint64_t>(o.loose));
    REQUIRE(r.total == n * (n - 1));
  }
}

TEST_CASE("property: err_II <= err_I on random placements") {
  Rng rng(31);
  for (int trial = 0; trial < 1000; ++trial) {
    const int h = 1 + static_cast<int>(rng.below(3));
    const int side = 1 << h;
    const std::size_t n = static_cast<std::size_t>(side * side);
    std::vector<Point2D> pts(n);
    for (auto& pt : pts) pt = {rng.uniform(), rng.uniform()};
    std::vector<GridCoord> cells;
    for (int c = 0; c < side; ++c) {
      for (int r = 0; r < side; ++r) cells.push_back({c, r});
    }
    for (std::size_t i = n; i > 1; --i) std::swap(cells[i - 1], cells[rng.below(i)]);
    Placement p;
    p.h = h;
    p.cells = cells;
    const auto report = evaluate(pts, p);
    REQUIRE(report.violations_loose <= report.violations_strict);
    REQUIRE(report.err_II <= report.err_I);
  }
}

TEST_CASE("property: ordering symmetry and per-axis affine invariance") {
  Rng rng(8);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<Point2D> pts(16);
    for (auto& pt : pts) pt = {rng.normal(), rng.normal()};
    const auto p = split_diffuse(pts, 2);
    const auto base = evaluate(pts, p);

    std::vector<std::size_t> perm(16);
    std::iota(perm.begin(), perm.end(), 0);
    for (std::size_t i = 16; i > 1; --i) std::swap(perm[i - 1], perm[rng.below(i)]);
    std::vector<Point2D> pts2(16);
    Placement p2;
    p2.h = 2;
    p2.cells.resize(16);
    for (std::size_t i = 0; i < 16; ++i) {
      pts2[i] = pts[perm[i]];
      p2.cells[i] = p.cells[perm[i]];
    }
    const auto shuffled = evaluate(pts2, p2);
    CHECK(shuffled.violations_strict == base.violations_strict);
    CHECK(shuffled.violations_loose == base.violations_loose);

    std::vector<Point2D> scaled(16);
    for (std::size_t i = 0; i < 16; ++i) scaled[i] = {3.0 * pts[i].x - 7.0, 0.25 * pts[i].y + 100.0};
    const auto affine = evaluate(scaled, p);
    CHECK(affine.err_I == base.err_I);
    CHECK(affine.err_II == base.err_II);
  }
}

TEST_CASE("report JSON carries every field") {
  const std::vector<Point2D> pts = {{0.1, 0.2}, {0.3, 0.4}};
  const auto j = to_json(evaluate(pts, placement_of({{0, 1}, {1, 1}})));
  CHECK(j.at("n") == 2);
  CHECK(j.at("total") == 2);
  CHECK(j.at("violations_strict") == 1);
  CHECK(j.at("violations_loose") == 0);
  CHECK(j.at("err_I") == 0.5);
  CHECK(j.at("err_II") == 0.0);
}
