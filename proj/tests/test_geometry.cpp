// SPDX-License-Identifier: Apache-2.0
// nearmimo: near-field distributed MIMO channel simulation and estimation

#include "doctest.h"
#include "nearmimo/geometry.hpp"
#include "nearmimo/rng.hpp"

#include <cmath>
#include <stdexcept>

using namespace nearmimo;

namespace {

// Independent route for the crossing decision: solve the two-segment
// parametric system and require both parameters strictly inside (0, 1).
bool crosses_parametric(const Location& p, const Location& q, const Wall& w) {
  const double rx = q.x - p.x, ry = q.y - p.y;
  const double sx = w.b.x - w.a.x, sy = w.b.y - w.a.y;
  const double denom = rx * sy - ry * sx;
  if (denom == 0.0) return false;
  const double t = ((w.a.x - p.x) * sy - (w.a.y - p.y) * sx) / denom;
  const double u = ((w.a.x - p.x) * ry - (w.a.y - p.y) * rx) / denom;
  return t > 0.0 && t < 1.0 && u > 0.0 && u < 1.0;
}

// Physical reflected-ray construction: a specular bounce P -> wall -> Q
// exists iff P and Q lie strictly on the same side of the supporting line and
// the path-length minimum over the segment is strictly interior (checked by
// the derivative signs of f(t) = |P - X(t)| + |X(t) - Q| at both ends).
bool reflected_ray_exists(const Location& p, const Wall& w, const Location& q) {
  const WallLine line = line_of(w);
  const double sp = (p.x - line.point.x) * line.normal_x +
                    (p.y - line.point.y) * line.normal_y;
  const double sq = (q.x - line.point.x) * line.normal_x +
                    (q.y - line.point.y) * line.normal_y;
  if (!(sp * sq > 0.0)) return false;
  const double dx = w.b.x - w.a.x, dy = w.b.y - w.a.y;
  const auto deriv = [&](double t) {
    const double xx = w.a.x + t * dx, xy = w.a.y + t * dy;
    const double dp = std::hypot(xx - p.x, xy - p.y);
    const double dq = std::hypot(xx - q.x, xy - q.y);
    return ((xx - p.x) * dx + (xy - p.y) * dy) / dp +
           ((xx - q.x) * dx + (xy - q.y) * dy) / dq;
  };
  return deriv(0.0) < 0.0 && deriv(1.0) > 0.0;
}

Location random_point(Rng& rng, double lo, double hi) {
  return {rng.uniform(lo, hi), rng.uniform(lo, hi), 0.0};
}

Environment hallway() {
  std::vector<Wall> walls;
  walls.emplace_back(Location{0.0, 1.0, 0.0}, Location{10.0, 1.0, 0.0}, 1.0);  // long wall
  walls.emplace_back(Location{0.0, 0.0, 0.0}, Location{3.0, 0.0, 0.0}, 1.0);   // short wall
  return Environment{std::move(walls), 10.0, 1.0};
}

}  // namespace

TEST_SUITE("geometry") {

TEST_CASE("distance basics") {
  CHECK(distance({1.5, -2.0, 3.0}, {1.5, -2.0, 3.0}) == 0.0);
  CHECK(distance({0, 0, 0}, {3, 4, 0}) == doctest::Approx(5.0).epsilon(1e-15));
  CHECK(distance({1, 2, 2}, {0, 0, 0}) == doctest::Approx(3.0).epsilon(1e-15));
  CHECK(distance({0, 0, 0}, {3, 4, 0}) == distance({3, 4, 0}, {0, 0, 0}));
}

TEST_CASE("mirror_point across the y axis") {
  const WallLine y_axis{{0, 0, 0}, 1.0, 0.0};
  const Location m = mirror_point({1, 2, 0}, y_axis);
  CHECK(m.x == doctest::Approx(-1.0));
  CHECK(m.y == doctest::Approx(2.0));
  CHECK(m.z == 0.0);
  const Location fixed = mirror_point({0, 5, 0}, y_axis);
  CHECK(fixed.x == 0.0);
  CHECK(fixed.y == 5.0);
}

TEST_CASE("mirror_point rejects non-unit normals") {
  CHECK_THROWS_AS(mirror_point({1, 2, 0}, WallLine{{0, 0, 0}, 2.0, 0.0}),
                  std::invalid_argument);
}

TEST_CASE("mirror involution over random lines") {
  Rng rng(0xA11CE);
  for (int i = 0; i < 10000; ++i) {
    const Location p = random_point(rng, -10.0, 10.0);
    const double angle = rng.uniform(0.0, 6.283185307179586);
    const WallLine line{random_point(rng, -10.0, 10.0), std::cos(angle),
                        std::sin(angle)};
    const Location twice = mirror_point(mirror_point(p, line), line);
    CHECK(std::abs(twice.x - p.x) <= 1e-12);
    CHECK(std::abs(twice.y - p.y) <= 1e-12);
    CHECK(twice.z == p.z);
  }
}

TEST_CASE("perpendicular_bisector symmetric pairs") {
  const WallLine l1 = perpendicular_bisector({2, 3, 0}, {-2, 3, 0});
  const Location m1 = mirror_point({2, 3, 0}, l1);
  CHECK(m1.x == doctest::Approx(-2.0).epsilon(1e-12));
  CHECK(m1.y == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(l1.point.x == doctest::Approx(0.0));

  const WallLine l2 = perpendicular_bisector({0, 0, 0}, {0, 4, 0});
  CHECK(l2.point.y == doctest::Approx(2.0));
  const Location m2 = mirror_point({0, 0, 0}, l2);
  CHECK(m2.y == doctest::Approx(4.0).epsilon(1e-12));
}

TEST_CASE("perpendicular_bisector round trip over random pairs") {
  Rng rng(0xB15EC);
  for (int i = 0; i < 10000; ++i) {
    const Location p = random_point(rng, -10.0, 10.0);
    Location q = random_point(rng, -10.0, 10.0);
    if (distance(p, q) < 1e-6) q.x += 1.0;
    const Location m = mirror_point(p, perpendicular_bisector(p, q));
    CHECK(std::abs(m.x - q.x) <= 1e-9);
    CHECK(std::abs(m.y - q.y) <= 1e-9);
  }
}

TEST_CASE("perpendicular_bisector rejects degenerate pairs") {
  CHECK_THROWS_AS(perpendicular_bisector({1, 1, 0}, {1, 1, 0}), std::invalid_argument);
  CHECK_THROWS_AS(perpendicular_bisector({1, 1, 0}, {1.0, 1.0 + 1e-12, 0}),
                  std::invalid_argument);
}

TEST_CASE("segment_crosses basics") {
  const Wall w{{0, 0, 0}, {0, 2, 0}, 1.0};
  CHECK(segment_crosses({-1, 1, 0}, {1, 1, 0}, w));
  CHECK_FALSE(segment_crosses({-1, 3, 0}, {1, 3, 0}, w));
  // endpoint grazing counts as non-crossing
  CHECK_FALSE(segment_crosses({-1, 2, 0}, {1, 2, 0}, w));
  CHECK_FALSE(segment_crosses({-1, 1, 0}, {0, 1, 0}, w));
}

TEST_CASE("segment_crosses symmetry and oracle agreement") {
  Rng rng(0xC105E);
  int crossings = 0;
  for (int i = 0; i < 10000; ++i) {
    const Location p = random_point(rng, 0.0, 10.0);
    const Location q = random_point(rng, 0.0, 10.0);
    const Location a = random_point(rng, 0.0, 10.0);
    Location b = random_point(rng, 0.0, 10.0);
    if (distance(a, b) < 1e-6) b.x += 1.0;
    const Wall w{a, b, 1.0};
    const bool got = segment_crosses(p, q, w);
    CHECK(got == segment_crosses(q, p, w));
    CHECK(got == crosses_parametric(p, q, w));
    if (got) ++crossings;
  }
  CHECK(crossings > 500);  // the sample exercises both outcomes
}

TEST_CASE("visibility order 0 is unconditional") {
  const Environment env = hallway();
  CHECK(visibility({0.5, 0.5, 0}, {}, env, {9, 0.5, 0}));
  CHECK(visibility({-50, -50, 0}, {}, env, {50, 50, 0}));
}

TEST_CASE("visibility in the two-wall hallway") {
  const Environment env = hallway();
  const Location src{0.5, 0.5, 0};
  const Location ap{9.0, 0.5, 0};
  const Location mirror_long = mirror_point(src, line_of(env.walls[0]));    // (0.5, 1.5)
  const Location mirror_short = mirror_point(src, line_of(env.walls[1]));   // (0.5, -0.5)
  const Location mirror_double = mirror_point(mirror_short, line_of(env.walls[0]));

  CHECK(visibility(src, {}, env, ap));
  CHECK(visibility(mirror_long, {0}, env, ap));
  CHECK_FALSE(visibility(mirror_short, {1}, env, ap));  // bounce lands past the short wall
  CHECK(visibility(mirror_double, {1, 0}, env, ap));
}

TEST_CASE("visibility rejects unknown wall identifiers") {
  const Environment env = hallway();
  CHECK_THROWS_AS(visibility({0.5, 0.5, 0}, {7}, env, {9, 0.5, 0}), std::out_of_range);
  CHECK_THROWS_AS(visibility({0.5, 0.5, 0}, {-1}, env, {9, 0.5, 0}), std::out_of_range);
}

TEST_CASE("order-1 visibility matches the reflected-ray construction") {
  Rng rng(0xD00D);
  int visible = 0;
  for (int i = 0; i < 10000; ++i) {
    const Location p = random_point(rng, 0.0, 10.0);
    const Location q = random_point(rng, 0.0, 10.0);
    const Location a = random_point(rng, 0.0, 10.0);
    Location b = random_point(rng, 0.0, 10.0);
    if (distance(a, b) < 1e-6) b.y += 1.0;
    std::vector<Wall> walls;
    walls.emplace_back(a, b, 1.0);
    const Environment env{std::move(walls), 10.0, 10.0};
    const Location image = mirror_point(p, line_of(env.walls[0]));
    const bool got = visibility(image, {0}, env, q);
    CHECK(got == reflected_ray_exists(p, env.walls[0], q));
    if (got) ++visible;
  }
  CHECK(visible > 500);
}

}  // TEST_SUITE
