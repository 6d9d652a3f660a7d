// SPDX-License-Identifier: Apache-2.0
// nearmimo: near-field distributed MIMO channel simulation and estimation

#include "nearmimo/geometry.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace nearmimo {

double distance(const Location& p, const Location& q) {
  const double dx = q.x - p.x;
  const double dy = q.y - p.y;
  const double dz = q.z - p.z;
  return std::sqrt(dx * dx + dy * dy + dz * dz);
}

Location mirror_point(const Location& p, const WallLine& line) {
  const double n2 = line.normal_x * line.normal_x + line.normal_y * line.normal_y;
  if (std::abs(n2 - 1.0) > 1e-9)
    throw std::invalid_argument("mirror_point: line normal is not unit length");
  const double s =
      (p.x - line.point.x) * line.normal_x + (p.y - line.point.y) * line.normal_y;
  return {p.x - 2.0 * s * line.normal_x, p.y - 2.0 * s * line.normal_y, p.z};
}

WallLine perpendicular_bisector(const Location& p, const Location& q) {
  const double dx = q.x - p.x;
  const double dy = q.y - p.y;
  const double len = std::hypot(dx, dy);
  if (len < 1e-9)
    throw std::invalid_argument("perpendicular_bisector: points coincide");
  return {{(p.x + q.x) / 2.0, (p.y + q.y) / 2.0, (p.z + q.z) / 2.0},
          dx / len, dy / len};
}

Wall::Wall(Location a_, Location b_, double reflection_coefficient_)
    : a(a_), b(b_), reflection_coefficient(reflection_coefficient_) {
  if (a.z != 0.0 || b.z != 0.0)
    throw std::invalid_argument("Wall: endpoints must lie in the z=0 plane");
  if (distance(a, b) < 1e-9)
    throw std::invalid_argument("Wall: endpoints coincide");
  if (!(reflection_coefficient > 0.0 && reflection_coefficient <= 1.0))
    throw std::invalid_argument("Wall: reflection coefficient must be in (0, 1]");
}

WallLine line_of(const Wall& w) {
  const double dx = w.b.x - w.a.x;
  const double dy = w.b.y - w.a.y;
  const double len = std::hypot(dx, dy);
  return {w.a, -dy / len, dx / len};
}

Environment::Environment(std::vector<Wall> walls_, double width_, double depth_)
    : walls(std::move(walls_)), width(width_), depth(depth_) {
  if (!(width > 0.0) || !(depth > 0.0))
    throw std::invalid_argument("Environment: room dimensions must be positive");
}

namespace {

double orient2d(const Location& a, const Location& b, const Location& c) {
  return (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x);
}

void require_planar(const Location& p, const char* what) {
  if (p.z != 0.0)
    throw std::invalid_argument(std::string(what) + ": point must lie in the z=0 plane");
}

// Intersection of the supporting lines; only meaningful when
// segment_crosses(p, q, w) already holds (denominator nonzero).
Location crossing_point(const Location& p, const Location& q, const Wall& w) {
  const double rx = q.x - p.x;
  const double ry = q.y - p.y;
  const double sx = w.b.x - w.a.x;
  const double sy = w.b.y - w.a.y;
  const double denom = rx * sy - ry * sx;
  const double t = ((w.a.x - p.x) * sy - (w.a.y - p.y) * sx) / denom;
  return {p.x + t * rx, p.y + t * ry, 0.0};
}

}  // namespace

bool segment_crosses(const Location& p, const Location& q, const Wall& w) {
  require_planar(p, "segment_crosses");
  require_planar(q, "segment_crosses");
  const double d1 = orient2d(p, q, w.a);
  const double d2 = orient2d(p, q, w.b);
  const double d3 = orient2d(w.a, w.b, p);
  const double d4 = orient2d(w.a, w.b, q);
  return ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0)) &&
         ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0));
}

bool visibility(const Location& image, const WallPath& path,
                const Environment& env, const Location& query) {
  for (int id : path) {
    if (id < 0 || static_cast<std::size_t>(id) >= env.walls.size())
      throw std::out_of_range("visibility: unknown wall identifier " + std::to_string(id));
  }
  // Walk the reflection chain backwards: the ray into `query` must exit
  // through the last generating wall, then the peeled image through the
  // previous one, and so on down to the physical point.
  Location img = image;
  Location target = query;
  for (std::size_t i = path.size(); i-- > 0;) {
    const Wall& w = env.walls[static_cast<std::size_t>(path[i])];
    if (!segment_crosses(img, target, w)) return false;
    target = crossing_point(img, target, w);
    img = mirror_point(img, line_of(w));
  }
  return true;
}

}  // namespace nearmimo
