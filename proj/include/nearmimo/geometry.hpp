// SPDX-License-Identifier: Apache-2.0
// nearmimo: near-field distributed MIMO channel simulation and estimation

#pragma once

#include <vector>

namespace nearmimo {

/// A point in 3D space, in meters. The simulation harness works in the
/// z = 0 plane; z is carried so that distances stay fully general.
struct Location {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
};

/// Euclidean distance between two points (meters).
double distance(const Location& p, const Location& q);

/// An infinite reflecting line in the z = 0 plane, given by an anchor point
/// and a unit normal (z component zero).
struct WallLine {
  Location point;
  double normal_x = 1.0;
  double normal_y = 0.0;
};

/// Reflection of p across the line. Involutive: mirroring twice returns p.
Location mirror_point(const Location& p, const WallLine& line);

/// The line of points equidistant from p and q, oriented so that
/// mirror_point(p, result) == q. Throws std::invalid_argument when the pair
/// is degenerate (closer than 1e-9 m in the plane).
WallLine perpendicular_bisector(const Location& p, const Location& q);

/// A finite reflecting segment with a real amplitude reflection coefficient.
/// Walls reflect from both sides.
struct Wall {
  Wall(Location a, Location b, double reflection_coefficient);

  Location a;
  Location b;
  double reflection_coefficient = 1.0;
};

/// Supporting infinite line of a wall segment.
WallLine line_of(const Wall& w);

/// Ordered wall indices that generated an image point; the empty path is the
/// direct (order-0) image. Consecutive entries are always distinct.
using WallPath = std::vector<int>;

/// Reflecting walls plus the room bounding box [0,width] x [0,depth].
struct Environment {
  Environment(std::vector<Wall> walls, double width, double depth);

  std::vector<Wall> walls;
  double width = 0.0;
  double depth = 0.0;
};

/// True iff the open segment p-q properly crosses the open segment of w.
/// Grazing contact (an endpoint exactly on the other segment, or collinear
/// overlap) counts as non-crossing; decided by strict orientation signs.
bool segment_crosses(const Location& p, const Location& q, const Wall& w);

/// Visibility-sector indicator for an image point: true iff the unfolded ray
/// from the image to `query` passes through every generating wall segment in
/// turn. An empty path (direct image) is visible from everywhere.
/// Throws std::out_of_range for wall identifiers not present in env.
bool visibility(const Location& image, const WallPath& path,
                const Environment& env, const Location& query);

}  // namespace nearmimo
