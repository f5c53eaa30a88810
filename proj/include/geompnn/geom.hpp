#pragma once

#include <array>
#include <span>

#include "geompnn/mesh.hpp"

namespace geompnn {

/// Coordinates of one point in the leading- and trailing-edge frames.
struct FrameFeatures {
  Point2 lead_coords;   // x in the leading-edge frame (the mesh frame after recentre)
  Point2 trail_coords;  // x - trailing edge
  double lead_norm = 0.0;
  double trail_norm = 0.0;
};

/// x-axis partition of the mesh relative to the airfoil.
enum class Region { Freestream, OverAirfoil, Downstream };

/// 2x2 rotation, row-major.
struct Rotation2 {
  std::array<double, 4> m{1.0, 0.0, 0.0, 1.0};

  Point2 apply(const Point2& p) const {
    return {m[0] * p.x + m[1] * p.y, m[2] * p.x + m[3] * p.y};
  }
  static Rotation2 identity() { return {}; }
};

/// Rightmost surface point (lowest index on ties).
Point2 trailing_edge(const MeshCase& c);
std::size_t trailing_edge_index(const MeshCase& c);

FrameFeatures frame_features(const Point2& x, const Point2& trail);

/// Freestream if x < lead.x, OverAirfoil on [lead.x, trail.x], Downstream beyond.
Region classify_region(const Point2& x, const Point2& lead, const Point2& trail);

/// Polar angle in [0, 2*pi); 0 at the origin.
double polar_angle(const Point2& x);

/// Angles of x rotated by 0, 90, 180 and 270 degrees (counterclockwise),
/// i.e. angles with respect to the four polar axes (1,0),(0,1),(-1,0),(0,-1).
std::array<double, 4> four_axis_angles(const Point2& x);

/// Rotation taking v_inf onto the positive x-axis. Throws data_error on a
/// null velocity.
Rotation2 canonical_rotation(const Point2& v_inf);

/// Exact minimum distance from x to the closed polyline through `vertices`
/// (the segment between the last and first vertex is included when
/// `closed` is true).
double wall_distance_polyline(const Point2& x, std::span<const Point2> vertices,
                              bool closed = true);

/// Distance from x to the segment [a, b].
double point_segment_distance(const Point2& x, const Point2& a, const Point2& b);

}  // namespace geompnn
