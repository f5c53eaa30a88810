#include "geompnn/geom.hpp"

#include <cmath>

#include "geompnn/errors.hpp"

namespace geompnn {

namespace {
constexpr double kTwoPi = 6.283185307179586476925286766559;
}

std::size_t trailing_edge_index(const MeshCase& c) {
  if (c.surface_idx.empty()) throw data_error("trailing_edge: empty surface");
  std::size_t best = c.surface_idx[0];
  for (std::size_t i : c.surface_idx) {
    if (c.points[i].x > c.points[best].x) best = i;  // strict: lowest index wins ties
  }
  return best;
}

Point2 trailing_edge(const MeshCase& c) { return c.points[trailing_edge_index(c)]; }

FrameFeatures frame_features(const Point2& x, const Point2& trail) {
  FrameFeatures f;
  f.lead_coords = x;
  f.trail_coords = x - trail;
  f.lead_norm = norm(f.lead_coords);
  f.trail_norm = norm(f.trail_coords);
  return f;
}

Region classify_region(const Point2& x, const Point2& lead, const Point2& trail) {
  if (x.x < lead.x) return Region::Freestream;
  if (x.x <= trail.x) return Region::OverAirfoil;
  return Region::Downstream;
}

double polar_angle(const Point2& x) {
  if (x.x == 0.0 && x.y == 0.0) return 0.0;
  double a = std::atan2(x.y, x.x);
  if (a < 0.0) a += kTwoPi;
  return a;
}

std::array<double, 4> four_axis_angles(const Point2& x) {
  // Rotate the point, then take the angle; rotations are counterclockwise.
  Point2 r90{-x.y, x.x};
  Point2 r180{-x.x, -x.y};
  Point2 r270{x.y, -x.x};
  return {polar_angle(x), polar_angle(r90), polar_angle(r180), polar_angle(r270)};
}

Rotation2 canonical_rotation(const Point2& v_inf) {
  double n = norm(v_inf);
  if (n == 0.0) throw data_error("cannot canonicalize null velocity");
  Rotation2 r;
  r.m = {v_inf.x / n, v_inf.y / n, -v_inf.y / n, v_inf.x / n};
  return r;
}

double point_segment_distance(const Point2& x, const Point2& a, const Point2& b) {
  double abx = b.x - a.x, aby = b.y - a.y;
  double apx = x.x - a.x, apy = x.y - a.y;
  double len2 = abx * abx + aby * aby;
  if (len2 == 0.0) return std::hypot(apx, apy);
  double t = (apx * abx + apy * aby) / len2;
  if (t < 0.0) t = 0.0;
  if (t > 1.0) t = 1.0;
  double cx = a.x + t * abx, cy = a.y + t * aby;
  return std::hypot(x.x - cx, x.y - cy);
}

double wall_distance_polyline(const Point2& x, std::span<const Point2> vertices, bool closed) {
  if (vertices.size() < 2) throw data_error("wall_distance_polyline: need >= 2 vertices");
  double best = point_segment_distance(x, vertices[0], vertices[1]);
  for (std::size_t i = 1; i + 1 < vertices.size(); ++i) {
    double d = point_segment_distance(x, vertices[i], vertices[i + 1]);
    if (d < best) best = d;
  }
  if (closed) {
    double d = point_segment_distance(x, vertices[vertices.size() - 1], vertices[0]);
    if (d < best) best = d;
  }
  return best;
}

}  // namespace geompnn
