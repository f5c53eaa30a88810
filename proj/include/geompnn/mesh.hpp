#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace geompnn {

struct Point2 {
  double x = 0.0;
  double y = 0.0;

  Point2 operator+(const Point2& o) const { return {x + o.x, y + o.y}; }
  Point2 operator-(const Point2& o) const { return {x - o.x, y - o.y}; }
  bool operator==(const Point2& o) const = default;
};

double norm(const Point2& p);

/// The four predicted flow fields.
enum class FieldId { VelX = 0, VelY = 1, Pressure = 2, TurbVisc = 3 };
inline constexpr int kNumFields = 4;

const char* field_name(FieldId f);
FieldId parse_field(const std::string& name);

/// Per-point target values, column order (ux, uy, p, nut).
using TargetRow = std::array<double, 4>;

/// One simulation instance: volume mesh, surface subset, flow conditions,
/// and (optionally) the reference solution fields.
struct MeshCase {
  std::string case_id;
  std::vector<Point2> points;             // the volume mesh; includes surface points
  std::vector<std::size_t> surface_idx;   // indices of surface points, ascending
  std::vector<Point2> normals;            // unit on surface points, (0,0) elsewhere
  Point2 inlet_velocity{1.0, 0.0};
  std::vector<double> wall_distance;      // >= 0; 0 on surface points
  std::optional<std::vector<TargetRow>> targets;

  std::size_t size() const { return points.size(); }
  bool is_surface(std::size_t i) const;
};

/// Throws data_error if any MeshCase invariant is violated.
/// `source` is used to prefix messages (file path or case id).
void validate_case(const MeshCase& c, const std::string& source = "");

/// Reads one case from the columnar text format:
///   # case_id=<str>
///   # vinf=<f> <f>
///   x y nx ny is_surf d [ux uy p nut]
MeshCase load_case(const std::string& path);

/// Writes the same format, round-tripping doubles exactly.
void save_case(const MeshCase& c, const std::string& path);

/// Translates all points so the leading edge (the lowest-index surface point
/// attaining the minimum x) lands exactly at the origin.
MeshCase recentre(const MeshCase& c);

/// Index of the leading-edge point (argmin of x over the surface, lowest
/// point index on ties).
std::size_t leading_edge_index(const MeshCase& c);

struct SubsampleResult {
  MeshCase sampled;
  std::vector<std::size_t> index_map;  // sampled point i -> original point index
};

/// Keeps all surface points plus n randomly chosen non-surface points
/// (without replacement, seeded). Original point order is preserved.
SubsampleResult subsample(const MeshCase& c, std::size_t n, std::uint64_t seed);

/// Dataset manifest: one case-file path per line. Relative paths are resolved
/// against the manifest's directory.
std::vector<std::string> load_manifest(const std::string& path);
void save_manifest(const std::vector<std::string>& paths, const std::string& path);

}  // namespace geompnn
