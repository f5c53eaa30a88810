#include "geompnn/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "geompnn/errors.hpp"
#include "geompnn/rng.hpp"

namespace geompnn {

double norm(const Point2& p) { return std::hypot(p.x, p.y); }

const char* field_name(FieldId f) {
  switch (f) {
    case FieldId::VelX: return "ux";
    case FieldId::VelY: return "uy";
    case FieldId::Pressure: return "p";
    case FieldId::TurbVisc: return "nut";
  }
  return "?";
}

FieldId parse_field(const std::string& name) {
  if (name == "ux") return FieldId::VelX;
  if (name == "uy") return FieldId::VelY;
  if (name == "p") return FieldId::Pressure;
  if (name == "nut") return FieldId::TurbVisc;
  throw data_error("unknown field '" + name + "' (expected ux, uy, p or nut)");
}

bool MeshCase::is_surface(std::size_t i) const {
  return std::binary_search(surface_idx.begin(), surface_idx.end(), i);
}

namespace {

constexpr double kNormalTol = 1e-9;
constexpr double kWallTol = 1e-9;

std::string row_msg(const std::string& source, std::size_t row, const std::string& what) {
  std::ostringstream os;
  if (!source.empty()) os << source << ": ";
  os << "row " << row << ": " << what;
  return os.str();
}

}  // namespace

void validate_case(const MeshCase& c, const std::string& source) {
  const std::size_t n = c.points.size();
  auto fail = [&](const std::string& what) {
    throw data_error(source.empty() ? what : source + ": " + what);
  };
  if (c.surface_idx.empty()) fail("surface set is empty");
  if (c.normals.size() != n) fail("normals size mismatch");
  if (c.wall_distance.size() != n) fail("wall_distance size mismatch");
  if (c.targets && c.targets->size() != n) fail("targets size mismatch");

  for (std::size_t k = 0; k < c.surface_idx.size(); ++k) {
    if (c.surface_idx[k] >= n) fail("surface index out of range");
    if (k > 0 && c.surface_idx[k] <= c.surface_idx[k - 1])
      fail("surface indices not strictly ascending");
  }
  for (std::size_t i = 0; i < n; ++i) {
    const Point2& p = c.points[i];
    if (!std::isfinite(p.x) || !std::isfinite(p.y))
      throw data_error(row_msg(source, i, "non-finite coordinate"));
    double nn = norm(c.normals[i]);
    if (c.is_surface(i)) {
      if (std::abs(nn - 1.0) > kNormalTol)
        throw data_error(row_msg(source, i, "normal not unit length"));
      if (std::abs(c.wall_distance[i]) > kWallTol)
        throw data_error(row_msg(source, i, "nonzero wall distance on surface point"));
    } else {
      if (nn != 0.0)
        throw data_error(row_msg(source, i, "nonzero normal off the surface"));
    }
    if (!(c.wall_distance[i] >= 0.0))
      throw data_error(row_msg(source, i, "negative wall distance"));
    if (c.targets) {
      for (double t : (*c.targets)[i])
        if (!std::isfinite(t)) throw data_error(row_msg(source, i, "non-finite target"));
    }
  }
  if (!std::isfinite(c.inlet_velocity.x) || !std::isfinite(c.inlet_velocity.y))
    fail("non-finite inlet velocity");
}

MeshCase load_case(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw data_error("cannot open case file '" + path + "'");

  MeshCase c;
  bool have_vinf = false;
  std::optional<bool> has_targets;
  std::string line;
  std::size_t data_row = 0;
  std::size_t line_no = 0;

  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::string body = line.substr(1);
      auto eq = body.find('=');
      if (eq == std::string::npos) continue;
      std::string key = body.substr(0, eq);
      key.erase(0, key.find_first_not_of(" \t"));
      key.erase(key.find_last_not_of(" \t") + 1);
      std::string value = body.substr(eq + 1);
      if (key == "case_id") {
        value.erase(0, value.find_first_not_of(" \t"));
        c.case_id = value;
      } else if (key == "vinf") {
        std::istringstream vs(value);
        if (!(vs >> c.inlet_velocity.x >> c.inlet_velocity.y))
          throw data_error(path + ": line " + std::to_string(line_no) + ": bad vinf header");
        have_vinf = true;
      }
      continue;
    }

    std::istringstream ls(line);
    std::vector<double> cols;
    double v;
    while (ls >> v) cols.push_back(v);
    if (!ls.eof()) {
      throw data_error(row_msg(path, data_row, "malformed value on line " + std::to_string(line_no)));
    }
    if (cols.size() != 6 && cols.size() != 10) {
      throw data_error(row_msg(path, data_row,
                               "wrong column count " + std::to_string(cols.size()) +
                                   " (expected 6 or 10) on line " + std::to_string(line_no)));
    }
    bool row_has_targets = cols.size() == 10;
    if (!has_targets) {
      has_targets = row_has_targets;
      if (row_has_targets) c.targets.emplace();
    } else if (*has_targets != row_has_targets) {
      throw data_error(row_msg(path, data_row, "inconsistent target columns"));
    }

    c.points.push_back({cols[0], cols[1]});
    c.normals.push_back({cols[2], cols[3]});
    if (cols[4] != 0.0 && cols[4] != 1.0)
      throw data_error(row_msg(path, data_row, "is_surf must be 0 or 1"));
    if (cols[4] == 1.0) c.surface_idx.push_back(data_row);
    c.wall_distance.push_back(cols[5]);
    if (row_has_targets) c.targets->push_back({cols[6], cols[7], cols[8], cols[9]});
    ++data_row;
  }

  if (!have_vinf) throw data_error(path + ": missing '# vinf=' header");
  validate_case(c, path);
  return c;
}

void save_case(const MeshCase& c, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw data_error("cannot write case file '" + path + "'");
  char buf[512];
  out << "# case_id=" << c.case_id << "\n";
  std::snprintf(buf, sizeof buf, "# vinf=%.17g %.17g\n", c.inlet_velocity.x, c.inlet_velocity.y);
  out << buf;
  for (std::size_t i = 0; i < c.points.size(); ++i) {
    int is_surf = c.is_surface(i) ? 1 : 0;
    std::snprintf(buf, sizeof buf, "%.17g %.17g %.17g %.17g %d %.17g", c.points[i].x,
                  c.points[i].y, c.normals[i].x, c.normals[i].y, is_surf, c.wall_distance[i]);
    out << buf;
    if (c.targets) {
      const TargetRow& t = (*c.targets)[i];
      std::snprintf(buf, sizeof buf, " %.17g %.17g %.17g %.17g", t[0], t[1], t[2], t[3]);
      out << buf;
    }
    out << "\n";
  }
  if (!out) throw data_error("write failed for '" + path + "'");
}

std::size_t leading_edge_index(const MeshCase& c) {
  if (c.surface_idx.empty()) throw data_error("leading_edge_index: empty surface");
  std::size_t best = c.surface_idx[0];
  for (std::size_t i : c.surface_idx) {
    if (c.points[i].x < c.points[best].x) best = i;  // strict: lowest index wins ties
  }
  return best;
}

MeshCase recentre(const MeshCase& c) {
  Point2 lead = c.points[leading_edge_index(c)];
  MeshCase out = c;
  for (Point2& p : out.points) p = p - lead;
  return out;
}

SubsampleResult subsample(const MeshCase& c, std::size_t n, std::uint64_t seed) {
  const std::size_t total = c.points.size();
  std::vector<std::size_t> volume_only;
  volume_only.reserve(total - c.surface_idx.size());
  for (std::size_t i = 0; i < total; ++i)
    if (!c.is_surface(i)) volume_only.push_back(i);

  Rng rng(mix_seed(seed, hash_label("subsample")));
  std::vector<std::size_t> chosen = rng.sample_without_replacement(volume_only.size(), n);

  std::vector<std::size_t> keep = c.surface_idx;
  keep.reserve(keep.size() + chosen.size());
  for (std::size_t k : chosen) keep.push_back(volume_only[k]);
  std::sort(keep.begin(), keep.end());

  SubsampleResult res;
  res.index_map = keep;
  MeshCase& s = res.sampled;
  s.case_id = c.case_id;
  s.inlet_velocity = c.inlet_velocity;
  s.points.reserve(keep.size());
  s.normals.reserve(keep.size());
  s.wall_distance.reserve(keep.size());
  if (c.targets) s.targets.emplace();
  for (std::size_t new_i = 0; new_i < keep.size(); ++new_i) {
    std::size_t old_i = keep[new_i];
    s.points.push_back(c.points[old_i]);
    s.normals.push_back(c.normals[old_i]);
    s.wall_distance.push_back(c.wall_distance[old_i]);
    if (c.targets) s.targets->push_back((*c.targets)[old_i]);
    if (c.is_surface(old_i)) s.surface_idx.push_back(new_i);
  }
  return res;
}

std::vector<std::string> load_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw data_error("cannot open manifest '" + path + "'");
  std::filesystem::path base = std::filesystem::path(path).parent_path();
  std::vector<std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::filesystem::path p(line);
    out.push_back(p.is_absolute() ? p.string() : (base / p).string());
  }
  if (out.empty()) throw data_error("manifest '" + path + "' lists no cases");
  return out;
}

void save_manifest(const std::vector<std::string>& paths, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw data_error("cannot write manifest '" + path + "'");
  for (const std::string& p : paths) out << p << "\n";
}

}  // namespace geompnn
