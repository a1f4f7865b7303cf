#include "terrapath/point_cloud.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "terrapath/errors.hpp"

namespace terrapath {

namespace {

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return s;
}

std::vector<std::string> split_ws(const std::string& line) {
  std::vector<std::string> out;
  std::istringstream is(line);
  std::string tok;
  while (is >> tok) out.push_back(tok);
  return out;
}

bool parse_double(const std::string& s, double& out) {
  char* end = nullptr;
  out = std::strtod(s.c_str(), &end);
  return end && *end == '\0' && end != s.c_str();
}

CloudFormat detect_format(const std::string& path, std::istream& in) {
  const std::string ext = lower(std::filesystem::path(path).extension().string());
  if (ext == ".pcd") return CloudFormat::PcdAscii;
  if (ext == ".ply") return CloudFormat::PlyAscii;
  if (ext == ".csv" || ext == ".xyz" || ext == ".txt") return CloudFormat::XyzCsv;
  // Sniff the first non-empty line.
  std::string line;
  const auto pos = in.tellg();
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    break;
  }
  in.clear();
  in.seekg(pos);
  const std::string l = lower(line);
  if (l.rfind("ply", 0) == 0) return CloudFormat::PlyAscii;
  if (l.find(".pcd") != std::string::npos || l.rfind("version", 0) == 0)
    return CloudFormat::PcdAscii;
  return CloudFormat::XyzCsv;
}

void add_point(std::vector<Point3>& pts, ParseReport& report, const Point3& p,
               bool strict, std::size_t line_no) {
  ++report.total_rows;
  if (!p.finite()) {
    if (strict) throw FormatError("non-finite coordinate", line_no);
    ++report.dropped_non_finite;
    return;
  }
  pts.push_back(p);
}

LoadResult load_xyz_csv(std::istream& in, bool strict) {
  LoadResult res;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    // allow comma or whitespace separators
    std::replace(line.begin(), line.end(), ',', ' ');
    auto toks = split_ws(line);
    if (toks.empty()) continue;
    if (toks.size() < 3) throw FormatError("expected 3 coordinates", line_no);
    Point3 p;
    if (!parse_double(toks[0], p.x) || !parse_double(toks[1], p.y) ||
        !parse_double(toks[2], p.z))
      throw FormatError("invalid number", line_no);
    add_point(res.cloud.points, res.report, p, strict, line_no);
  }
  return res;
}

LoadResult load_pcd_ascii(std::istream& in, bool strict) {
  LoadResult res;
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::string> fields;
  std::size_t expected = 0;
  bool data_started = false;
  int ix = -1, iy = -1, iz = -1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    auto toks = split_ws(line);
    if (toks.empty()) continue;
    if (!data_started) {
      const std::string key = lower(toks[0]);
      if (key == "fields") {
        fields.assign(toks.begin() + 1, toks.end());
        for (std::size_t i = 0; i < fields.size(); ++i) {
          const std::string f = lower(fields[i]);
          if (f == "x") ix = static_cast<int>(i);
          if (f == "y") iy = static_cast<int>(i);
          if (f == "z") iz = static_cast<int>(i);
        }
      } else if (key == "count") {
        for (std::size_t i = 1; i < toks.size(); ++i)
          if (toks[i] != "1")
            throw FormatError("PCD COUNT > 1 not supported", line_no);
      } else if (key == "points") {
        expected = std::stoul(toks[1]);
      } else if (key == "data") {
        if (lower(toks[1]) != "ascii")
          throw FormatError("only ascii PCD data supported", line_no);
        data_started = true;
        if (ix < 0 || iy < 0 || iz < 0)
          throw FormatError("PCD header missing x/y/z fields", line_no);
      }
      continue;
    }
    if (toks.size() < fields.size())
      throw FormatError("row has fewer columns than FIELDS", line_no);
    Point3 p;
    if (!parse_double(toks[ix], p.x) || !parse_double(toks[iy], p.y) ||
        !parse_double(toks[iz], p.z))
      throw FormatError("invalid number", line_no);
    add_point(res.cloud.points, res.report, p, strict, line_no);
  }
  if (!data_started) throw FormatError("PCD file has no DATA section");
  if (expected && res.report.total_rows != expected)
    throw FormatError("PCD point count mismatch: header says " +
                      std::to_string(expected) + ", file has " +
                      std::to_string(res.report.total_rows));
  return res;
}

LoadResult load_ply_ascii(std::istream& in, bool strict) {
  LoadResult res;
  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line) || lower(line).rfind("ply", 0) != 0)
    throw FormatError("missing ply magic", 1);
  ++line_no;
  std::size_t vertex_count = 0;
  int ix = -1, iy = -1, iz = -1;
  int prop_index = 0;
  bool in_vertex_element = false;
  while (std::getline(in, line)) {
    ++line_no;
    auto toks = split_ws(line);
    if (toks.empty()) continue;
    const std::string key = lower(toks[0]);
    if (key == "comment") continue;
    if (key == "format") {
      if (toks.size() < 2 || lower(toks[1]) != "ascii")
        throw FormatError("only ascii PLY supported", line_no);
    } else if (key == "element") {
      in_vertex_element = toks.size() >= 3 && lower(toks[1]) == "vertex";
      if (in_vertex_element) vertex_count = std::stoul(toks[2]);
    } else if (key == "property" && in_vertex_element) {
      const std::string name = lower(toks.back());
      if (name == "x") ix = prop_index;
      if (name == "y") iy = prop_index;
      if (name == "z") iz = prop_index;
      ++prop_index;
    } else if (key == "end_header") {
      break;
    }
  }
  if (ix < 0 || iy < 0 || iz < 0)
    throw FormatError("PLY vertex element missing x/y/z properties");
  for (std::size_t k = 0; k < vertex_count; ++k) {
    if (!std::getline(in, line))
      throw FormatError("unexpected end of PLY vertex data", line_no);
    ++line_no;
    auto toks = split_ws(line);
    if (static_cast<int>(toks.size()) <= std::max({ix, iy, iz}))
      throw FormatError("short PLY vertex row", line_no);
    Point3 p;
    if (!parse_double(toks[ix], p.x) || !parse_double(toks[iy], p.y) ||
        !parse_double(toks[iz], p.z))
      throw FormatError("invalid number", line_no);
    add_point(res.cloud.points, res.report, p, strict, line_no);
  }
  return res;
}

}  // namespace

LoadResult load_cloud(const std::string& path, CloudFormat format, bool strict) {
  std::ifstream in(path);
  if (!in) throw FileNotFoundError(path);
  if (format == CloudFormat::Auto) format = detect_format(path, in);
  LoadResult res;
  switch (format) {
    case CloudFormat::XyzCsv: res = load_xyz_csv(in, strict); break;
    case CloudFormat::PcdAscii: res = load_pcd_ascii(in, strict); break;
    case CloudFormat::PlyAscii: res = load_ply_ascii(in, strict); break;
    case CloudFormat::Auto: break;  // unreachable
  }
  res.cloud.recompute_bounds();
  res.report.empty_cloud = res.cloud.empty();
  return res;
}

void save_cloud(const PointCloud& cloud, const std::string& path,
                CloudFormat format) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open for writing: " + path);
  char buf[96];
  auto row = [&](const Point3& p, const char* fmt) {
    std::snprintf(buf, sizeof(buf), fmt, p.x, p.y, p.z);
    out << buf;
  };
  switch (format) {
    case CloudFormat::XyzCsv:
      for (const auto& p : cloud.points) row(p, "%.17g,%.17g,%.17g\n");
      break;
    case CloudFormat::PcdAscii:
      out << "# .PCD v0.7 - Point Cloud Data file format\n"
          << "VERSION 0.7\nFIELDS x y z\nSIZE 8 8 8\nTYPE F F F\nCOUNT 1 1 1\n"
          << "WIDTH " << cloud.size() << "\nHEIGHT 1\n"
          << "VIEWPOINT 0 0 0 1 0 0 0\nPOINTS " << cloud.size()
          << "\nDATA ascii\n";
      for (const auto& p : cloud.points) row(p, "%.17g %.17g %.17g\n");
      break;
    case CloudFormat::PlyAscii:
      out << "ply\nformat ascii 1.0\nelement vertex " << cloud.size()
          << "\nproperty double x\nproperty double y\nproperty double z\n"
          << "end_header\n";
      for (const auto& p : cloud.points) row(p, "%.17g %.17g %.17g\n");
      break;
    case CloudFormat::Auto:
      throw IoError("save_cloud requires an explicit format");
  }
  if (!out) throw IoError("write failed: " + path);
}

PointCloud transform_cloud(const PointCloud& cloud, const RigidTransform& tf) {
  if (!tf.is_rigid())
    throw InvalidTransformError("transform is not a rigid SE(3) motion");
  PointCloud out;
  out.points.reserve(cloud.size());
  for (const auto& p : cloud.points) out.points.push_back(tf.apply(p));
  out.recompute_bounds();
  return out;
}

}  // namespace terrapath
