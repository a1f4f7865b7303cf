#pragma once

#include <string>
#include <vector>

#include "terrapath/geometry.hpp"

namespace terrapath {

// Immutable after construction; safe to share read-only across threads.
struct PointCloud {
  std::vector<Point3> points;
  Aabb bounds;  // undefined (invalid) for an empty cloud

  bool empty() const { return points.empty(); }
  std::size_t size() const { return points.size(); }

  void recompute_bounds() {
    bounds = Aabb{};
    for (const auto& p : points) bounds.extend(p);
  }

  static PointCloud from_points(std::vector<Point3> pts) {
    PointCloud c;
    c.points = std::move(pts);
    c.recompute_bounds();
    return c;
  }
};

enum class CloudFormat { XyzCsv, PcdAscii, PlyAscii, Auto };

struct ParseReport {
  std::size_t total_rows = 0;
  std::size_t dropped_non_finite = 0;
  bool empty_cloud = false;
};

struct LoadResult {
  PointCloud cloud;
  ParseReport report;
};

// strict: non-finite coordinates raise FormatError instead of being dropped.
LoadResult load_cloud(const std::string& path, CloudFormat format = CloudFormat::Auto,
                      bool strict = false);

void save_cloud(const PointCloud& cloud, const std::string& path,
                CloudFormat format = CloudFormat::XyzCsv);

// Throws InvalidTransformError if the rotation fails the orthonormality check.
PointCloud transform_cloud(const PointCloud& cloud, const RigidTransform& tf);

}  // namespace terrapath
