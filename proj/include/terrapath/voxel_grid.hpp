#pragma once

#include <cstdint>
#include <vector>

#include "terrapath/point_cloud.hpp"
#include "terrapath/robot_spec.hpp"

namespace terrapath {

// Footprint-covering coarse grid dimensions.
struct VoxelDims {
  double length = 0.0;  // G_l [m]
  double width = 0.0;   // G_w, equal to G_l
  double height = 0.0;  // G_h, vertical window extent [m]
};

// G_l = G_w = sqrt(R_l^2 + R_w^2); G_h = G_l * tan(rho_max).
VoxelDims voxel_dims(const RobotSpec& spec);

// One XY column of the coarse grid with its ground-tracking vertical window.
// Only points inside [z_ground, z_ground + G_h] are retained; overhanging
// structure above the window (and stray returns below it) are excluded.
struct CoarseCell {
  int row = 0;                          // index over y
  int col = 0;                          // index over x
  double z_ground = 0.0;                // base of the vertical window
  std::vector<std::uint32_t> retained;  // indices into the source cloud
  std::uint32_t excluded_count = 0;     // column points outside the window
  bool insufficient = false;            // fewer than 3 retained points
};

struct SegmentOptions {
  // z_ground = this percentile of column z values; 0 selects the strict
  // minimum (paper-literal behaviour)
  double z_ground_percentile = 2.0;
  // disables the vertical window entirely: every column point is retained
  // (used to demonstrate the overhang-contamination failure mode)
  bool dynamic_window = true;
};

// Coarse grid anchored at the cloud AABB min corner, row-major over (row, col).
// Single layer: at most one cell per XY index; empty columns are absent.
struct CoarseGrid {
  double origin_x = 0.0;
  double origin_y = 0.0;
  double cell_size = 0.0;    // G_l = G_w
  double window_height = 0.0;  // G_h
  int rows = 0;
  int cols = 0;
  std::vector<CoarseCell> cells;          // populated columns only
  std::vector<std::int32_t> cell_of;      // rows*cols -> index into cells, -1 absent

  const CoarseCell* at(int row, int col) const {
    if (row < 0 || col < 0 || row >= rows || col >= cols) return nullptr;
    const auto idx = cell_of[static_cast<std::size_t>(row) * cols + col];
    return idx < 0 ? nullptr : &cells[idx];
  }
};

// Throws EmptyCloudError on an empty cloud.
CoarseGrid segment(const PointCloud& cloud, const VoxelDims& dims,
                   const SegmentOptions& options = {});

}  // namespace terrapath
