#pragma once

#include <Eigen/Dense>
#include <span>
#include <vector>

#include "terrapath/hybrid_map.hpp"
#include "terrapath/point_cloud.hpp"
#include "terrapath/robot_spec.hpp"
#include "terrapath/voxel_grid.hpp"

namespace terrapath {

// Local plane through a coarse cell's retained points: centroid, the
// minimum-eigenvalue direction of the scatter matrix as unit normal
// (oriented z >= 0), and the inclination rho = arccos(normal.z).
struct FittedPlane {
  Eigen::Vector3d centroid = Eigen::Vector3d::Zero();
  Eigen::Vector3d normal = Eigen::Vector3d::UnitZ();
  double rho = 0.0;  // [0, pi/2]
};

// Throws DegenerateCellError for < 3 points or (near-)collinear input.
FittedPlane fit_plane(std::span<const Point3> points);

enum class CoarseClass { Steep, Traversable };

// Steep iff rho > rho_max (strict).
CoarseClass classify_coarse(const FittedPlane& plane, const RobotSpec& spec);

// Signed plane-distance statistics of one fine cell.
struct FineCellStats {
  double h = 0.0;      // max(d) - min(d), pits and bumps both show up
  double r_sum = 0.0;  // sum |d|
  std::size_t n = 0;
  double mean_abs_residual = 0.0;
};

FineCellStats fine_stats(std::span<const Point3> points,
                         const FittedPlane& plane);

// tau = 0 when stats.h exceeds h_max (cell becomes Obstacle); otherwise
// 1 - W_r * r_sum / r_max - W_rho * rho / rho_max, clamped to [0, 1].
double static_traversability(const FineCellStats& stats, double rho,
                             const RobotSpec& spec, double r_max);

struct AssessOptions {
  double fine_resolution = 0.5;  // [m]
  int jobs = 1;
};

struct AssessStats {
  double resolved_r_max = 0.0;
  double mean_points_per_fine_cell = 0.0;
  std::size_t obstacle_cells = 0;
  std::size_t terrain_cells = 0;
  std::size_t unknown_cells = 0;
  std::size_t degenerate_coarse_cells = 0;
  std::size_t steep_coarse_cells = 0;
};

// Two-phase assessment over the coarse grid: plane fit + steepness per coarse
// cell, then per-fine-cell height spread / roughness / static traversability.
HybridMap assess(const PointCloud& cloud, const CoarseGrid& grid,
                 const RobotSpec& spec, const AssessOptions& options = {},
                 AssessStats* stats_out = nullptr);

}  // namespace terrapath
