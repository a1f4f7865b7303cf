#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <limits>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "terrapath/robot_spec.hpp"

namespace terrapath {

enum class CellClass : std::uint8_t { Unknown = 0, Obstacle = 1, Terrain = 2 };

// Value view of one cell. Terrain cells carry the full layer set; Obstacle
// cells carry only the single-layer zero traversability mark; Unknown cells
// carry nothing.
struct CellState {
  CellClass cls = CellClass::Unknown;
  Eigen::Vector3d normal = Eigen::Vector3d::Zero();
  double r_sum = 0.0;
  double tau = 0.0;
  double elevation = 0.0;
};

// Fused 2D-obstacle / 2.5D-terrain raster. Cell (row, col) spans
// [origin_x + col*res, origin_x + (col+1)*res) x [origin_y + row*res, ...);
// row index increases with y. Immutable after construction; the obstacle
// distance field is built lazily on first use (race-free, built once).
class HybridMap {
 public:
  HybridMap() = default;
  HybridMap(double origin_x, double origin_y, double resolution, int width,
            int height);

  HybridMap(const HybridMap& other);
  HybridMap& operator=(const HybridMap& other);
  HybridMap(HybridMap&&) = default;
  HybridMap& operator=(HybridMap&&) = default;

  double origin_x() const { return origin_x_; }
  double origin_y() const { return origin_y_; }
  double resolution() const { return resolution_; }
  int width() const { return width_; }
  int height() const { return height_; }
  std::size_t cell_count() const { return cells_; }

  bool in_bounds(int row, int col) const {
    return row >= 0 && col >= 0 && row < height_ && col < width_;
  }
  int col_of(double x) const {
    return static_cast<int>(std::floor((x - origin_x_) / resolution_));
  }
  int row_of(double y) const {
    return static_cast<int>(std::floor((y - origin_y_) / resolution_));
  }
  double cell_center_x(int col) const {
    return origin_x_ + (col + 0.5) * resolution_;
  }
  double cell_center_y(int row) const {
    return origin_y_ + (row + 0.5) * resolution_;
  }
  std::size_t index(int row, int col) const {
    return static_cast<std::size_t>(row) * width_ + col;
  }

  CellClass cls(int row, int col) const {
    return static_cast<CellClass>(cls_[index(row, col)]);
  }
  CellState cell(int row, int col) const;
  // Out-of-bounds coordinates return Unknown.
  CellState query(double x, double y) const;
  CellClass cls_at(double x, double y) const;

  void set_obstacle(int row, int col);
  void set_unknown(int row, int col);
  void set_terrain(int row, int col, const Eigen::Vector3d& normal,
                   double r_sum, double tau, double elevation);

  // Euclidean distance from the cell center containing (x, y) to the nearest
  // obstacle cell center; 0 on obstacle cells, +inf when the map has no
  // obstacles. Out-of-bounds queries conservatively return 0.
  double distance_to_obstacle(double x, double y) const;
  double distance_at(int row, int col) const;

  // RobotSpec the map was assessed with (r_max resolved); carried through
  // save/load via the JSON sidecar.
  const RobotSpec& spec() const { return spec_; }
  void set_spec(const RobotSpec& s) { spec_ = s; }

  static constexpr double kNoObstacle = std::numeric_limits<double>::infinity();

 private:
  void ensure_distance_field() const;
  void copy_from(const HybridMap& other);

  double origin_x_ = 0.0;
  double origin_y_ = 0.0;
  double resolution_ = 1.0;
  int width_ = 0;
  int height_ = 0;
  std::size_t cells_ = 0;

  std::vector<std::uint8_t> cls_;
  std::vector<float> tau_;
  std::vector<float> normal_;  // 3 floats per cell
  std::vector<float> r_sum_;
  std::vector<float> elevation_;
  RobotSpec spec_;

  mutable std::once_flag distance_once_;
  mutable std::vector<double> distance_;  // meters, empty until first use

  friend void save_map(const HybridMap&, const std::string&);
  friend HybridMap load_map(const std::string&);
};

// Versioned binary container with CRC32 trailer; a JSON sidecar (path +
// ".json") carries the RobotSpec. Round-trips are bit-exact.
void save_map(const HybridMap& map, const std::string& path);
HybridMap load_map(const std::string& path);

// Exact two-pass squared Euclidean distance transform. Input: flattened
// row-major mask, true = feature cell. Output: squared distance in cells.
std::vector<double> exact_edt_squared(const std::vector<std::uint8_t>& mask,
                                      int width, int height);

}  // namespace terrapath
