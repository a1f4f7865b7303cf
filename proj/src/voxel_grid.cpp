#include "terrapath/voxel_grid.hpp"

#include <algorithm>
#include <cmath>

#include "terrapath/errors.hpp"

namespace terrapath {

VoxelDims voxel_dims(const RobotSpec& spec) {
  spec.validate();
  VoxelDims d;
  d.length = d.width = spec.diag();
  d.height = d.length * std::tan(spec.rho_max);
  return d;
}

CoarseGrid segment(const PointCloud& cloud, const VoxelDims& dims,
                   const SegmentOptions& options) {
  if (cloud.empty()) throw EmptyCloudError();

  CoarseGrid grid;
  grid.origin_x = cloud.bounds.min.x;
  grid.origin_y = cloud.bounds.min.y;
  grid.cell_size = dims.length;
  grid.window_height = dims.height;
  grid.cols = std::max(
      1, static_cast<int>(std::ceil((cloud.bounds.max.x - grid.origin_x) /
                                    grid.cell_size)));
  grid.rows = std::max(
      1, static_cast<int>(std::ceil((cloud.bounds.max.y - grid.origin_y) /
                                    grid.cell_size)));

  const std::size_t n_columns =
      static_cast<std::size_t>(grid.rows) * grid.cols;
  auto column_of = [&](const Point3& p) -> std::size_t {
    int col = static_cast<int>((p.x - grid.origin_x) / grid.cell_size);
    int row = static_cast<int>((p.y - grid.origin_y) / grid.cell_size);
    col = std::clamp(col, 0, grid.cols - 1);
    row = std::clamp(row, 0, grid.rows - 1);
    return static_cast<std::size_t>(row) * grid.cols + col;
  };

  // counting sort of point indices by column; keeps original point order
  std::vector<std::uint32_t> counts(n_columns + 1, 0);
  for (const auto& p : cloud.points) ++counts[column_of(p) + 1];
  for (std::size_t i = 1; i <= n_columns; ++i) counts[i] += counts[i - 1];
  std::vector<std::uint32_t> bucketed(cloud.size());
  {
    std::vector<std::uint32_t> cursor(counts.begin(), counts.end() - 1);
    for (std::uint32_t i = 0; i < cloud.size(); ++i)
      bucketed[cursor[column_of(cloud.points[i])]++] = i;
  }

  grid.cell_of.assign(n_columns, -1);
  std::vector<double> zs;
  for (std::size_t c = 0; c < n_columns; ++c) {
    const std::uint32_t begin = counts[c], end = counts[c + 1];
    if (begin == end) continue;  // no data, no cell

    CoarseCell cell;
    cell.row = static_cast<int>(c) / grid.cols;
    cell.col = static_cast<int>(c) % grid.cols;

    zs.clear();
    for (std::uint32_t k = begin; k < end; ++k)
      zs.push_back(cloud.points[bucketed[k]].z);
    std::sort(zs.begin(), zs.end());
    const double pct = std::clamp(options.z_ground_percentile, 0.0, 100.0);
    const std::size_t rank = static_cast<std::size_t>(
        std::floor(pct / 100.0 * static_cast<double>(zs.size() - 1)));
    cell.z_ground = zs[rank];

    const double z_top = cell.z_ground + dims.height;
    for (std::uint32_t k = begin; k < end; ++k) {
      const std::uint32_t idx = bucketed[k];
      const double z = cloud.points[idx].z;
      if (!options.dynamic_window || (z >= cell.z_ground && z <= z_top))
        cell.retained.push_back(idx);
      else
        ++cell.excluded_count;
    }
    cell.insufficient = cell.retained.size() < 3;

    grid.cell_of[c] = static_cast<std::int32_t>(grid.cells.size());
    grid.cells.push_back(std::move(cell));
  }
  return grid;
}

}  // namespace terrapath
