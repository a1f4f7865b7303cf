#include "terrapath/terrain_assessment.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <atomic>
#include <cmath>
#include <functional>
#include <thread>

#include "terrapath/errors.hpp"

namespace terrapath {

FittedPlane fit_plane(std::span<const Point3> points) {
  if (points.size() < 3) throw DegenerateCellError();

  Eigen::Vector3d centroid = Eigen::Vector3d::Zero();
  for (const auto& p : points) centroid += p.vec();
  centroid /= static_cast<double>(points.size());

  Eigen::Matrix3d scatter = Eigen::Matrix3d::Zero();
  for (const auto& p : points) {
    const Eigen::Vector3d d = p.vec() - centroid;
    scatter += d * d.transpose();
  }

  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(scatter);
  const Eigen::Vector3d evals = eig.eigenvalues();  // ascending
  // collinear input leaves no spread in the second principal direction
  if (evals(1) <= 1e-9 * std::max(evals(2), 1e-12))
    throw DegenerateCellError();

  Eigen::Vector3d normal = eig.eigenvectors().col(0);
  if (normal.z() < 0.0 ||
      (normal.z() == 0.0 &&
       (normal.x() < 0.0 || (normal.x() == 0.0 && normal.y() < 0.0))))
    normal = -normal;

  FittedPlane plane;
  plane.centroid = centroid;
  plane.normal = normal.normalized();
  plane.rho = std::acos(std::clamp(plane.normal.z(), 0.0, 1.0));
  return plane;
}

CoarseClass classify_coarse(const FittedPlane& plane, const RobotSpec& spec) {
  return plane.rho > spec.rho_max ? CoarseClass::Steep
                                  : CoarseClass::Traversable;
}

FineCellStats fine_stats(std::span<const Point3> points,
                         const FittedPlane& plane) {
  FineCellStats s;
  s.n = points.size();
  if (points.empty()) return s;
  double dmin = std::numeric_limits<double>::infinity();
  double dmax = -std::numeric_limits<double>::infinity();
  for (const auto& p : points) {
    const double d = (p.vec() - plane.centroid).dot(plane.normal);
    dmin = std::min(dmin, d);
    dmax = std::max(dmax, d);
    s.r_sum += std::abs(d);
  }
  s.h = dmax - dmin;
  s.mean_abs_residual = s.r_sum / static_cast<double>(s.n);
  return s;
}

double static_traversability(const FineCellStats& stats, double rho,
                             const RobotSpec& spec, double r_max) {
  if (stats.h > spec.h_max) return 0.0;
  const double tau = 1.0 - spec.weight_roughness * stats.r_sum / r_max -
                     spec.weight_slope * rho / spec.rho_max;
  return std::clamp(tau, 0.0, 1.0);
}

namespace {

void parallel_for(int n, int jobs, const std::function<void(int)>& body) {
  jobs = std::max(1, jobs);
  if (jobs == 1 || n < 2 * jobs) {
    for (int i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  pool.reserve(jobs);
  for (int t = 0; t < jobs; ++t) {
    pool.emplace_back([&] {
      for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1)) body(i);
    });
  }
  for (auto& th : pool) th.join();
}

struct CoarseFit {
  bool valid = false;
  bool steep = false;
  FittedPlane plane;
};

}  // namespace

HybridMap assess(const PointCloud& cloud, const CoarseGrid& grid,
                 const RobotSpec& spec, const AssessOptions& options,
                 AssessStats* stats_out) {
  spec.validate();
  if (!(options.fine_resolution > 0.0) ||
      options.fine_resolution > grid.cell_size + 1e-12)
    throw InvalidSpecError("fine resolution must be in (0, G_l]");

  const double res = options.fine_resolution;
  const double span_x = cloud.bounds.max.x - cloud.bounds.min.x;
  const double span_y = cloud.bounds.max.y - cloud.bounds.min.y;
  const int width = std::max(1, static_cast<int>(std::ceil(span_x / res)));
  const int height = std::max(1, static_cast<int>(std::ceil(span_y / res)));
  HybridMap map(grid.origin_x, grid.origin_y, res, width, height);

  // phase 1: plane fit + steepness per coarse cell
  std::vector<CoarseFit> fits(grid.cells.size());
  std::atomic<std::size_t> degenerate{0}, steep_count{0};
  parallel_for(static_cast<int>(grid.cells.size()), options.jobs, [&](int ci) {
    const CoarseCell& cell = grid.cells[ci];
    if (cell.insufficient) return;
    std::vector<Point3> pts;
    pts.reserve(cell.retained.size());
    for (auto idx : cell.retained) pts.push_back(cloud.points[idx]);
    try {
      fits[ci].plane = fit_plane(pts);
    } catch (const DegenerateCellError&) {
      degenerate.fetch_add(1);
      return;
    }
    fits[ci].valid = true;
    fits[ci].steep = classify_coarse(fits[ci].plane, spec) == CoarseClass::Steep;
    if (fits[ci].steep) steep_count.fetch_add(1);
  });

  // bucket retained points of valid, non-steep coarse cells into fine cells
  const std::size_t n_fine = map.cell_count();
  std::vector<std::uint32_t> counts(n_fine + 1, 0);
  auto fine_index_of = [&](const Point3& p) -> std::size_t {
    int col = std::clamp(map.col_of(p.x), 0, width - 1);
    int row = std::clamp(map.row_of(p.y), 0, height - 1);
    return map.index(row, col);
  };
  for (const auto& cell : grid.cells) {
    const auto ci = grid.cell_of[static_cast<std::size_t>(cell.row) * grid.cols +
                                 cell.col];
    if (!fits[ci].valid || fits[ci].steep) continue;
    for (auto idx : cell.retained)
      ++counts[fine_index_of(cloud.points[idx]) + 1];
  }
  for (std::size_t i = 1; i <= n_fine; ++i) counts[i] += counts[i - 1];
  std::vector<std::uint32_t> bucketed(counts[n_fine]);
  {
    std::vector<std::uint32_t> cursor(counts.begin(), counts.end() - 1);
    for (const auto& cell : grid.cells) {
      const auto ci =
          grid.cell_of[static_cast<std::size_t>(cell.row) * grid.cols +
                       cell.col];
      if (!fits[ci].valid || fits[ci].steep) continue;
      for (auto idx : cell.retained)
        bucketed[cursor[fine_index_of(cloud.points[idx])]++] = idx;
    }
  }

  // each fine cell inherits the plane of the coarse cell containing its center
  auto owner_of = [&](int row, int col) -> std::int32_t {
    const double cx = map.cell_center_x(col), cy = map.cell_center_y(row);
    int gcol = static_cast<int>((cx - grid.origin_x) / grid.cell_size);
    int grow = static_cast<int>((cy - grid.origin_y) / grid.cell_size);
    gcol = std::clamp(gcol, 0, grid.cols - 1);
    grow = std::clamp(grow, 0, grid.rows - 1);
    return grid.cell_of[static_cast<std::size_t>(grow) * grid.cols + gcol];
  };

  // pass A: stats per fine cell (r_max may still be unresolved)
  struct FineRecord {
    FineCellStats stats;
    double elevation = 0.0;
    std::int32_t owner = -1;
  };
  std::vector<FineRecord> records(n_fine);
  std::atomic<std::uint64_t> populated{0}, point_total{0};
  parallel_for(height, options.jobs, [&](int row) {
    std::vector<Point3> pts;
    for (int col = 0; col < width; ++col) {
      const std::size_t i = map.index(row, col);
      FineRecord& rec = records[i];
      rec.owner = owner_of(row, col);
      if (rec.owner < 0) continue;
      const CoarseFit& fit = fits[rec.owner];
      if (!fit.valid || fit.steep) continue;
      pts.clear();
      double z_sum = 0.0;
      for (std::uint32_t k = counts[i]; k < counts[i + 1]; ++k) {
        pts.push_back(cloud.points[bucketed[k]]);
        z_sum += pts.back().z;
      }
      if (pts.empty()) continue;
      rec.stats = fine_stats(pts, fit.plane);
      rec.elevation = z_sum / static_cast<double>(pts.size());
      populated.fetch_add(1);
      point_total.fetch_add(pts.size());
    }
  });

  const double mean_n =
      populated ? static_cast<double>(point_total) /
                      static_cast<double>(populated)
                : 1.0;
  const double r_max = spec.r_max > 0.0 ? spec.r_max : spec.h_max * mean_n;

  // pass B: classification + tau now that r_max is known
  AssessStats stats;
  stats.resolved_r_max = r_max;
  stats.mean_points_per_fine_cell = mean_n;
  for (int row = 0; row < height; ++row) {
    for (int col = 0; col < width; ++col) {
      const std::size_t i = map.index(row, col);
      const FineRecord& rec = records[i];
      const CoarseFit* fit = rec.owner >= 0 ? &fits[rec.owner] : nullptr;
      if (fit && fit->valid && fit->steep) {
        // steep coarse cells blank their whole footprint, data or not
        map.set_obstacle(row, col);
        ++stats.obstacle_cells;
        continue;
      }
      if (!fit || !fit->valid || rec.stats.n == 0) {
        ++stats.unknown_cells;
        continue;  // already Unknown
      }
      if (rec.stats.h > spec.h_max) {
        map.set_obstacle(row, col);
        ++stats.obstacle_cells;
        continue;
      }
      const double tau =
          static_traversability(rec.stats, fit->plane.rho, spec, r_max);
      map.set_terrain(row, col, fit->plane.normal, rec.stats.r_sum, tau,
                      rec.elevation);
      ++stats.terrain_cells;
    }
  }
  stats.degenerate_coarse_cells = degenerate;
  stats.steep_coarse_cells = steep_count;

  RobotSpec resolved = spec;
  resolved.r_max = r_max;
  map.set_spec(resolved);
  if (stats_out) *stats_out = stats;
  return map;
}

}  // namespace terrapath
