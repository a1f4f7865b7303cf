#include <doctest.h>

#include <cmath>

#include "terrapath/errors.hpp"
#include "terrapath/terrain_assessment.hpp"
#include "test_helpers.hpp"

using namespace terrapath;

namespace {

std::vector<Point3> plane_points(double slope_x, double slope_y, int n = 6,
                                 double spacing = 0.2) {
  std::vector<Point3> pts;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const double x = i * spacing, y = j * spacing;
      pts.push_back({x, y, slope_x * x + slope_y * y});
    }
  return pts;
}

}  // namespace

TEST_CASE("fit_plane horizontal") {
  const auto plane = fit_plane(plane_points(0.0, 0.0));
  CHECK(plane.normal.x() == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(plane.normal.y() == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(plane.normal.z() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(plane.rho == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("fit_plane inclined: z = x tan(0.3)") {
  const auto plane = fit_plane(plane_points(std::tan(0.3), 0.0));
  CHECK(plane.rho == doctest::Approx(0.3).epsilon(1e-6));
  CHECK(plane.normal.z() > 0.0);
}

TEST_CASE("fit_plane degenerate inputs") {
  CHECK_THROWS_AS(fit_plane(std::vector<Point3>{{0, 0, 0}, {1, 1, 1}}),
                  DegenerateCellError);
  const std::vector<Point3> collinear = {{0, 0, 0}, {1, 1, 0}, {2, 2, 0}};
  CHECK_THROWS_AS(fit_plane(collinear), DegenerateCellError);
}

TEST_CASE("fit_plane permutation invariance") {
  auto pts = plane_points(0.15, -0.1);
  // perturb out of plane deterministically so the fit is not exact
  for (std::size_t k = 0; k < pts.size(); ++k)
    pts[k].z += 0.01 * (testing::u01(3, k, 0) - 0.5);
  const auto base = fit_plane(pts);
  std::vector<Point3> shuffled;
  for (std::size_t k = pts.size(); k-- > 0;) shuffled.push_back(pts[k]);
  const auto redo = fit_plane(shuffled);
  CHECK((base.normal - redo.normal).norm() < 1e-9);
  CHECK(base.rho == doctest::Approx(redo.rho).epsilon(1e-9));
}

TEST_CASE("fit_plane rotation equivariance") {
  auto pts = plane_points(0.1, 0.05);
  for (std::size_t k = 0; k < pts.size(); ++k)
    pts[k].z += 0.02 * (testing::u01(5, k, 0) - 0.5);
  const auto base = fit_plane(pts);

  const double a = 0.4;
  Eigen::Matrix3d rot;  // rotation about x
  rot << 1, 0, 0, 0, std::cos(a), -std::sin(a), 0, std::sin(a), std::cos(a);
  std::vector<Point3> rotated;
  for (const auto& p : pts) rotated.push_back(Point3::from(rot * p.vec()));
  const auto redo = fit_plane(rotated);

  Eigen::Vector3d expected = rot * base.normal;
  if (expected.z() < 0.0) expected = -expected;
  CHECK((redo.normal - expected).norm() < 1e-6);
}

TEST_CASE("classify_coarse boundary convention") {
  const RobotSpec spec = testing::table_spec();
  FittedPlane plane;
  plane.rho = 0.31;
  CHECK(classify_coarse(plane, spec) == CoarseClass::Steep);
  plane.rho = 0.0;
  CHECK(classify_coarse(plane, spec) == CoarseClass::Traversable);
  plane.rho = spec.rho_max;  // strict inequality: boundary is traversable
  CHECK(classify_coarse(plane, spec) == CoarseClass::Traversable);
}

TEST_CASE("fine_stats signed residual spread") {
  const auto plane = fit_plane(plane_points(0.0, 0.0));

  const std::vector<Point3> on_plane = {{0.1, 0.1, 0}, {0.5, 0.2, 0}};
  auto s = fine_stats(on_plane, plane);
  CHECK(s.h == doctest::Approx(0.0));
  CHECK(s.r_sum == doctest::Approx(0.0));

  const std::vector<Point3> split = {{0.1, 0.1, 0.05}, {0.2, 0.2, -0.05}};
  s = fine_stats(split, plane);
  CHECK(s.h == doctest::Approx(0.10).epsilon(1e-12));
  CHECK(s.r_sum == doctest::Approx(0.10).epsilon(1e-12));

  const std::vector<Point3> single = {{0.1, 0.1, -0.02}};
  s = fine_stats(single, plane);
  CHECK(s.h == doctest::Approx(0.0));
  CHECK(s.r_sum == doctest::Approx(0.02).epsilon(1e-12));
  CHECK(s.n == 1);
}

TEST_CASE("fine_stats matches a brute-force recomputation") {
  auto pts = plane_points(0.12, -0.07);
  for (std::size_t k = 0; k < pts.size(); ++k)
    pts[k].z += 0.05 * (testing::u01(11, k, 0) - 0.5);
  const auto plane = fit_plane(pts);
  const auto s = fine_stats(pts, plane);

  double dmin = 1e300, dmax = -1e300, rsum = 0.0;
  for (const auto& p : pts) {
    const double d = plane.normal.dot(p.vec() - plane.centroid);
    dmin = std::min(dmin, d);
    dmax = std::max(dmax, d);
    rsum += std::abs(d);
  }
  CHECK(s.h == dmax - dmin);
  CHECK(s.r_sum == rsum);
}

TEST_CASE("static traversability") {
  const RobotSpec spec = testing::table_spec();
  const double r_max = 1.0;

  FineCellStats stats;
  stats.n = 4;
  CHECK(static_traversability(stats, 0.0, spec, r_max) == 1.0);

  stats.h = 0.11;  // exceeds h_max = 0.1
  CHECK(static_traversability(stats, 0.0, spec, r_max) == 0.0);

  stats.h = 0.0;
  stats.r_sum = r_max;  // W_r = 0.5
  CHECK(static_traversability(stats, 0.0, spec, r_max) ==
        doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("static traversability is monotone in roughness and slope") {
  const RobotSpec spec = testing::table_spec();
  for (int k = 0; k < 200; ++k) {
    FineCellStats a, b;
    a.n = b.n = 3;
    a.r_sum = testing::u01(13, k, 0) * 2.0;
    b.r_sum = a.r_sum + testing::u01(13, k, 1);
    const double rho = testing::u01(13, k, 2) * spec.rho_max;
    CHECK(static_traversability(b, rho, spec, 1.0) <=
          static_traversability(a, rho, spec, 1.0));
    const double rho2 = rho + testing::u01(13, k, 3) * (spec.rho_max - rho);
    CHECK(static_traversability(a, rho2, spec, 1.0) <=
          static_traversability(a, rho, spec, 1.0));
  }
}

namespace {

HybridMap assess_cloud_with(const PointCloud& cloud, const RobotSpec& spec,
                            AssessStats* stats = nullptr) {
  const auto grid = segment(cloud, voxel_dims(spec));
  return assess(cloud, grid, spec, {}, stats);
}

PointCloud dense_flat(double ex, double ey, double spacing) {
  PointCloud cloud;
  for (double x = 0; x <= ex; x += spacing)
    for (double y = 0; y <= ey; y += spacing)
      cloud.points.push_back({x, y, 0.0});
  cloud.recompute_bounds();
  return cloud;
}

}  // namespace

TEST_CASE("assess: flat cloud is all terrain with tau 1") {
  const auto cloud = dense_flat(10.0, 10.0, 0.1);
  AssessStats stats;
  const auto map = assess_cloud_with(cloud, testing::table_spec(0.0), &stats);
  CHECK(stats.obstacle_cells == 0);
  std::size_t terrain = 0;
  for (int row = 0; row < map.height(); ++row)
    for (int col = 0; col < map.width(); ++col) {
      const auto cell = map.cell(row, col);
      if (cell.cls == CellClass::Terrain) {
        ++terrain;
        CHECK(cell.tau == doctest::Approx(1.0).epsilon(1e-9));
      }
    }
  CHECK(terrain == map.cell_count());
  CHECK(map.spec().r_max == doctest::Approx(stats.resolved_r_max));
  CHECK(stats.resolved_r_max > 0.0);
}

TEST_CASE("assess: vertical wall blanks its coarse footprint") {
  auto cloud = dense_flat(8.0, 8.0, 0.1);
  // a vertical wall sheet at x ~ 4.0
  for (double y = 2.0; y <= 6.0; y += 0.05)
    for (double z = 0.0; z <= 2.0; z += 0.05)
      cloud.points.push_back({4.0, y, z});
  cloud.recompute_bounds();

  const auto map = assess_cloud_with(cloud, testing::table_spec(0.0));
  // cells right on the wall line must be obstacles
  CHECK(map.query(4.0, 4.0).cls == CellClass::Obstacle);
  CHECK(map.query(4.0, 3.0).cls == CellClass::Obstacle);
  // far away stays terrain
  CHECK(map.query(1.0, 1.0).cls == CellClass::Terrain);
  CHECK(map.query(7.0, 7.0).cls == CellClass::Terrain);
}

TEST_CASE("assess: 0.15 m box matches per-cell brute force") {
  auto cloud = dense_flat(8.0, 8.0, 0.1);
  for (auto& p : cloud.points)
    if (p.x >= 3.0 && p.x <= 5.0 && p.y >= 3.0 && p.y <= 5.0) p.z = 0.15;
  cloud.recompute_bounds();

  const RobotSpec spec = testing::table_spec(0.0);
  const auto dims = voxel_dims(spec);
  const auto grid = segment(cloud, dims);
  AssessStats stats;
  const auto map = assess(cloud, grid, spec, {}, &stats);

  // independent oracle: refit every coarse plane, bucket retained points onto
  // the fine raster, recompute each cell's residual spread and compare class
  struct Fit {
    bool steep = false;
    bool valid = false;
    FittedPlane plane;
  };
  std::vector<Fit> fits(grid.cells.size());
  for (std::size_t ci = 0; ci < grid.cells.size(); ++ci) {
    const auto& cc = grid.cells[ci];
    if (cc.insufficient) continue;
    std::vector<Point3> pts;
    for (const auto idx : cc.retained) pts.push_back(cloud.points[idx]);
    try {
      fits[ci].plane = fit_plane(pts);
      fits[ci].valid = true;
      fits[ci].steep = classify_coarse(fits[ci].plane, spec) == CoarseClass::Steep;
    } catch (const DegenerateCellError&) {
    }
  }
  std::vector<std::vector<Point3>> per_fine(map.cell_count());
  for (std::size_t ci = 0; ci < grid.cells.size(); ++ci) {
    if (!fits[ci].valid || fits[ci].steep) continue;
    for (const auto idx : grid.cells[ci].retained) {
      const auto& p = cloud.points[idx];
      const int pcol = std::clamp(map.col_of(p.x), 0, map.width() - 1);
      const int prow = std::clamp(map.row_of(p.y), 0, map.height() - 1);
      per_fine[map.index(prow, pcol)].push_back(p);
    }
  }
  std::size_t checked = 0;
  for (int row = 0; row < map.height(); ++row) {
    for (int col = 0; col < map.width(); ++col) {
      const double cx = map.cell_center_x(col), cy = map.cell_center_y(row);
      const int gcol = std::min(
          static_cast<int>((cx - grid.origin_x) / grid.cell_size), grid.cols - 1);
      const int grow = std::min(
          static_cast<int>((cy - grid.origin_y) / grid.cell_size), grid.rows - 1);
      const auto owner = grid.cell_of[static_cast<std::size_t>(grow) * grid.cols + gcol];
      if (owner < 0 || !fits[owner].valid) {
        CHECK(map.cls(row, col) == CellClass::Unknown);
        continue;
      }
      if (fits[owner].steep) {
        CHECK(map.cls(row, col) == CellClass::Obstacle);
        ++checked;
        continue;
      }
      const auto& cell_pts = per_fine[map.index(row, col)];
      if (cell_pts.empty()) {
        CHECK(map.cls(row, col) == CellClass::Unknown);
        continue;
      }
      const auto s = fine_stats(cell_pts, fits[owner].plane);
      const CellClass expected =
          s.h > spec.h_max ? CellClass::Obstacle : CellClass::Terrain;
      CHECK(map.cls(row, col) == expected);
      ++checked;
    }
  }
  CHECK(checked > 100);

  // obstacles appear only near the box rim; the far field stays terrain
  CHECK(stats.obstacle_cells > 0);
  auto rim_distance = [](double x, double y) {
    // distance from (x, y) to the boundary of the [3,5]x[3,5] square
    const double dx = std::max({3.0 - x, 0.0, x - 5.0});
    const double dy = std::max({3.0 - y, 0.0, y - 5.0});
    const double outside = std::hypot(dx, dy);
    if (outside > 0.0) return outside;
    return std::min(std::min(x - 3.0, 5.0 - x), std::min(y - 3.0, 5.0 - y));
  };
  const double coarse_diag = grid.cell_size * std::sqrt(2.0);
  for (int row = 0; row < map.height(); ++row)
    for (int col = 0; col < map.width(); ++col) {
      const double d =
          rim_distance(map.cell_center_x(col), map.cell_center_y(row));
      if (map.cls(row, col) == CellClass::Obstacle)
        CHECK(d <= coarse_diag + 1e-9);
      else if (d > 1.5 * coarse_diag && map.cls(row, col) == CellClass::Terrain)
        CHECK(map.cell(row, col).tau > 0.5);
    }
  CHECK(map.query(1.0, 1.0).cls == CellClass::Terrain);
  CHECK(map.query(4.0, 4.0).cls == CellClass::Terrain);  // flat box top
}

TEST_CASE("assess map-wide exclusivity and layer invariants") {
  auto cloud = dense_flat(6.0, 6.0, 0.1);
  for (auto& p : cloud.points) {
    p.z += 0.02 * (testing::u01(17, static_cast<int>(p.x * 100 + p.y), 0) - 0.5);
    if (p.x >= 2.0 && p.x <= 2.4 && p.y >= 2.0 && p.y <= 4.0) p.z += 1.5;
  }
  cloud.recompute_bounds();
  const auto map = assess_cloud_with(cloud, testing::table_spec(0.0));

  for (int row = 0; row < map.height(); ++row)
    for (int col = 0; col < map.width(); ++col) {
      const auto cell = map.cell(row, col);
      switch (cell.cls) {
        case CellClass::Obstacle:
          CHECK(cell.tau == 0.0);
          CHECK(cell.normal.norm() == 0.0);
          break;
        case CellClass::Terrain:
          CHECK(cell.tau >= 0.0);
          CHECK(cell.tau <= 1.0);
          CHECK(cell.normal.norm() == doctest::Approx(1.0).epsilon(1e-6));
          CHECK(cell.normal.z() >= 0.0);
          break;
        case CellClass::Unknown:
          break;
      }
    }
}

TEST_CASE("assess rejects bad fine resolution") {
  const auto cloud = dense_flat(4.0, 4.0, 0.2);
  const RobotSpec spec = testing::table_spec();
  const auto grid = segment(cloud, voxel_dims(spec));
  AssessOptions options;
  options.fine_resolution = 2.0;  // above G_l
  CHECK_THROWS_AS(assess(cloud, grid, spec, options), InvalidSpecError);
}
