#include <doctest.h>

#include <cmath>

#include "terrapath/errors.hpp"
#include "terrapath/pose_projection.hpp"
#include "terrapath/terrain_assessment.hpp"
#include "test_helpers.hpp"

using namespace terrapath;

TEST_CASE("heading rotation basics") {
  CHECK((heading_rotation(0.0) - Eigen::Matrix3d::Identity()).norm() < 1e-15);

  const Eigen::Matrix3d r = heading_rotation(M_PI / 2.0);
  // printed layout: x axis at theta = pi/2 is (0, -1, 0)
  CHECK(r(0, 0) == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(r.col(0).x() == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(r.col(0).y() == doctest::Approx(-1.0).epsilon(1e-15));
  CHECK(r.col(0).z() == 0.0);

  for (int k = 0; k < 50; ++k) {
    const double theta = (testing::u01(21, k, 0) - 0.5) * 4.0 * M_PI;
    const Eigen::Matrix3d m = heading_rotation(theta);
    CHECK(std::abs(m.determinant() - 1.0) < 1e-12);
    CHECK((m.transpose() * m - Eigen::Matrix3d::Identity()).norm() < 1e-12);
  }
}

TEST_CASE("project on flat ground") {
  for (double theta : {0.0, 0.7, -2.1, M_PI / 2}) {
    const auto att = project(theta, Eigen::Vector3d::UnitZ());
    CHECK(att.roll == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(att.pitch == doctest::Approx(0.0).epsilon(1e-12));
    CHECK((att.rotation - heading_rotation(theta)).norm() < 1e-12);
  }
}

TEST_CASE("ramp oracle: pitch along the fall line, roll across it") {
  const double alpha = 0.22;
  // plane tilted about the y axis: z = -x tan(alpha), normal analytic
  const Eigen::Vector3d v(std::sin(alpha), 0.0, std::cos(alpha));

  // cross-check the analytic normal against the plane fitter
  std::vector<Point3> pts;
  for (double x = -1.0; x <= 1.0; x += 0.5)
    for (double y = -1.0; y <= 1.0; y += 0.5)
      pts.push_back({x, y, -x * std::tan(alpha)});
  const auto fitted = fit_plane(pts);
  CHECK((fitted.normal - v).norm() < 1e-9);

  // heading +x (down the slope here): |pitch| = alpha, roll = 0
  const auto down = project(0.0, v);
  CHECK(std::abs(down.pitch) == doctest::Approx(alpha).epsilon(1e-9));
  CHECK(down.roll == doctest::Approx(0.0).epsilon(1e-9));

  // heading -x (up the slope): |pitch| = alpha, nose up is negative pitch
  const auto up = project(M_PI, v);
  CHECK(std::abs(up.pitch) == doctest::Approx(alpha).epsilon(1e-9));
  CHECK(up.pitch == doctest::Approx(-alpha).epsilon(1e-9));
  CHECK(up.roll == doctest::Approx(0.0).epsilon(1e-9));

  // heading across the slope: |roll| = alpha, pitch ~ 0
  const auto across = project(M_PI / 2.0, v);
  CHECK(std::abs(across.roll) == doctest::Approx(alpha).epsilon(1e-9));
  CHECK(std::abs(across.pitch) < 1e-9);
}

TEST_CASE("projection properties over random headings and normals") {
  int checked = 0;
  for (int k = 0; k < 10000; ++k) {
    const double theta = (testing::u01(23, k, 0) - 0.5) * 2.0 * M_PI;
    const double incl = testing::u01(23, k, 1) * 0.3;
    const double az = testing::u01(23, k, 2) * 2.0 * M_PI;
    const Eigen::Vector3d v(std::sin(incl) * std::cos(az),
                            std::sin(incl) * std::sin(az), std::cos(incl));

    const auto att = project(theta, v);
    const Eigen::Matrix3d& r = att.rotation;
    REQUIRE((r.transpose() * r - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() <
            1e-9);
    REQUIRE(std::abs(r.determinant() - 1.0) < 1e-9);
    REQUIRE((r.col(2) - v).norm() < 1e-9);

    // zero yaw between the heading frame and the projected frame
    const Eigen::Matrix3d rel = heading_rotation(theta).transpose() * r;
    const double rel_yaw = std::atan2(rel(1, 0), rel(0, 0));
    REQUIRE(std::abs(rel_yaw) < 1e-9);

    // Euler triple reconstructs the rotation in Z-Y-X order
    const Eigen::Matrix3d rebuilt =
        rotation_from_euler_zyx(att.yaw, att.pitch, att.roll);
    REQUIRE((rebuilt - r).cwiseAbs().maxCoeff() < 1e-9);
    ++checked;
  }
  CHECK(checked == 10000);
}

TEST_CASE("degenerate projection when the normal hits the lateral axis") {
  // normal parallel to the heading frame's y axis (rho = pi/2)
  CHECK_THROWS_AS(project(0.0, Eigen::Vector3d::UnitY()),
                  DegenerateProjectionError);
}

TEST_CASE("real traversability values") {
  RobotSpec spec = testing::table_spec(1.0);  // r_max = 1

  ProjectedAttitude flat;
  CHECK(real_traversability(0.0, flat, spec) == 1.0);

  // |roll| at the threshold is allowed (strict inequality), w_roll = 0.4
  ProjectedAttitude roll_edge;
  roll_edge.roll = spec.roll_max;
  CHECK(real_traversability(0.0, roll_edge, spec) ==
        doctest::Approx(0.6).epsilon(1e-12));

  // pitch at the negative limit: penalty max(1, pitch_min/pitch_max) = 1
  ProjectedAttitude pitch_edge;
  pitch_edge.pitch = spec.pitch_min;
  CHECK(real_traversability(0.0, pitch_edge, spec) ==
        doctest::Approx(0.6).epsilon(1e-12));

  // hard thresholds force zero beyond the limits
  ProjectedAttitude over_roll;
  over_roll.roll = spec.roll_max + 1e-6;
  CHECK(real_traversability(0.0, over_roll, spec) == 0.0);
  ProjectedAttitude over_pitch;
  over_pitch.pitch = spec.pitch_max + 1e-6;
  CHECK(real_traversability(0.0, over_pitch, spec) == 0.0);
  ProjectedAttitude under_pitch;
  under_pitch.pitch = spec.pitch_min - 1e-6;
  CHECK(real_traversability(0.0, under_pitch, spec) == 0.0);
  CHECK(real_traversability(spec.r_max + 1e-9, flat, spec) == 0.0);
}

TEST_CASE("real traversability is monotone in each penalty") {
  const RobotSpec spec = testing::table_spec(1.0);
  for (int k = 0; k < 500; ++k) {
    ProjectedAttitude a;
    a.roll = (testing::u01(29, k, 0) - 0.5) * 2.0 * spec.roll_max;
    a.pitch = spec.pitch_min + testing::u01(29, k, 1) *
                                   (spec.pitch_max - spec.pitch_min);
    const double r = testing::u01(29, k, 2) * spec.r_max;

    ProjectedAttitude worse_roll = a;
    worse_roll.roll = a.roll >= 0 ? a.roll + 0.01 : a.roll - 0.01;
    CHECK(real_traversability(r, worse_roll, spec) <=
          real_traversability(r, a, spec));

    CHECK(real_traversability(r + 0.05, a, spec) <=
          real_traversability(r, a, spec));

    ProjectedAttitude worse_pitch = a;
    worse_pitch.pitch = a.pitch + (a.pitch >= 0 ? 0.01 : -0.01);
    CHECK(real_traversability(r, worse_pitch, spec) <=
          real_traversability(r, a, spec));
  }
}

TEST_CASE("flat ground traversability is heading independent") {
  const RobotSpec spec = testing::table_spec(1.0);
  const double reference =
      real_traversability(0.3, project(0.0, Eigen::Vector3d::UnitZ()), spec);
  for (int k = 0; k < 100; ++k) {
    const double theta = (testing::u01(31, k, 0) - 0.5) * 2.0 * M_PI;
    CHECK(real_traversability(0.3, project(theta, Eigen::Vector3d::UnitZ()),
                              spec) == reference);
  }
}
