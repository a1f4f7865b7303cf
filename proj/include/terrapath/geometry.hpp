#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <limits>

namespace terrapath {

// All coordinates are meters in the map frame, Z antiparallel to gravity.
struct Point3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  Eigen::Vector3d vec() const { return {x, y, z}; }
  static Point3 from(const Eigen::Vector3d& v) { return {v.x(), v.y(), v.z()}; }

  bool finite() const {
    return std::isfinite(x) && std::isfinite(y) && std::isfinite(z);
  }
};

inline bool operator==(const Point3& a, const Point3& b) {
  return a.x == b.x && a.y == b.y && a.z == b.z;
}

struct Aabb {
  Point3 min{std::numeric_limits<double>::infinity(),
             std::numeric_limits<double>::infinity(),
             std::numeric_limits<double>::infinity()};
  Point3 max{-std::numeric_limits<double>::infinity(),
             -std::numeric_limits<double>::infinity(),
             -std::numeric_limits<double>::infinity()};

  bool valid() const { return min.x <= max.x; }

  void extend(const Point3& p) {
    min.x = std::min(min.x, p.x);
    min.y = std::min(min.y, p.y);
    min.z = std::min(min.z, p.z);
    max.x = std::max(max.x, p.x);
    max.y = std::max(max.y, p.y);
    max.z = std::max(max.z, p.z);
  }
};

// Rigid transform (rotation + translation). Callers validate via is_rigid().
struct RigidTransform {
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();

  Point3 apply(const Point3& p) const {
    return Point3::from(rotation * p.vec() + translation);
  }

  RigidTransform inverse() const {
    RigidTransform inv;
    inv.rotation = rotation.transpose();
    inv.translation = -(inv.rotation * translation);
    return inv;
  }

  bool is_rigid(double tol = 1e-9) const {
    const Eigen::Matrix3d err =
        rotation.transpose() * rotation - Eigen::Matrix3d::Identity();
    return err.cwiseAbs().maxCoeff() <= tol &&
           std::abs(rotation.determinant() - 1.0) <= tol;
  }
};

// Normalize an angle to (-pi, pi].
inline double wrap_angle(double a) {
  a = std::fmod(a, 2.0 * M_PI);
  if (a <= -M_PI) a += 2.0 * M_PI;
  if (a > M_PI) a -= 2.0 * M_PI;
  return a;
}

inline double angle_diff(double a, double b) { return wrap_angle(a - b); }

// SE(2) pose. Heading convention: the forward direction in the map frame is
// (cos theta, -sin theta, 0), i.e. the x axis of heading_rotation(theta).
// See docs/conventions.md.
struct Pose2 {
  double x = 0.0;
  double y = 0.0;
  double theta = 0.0;

  Eigen::Vector2d forward() const {
    return {std::cos(theta), -std::sin(theta)};
  }
};

}  // namespace terrapath
