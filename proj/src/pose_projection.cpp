#include "terrapath/pose_projection.hpp"

#include <algorithm>
#include <cmath>

#include "terrapath/errors.hpp"

namespace terrapath {

Eigen::Matrix3d heading_rotation(double theta) {
  const double c = std::cos(theta), s = std::sin(theta);
  Eigen::Matrix3d r;
  r << c, s, 0.0,
      -s, c, 0.0,
      0.0, 0.0, 1.0;
  return r;
}

void euler_zyx(const Eigen::Matrix3d& rotation, double& yaw, double& pitch,
               double& roll) {
  const double sy = -rotation(2, 0);
  if (std::abs(sy) > 1.0 - 1e-12)
    throw DegenerateProjectionError("gimbal lock: |pitch| = pi/2");
  pitch = std::asin(std::clamp(sy, -1.0, 1.0));
  roll = std::atan2(rotation(2, 1), rotation(2, 2));
  yaw = std::atan2(rotation(1, 0), rotation(0, 0));
}

Eigen::Matrix3d rotation_from_euler_zyx(double yaw, double pitch, double roll) {
  const double cz = std::cos(yaw), sz = std::sin(yaw);
  const double cy = std::cos(pitch), sy = std::sin(pitch);
  const double cx = std::cos(roll), sx = std::sin(roll);
  Eigen::Matrix3d rz, ry, rx;
  rz << cz, -sz, 0, sz, cz, 0, 0, 0, 1;
  ry << cy, 0, sy, 0, 1, 0, -sy, 0, cy;
  rx << 1, 0, 0, 0, cx, -sx, 0, sx, cx;
  return rz * ry * rx;
}

ProjectedAttitude project(double theta, const Eigen::Vector3d& normal) {
  const Eigen::Matrix3d heading = heading_rotation(theta);
  const Eigen::Vector3d lateral = heading.col(1);
  const Eigen::Vector3d cross = lateral.cross(normal);
  const double norm = cross.norm();
  if (norm < 1e-6)
    throw DegenerateProjectionError(
        "terrain normal parallel to the robot's lateral axis");

  ProjectedAttitude att;
  const Eigen::Vector3d x_proj = cross / norm;
  att.rotation.col(0) = x_proj;
  att.rotation.col(1) = normal.cross(x_proj);
  att.rotation.col(2) = normal;
  euler_zyx(att.rotation, att.yaw, att.pitch, att.roll);
  return att;
}

double real_traversability(double r_sum, const ProjectedAttitude& attitude,
                           const RobotSpec& spec) {
  const double roll = attitude.roll, pitch = attitude.pitch;
  if (std::abs(roll) > spec.roll_max) return 0.0;
  if (pitch < spec.pitch_min || pitch > spec.pitch_max) return 0.0;
  if (r_sum > spec.r_max) return 0.0;

  const double pitch_penalty =
      std::max(pitch / spec.pitch_min, pitch / spec.pitch_max);
  const double tau = 1.0 - spec.w_roughness * r_sum / spec.r_max -
                     spec.w_roll * std::abs(roll) / spec.roll_max -
                     spec.w_pitch * pitch_penalty;
  return std::clamp(tau, 0.0, 1.0);
}

}  // namespace terrapath
