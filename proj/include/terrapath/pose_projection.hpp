#pragma once

#include <Eigen/Dense>

#include "terrapath/robot_spec.hpp"

namespace terrapath {

// Robot orientation projected onto the local terrain plane, plus its Z-Y-X
// (yaw-pitch-roll) Euler decomposition. The rotation's third column is the
// terrain normal; the relative yaw against the flat-ground heading frame is
// zero by construction.
struct ProjectedAttitude {
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
  double roll = 0.0;   // theta_x
  double pitch = 0.0;  // theta_y
  double yaw = 0.0;    // theta_z
};

// Heading-to-orientation map: columns are the heading frame axes
// [x y z] = [(cos t, -sin t, 0), (sin t, cos t, 0), (0, 0, 1)].
// The robot's forward motion direction is the x column.
Eigen::Matrix3d heading_rotation(double theta);

// Z-Y-X Euler angles (yaw, pitch, roll) with the standard closed form; the
// returned triple reconstructs R as Rz(yaw)*Ry(pitch)*Rx(roll). Throws
// DegenerateProjectionError at gimbal lock (|pitch| = pi/2), which is
// unreachable for inclinations below pi/2.
void euler_zyx(const Eigen::Matrix3d& rotation, double& yaw, double& pitch,
               double& roll);

Eigen::Matrix3d rotation_from_euler_zyx(double yaw, double pitch, double roll);

// Project a heading onto the terrain plane with unit normal v: the projected
// x axis is the normalized cross product of the heading frame's y axis with
// v, preserving zero relative yaw. Throws DegenerateProjectionError when the
// normal is (numerically) parallel to the lateral axis.
ProjectedAttitude project(double theta, const Eigen::Vector3d& normal);

// Real terrain traversability from roughness and projected roll/pitch.
// Zero is forced beyond the hard safety thresholds (|roll| > roll_max,
// pitch outside [pitch_min, pitch_max], r_sum > r_max; all strict).
double real_traversability(double r_sum, const ProjectedAttitude& attitude,
                           const RobotSpec& spec);

}  // namespace terrapath
