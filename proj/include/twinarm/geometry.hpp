// Copyright 2026 The twinarm Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <Eigen/Dense>
#include <Eigen/Geometry>

namespace twinarm {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
/// Hamilton quaternion. Construct as Quat(w, x, y, z); Eigen stores xyzw.
using Quat = Eigen::Quaterniond;

/// Rigid transform: maps points of the child frame into the parent frame.
struct Pose {
  Vec3 position = Vec3::Zero();
  Quat orientation = Quat::Identity();

  Pose() = default;
  Pose(const Vec3& p, const Quat& q) : position(p), orientation(q) {}

  static Pose identity() { return {}; }

  /// Composition; the result quaternion is renormalized.
  Pose operator*(const Pose& rhs) const;
  Vec3 operator*(const Vec3& point) const { return position + orientation * point; }
  Pose inverse() const;
  Mat3 rotation() const { return orientation.toRotationMatrix(); }
};

/// Exact coefficient equality (no sign folding of the quaternion).
bool operator==(const Pose& a, const Pose& b);

/// R = Rx(roll) * Ry(pitch) * Rz(yaw): intrinsic rotations about X, then Y, then Z.
Quat quat_from_rpy(double roll, double pitch, double yaw);
Quat quat_from_axis_angle(const Vec3& unit_axis, double angle);

/// Log map of a unit quaternion: axis * angle with angle in [0, pi].
Vec3 rotation_vector(const Quat& q);
/// Geodesic distance between two orientations, radians in [0, pi].
double rotation_distance(const Quat& a, const Quat& b);

bool all_finite(const Vec3& v);
bool all_finite(const Quat& q);
Pose pose_from_xyz_rpy(const Vec3& xyz, const Vec3& rpy);

}  // namespace twinarm
