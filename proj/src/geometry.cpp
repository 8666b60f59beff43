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

#include "twinarm/geometry.hpp"

#include <cmath>

#include "twinarm/error.hpp"

namespace twinarm {

std::string_view error_code_name(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::parse: return "parse error";
    case ErrorCode::validation: return "validation error";
    case ErrorCode::dimension: return "dimension mismatch";
    case ErrorCode::degenerate_geometry: return "degenerate geometry";
    case ErrorCode::non_finite: return "non-finite value";
    case ErrorCode::io: return "i/o error";
    case ErrorCode::version_mismatch: return "version mismatch";
    case ErrorCode::model_mismatch: return "model mismatch";
    case ErrorCode::unknown_type: return "unknown type";
    case ErrorCode::protocol: return "protocol violation";
    case ErrorCode::bind: return "bind failure";
    case ErrorCode::invalid_argument: return "invalid argument";
    case ErrorCode::empty: return "empty input";
  }
  return "error";
}

Pose Pose::operator*(const Pose& rhs) const {
  Pose out;
  out.position = position + orientation * rhs.position;
  out.orientation = (orientation * rhs.orientation).normalized();
  return out;
}

Pose Pose::inverse() const {
  Pose out;
  out.orientation = orientation.conjugate();
  out.position = -(out.orientation * position);
  return out;
}

bool operator==(const Pose& a, const Pose& b) {
  return a.position == b.position && a.orientation.coeffs() == b.orientation.coeffs();
}

Quat quat_from_rpy(double roll, double pitch, double yaw) {
  const Quat qx(Eigen::AngleAxisd(roll, Vec3::UnitX()));
  const Quat qy(Eigen::AngleAxisd(pitch, Vec3::UnitY()));
  const Quat qz(Eigen::AngleAxisd(yaw, Vec3::UnitZ()));
  return (qx * qy * qz).normalized();
}

Quat quat_from_axis_angle(const Vec3& unit_axis, double angle) {
  const double half = 0.5 * angle;
  const double s = std::sin(half);
  return Quat(std::cos(half), unit_axis.x() * s, unit_axis.y() * s, unit_axis.z() * s);
}

Vec3 rotation_vector(const Quat& q_in) {
  Quat q = q_in.normalized();
  if (q.w() < 0.0) q.coeffs() = -q.coeffs();
  const Vec3 v = q.vec();
  const double s = v.norm();
  if (s < 1e-12) {
    // Small-angle limit of 2*atan2(s, w)/s.
    return (2.0 / q.w()) * v;
  }
  const double angle = 2.0 * std::atan2(s, q.w());
  return v * (angle / s);
}

double rotation_distance(const Quat& a, const Quat& b) {
  return rotation_vector(a * b.conjugate()).norm();
}

bool all_finite(const Vec3& v) { return v.allFinite(); }
bool all_finite(const Quat& q) { return q.coeffs().allFinite(); }

Pose pose_from_xyz_rpy(const Vec3& xyz, const Vec3& rpy) {
  return Pose(xyz, quat_from_rpy(rpy.x(), rpy.y(), rpy.z()));
}

}  // namespace twinarm
