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

#include "twinarm/constraints.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "twinarm/error.hpp"
#include "twinarm/kinematics.hpp"

namespace twinarm {

void WorkspaceBox::validate() const {
  if (!(min.array() < max.array()).all()) {
    throw Error(ErrorCode::validation, "workspace box requires min < max on every axis");
  }
}

void SingularityParams::validate() const {
  if (!(m_start > m_full && m_full > 0.0)) {
    throw Error(ErrorCode::validation, "singularity parameters require m_start > m_full > 0");
  }
}

void SpeedParams::validate() const {
  if (!(v_max > 0.0 && window >= 2)) {
    throw Error(ErrorCode::validation, "speed parameters require v_max > 0 and window >= 2");
  }
}

std::string_view face_name(Face face) noexcept {
  switch (face) {
    case Face::pos_x: return "+X";
    case Face::neg_x: return "-X";
    case Face::pos_y: return "+Y";
    case Face::neg_y: return "-Y";
    case Face::pos_z: return "+Z";
    case Face::neg_z: return "-Z";
  }
  return "?";
}

Face parse_face(std::string_view name) {
  for (Face f : {Face::pos_x, Face::neg_x, Face::pos_y, Face::neg_y, Face::pos_z, Face::neg_z}) {
    if (face_name(f) == name) return f;
  }
  throw Error(ErrorCode::parse, "unknown workspace face '" + std::string(name) + "'");
}

double singularity_proximity(double manipulability, const SingularityParams& params) {
  const double m = std::max(manipulability, 1e-300);
  if (m >= params.m_start) return 0.0;
  if (m <= params.m_full) return 1.0;
  const double log_start = std::log10(params.m_start);
  const double log_full = std::log10(params.m_full);
  return std::clamp((log_start - std::log10(m)) / (log_start - log_full), 0.0, 1.0);
}

std::vector<FaceViolation> check_workspace(const WorkspaceBox& box, const Vec3& p) {
  static constexpr Face kPos[] = {Face::pos_x, Face::pos_y, Face::pos_z};
  static constexpr Face kNeg[] = {Face::neg_x, Face::neg_y, Face::neg_z};
  std::vector<FaceViolation> out;
  for (int axis = 0; axis < 3; ++axis) {
    if (p[axis] > box.max[axis]) {
      out.push_back({kPos[axis], p[axis] - box.max[axis]});
    } else if (p[axis] < box.min[axis]) {
      out.push_back({kNeg[axis], box.min[axis] - p[axis]});
    }
  }
  return out;
}

SpeedEstimate estimate_speed(std::span<const TimedPosition> history, const SpeedParams& params) {
  if (history.size() < 2) throw Error(ErrorCode::invalid_argument, "speed estimate needs at least two samples");
  const std::size_t span = std::min(history.size(), params.window);
  const TimedPosition& newest = history.back();
  const TimedPosition& oldest = history[history.size() - span];
  const std::int64_t dt_ns = newest.t_ns - oldest.t_ns;
  if (dt_ns <= 0) throw Error(ErrorCode::invalid_argument, "speed estimate needs increasing timestamps");
  SpeedEstimate out;
  out.ee_speed = (newest.position - oldest.position).norm() / (static_cast<double>(dt_ns) * 1e-9);
  out.violated = out.ee_speed > params.v_max;
  return out;
}

ConstraintStatus evaluate(const RobotModel& model, const Pose& base, const JointVector& q, const WorkspaceBox& box,
                          std::span<const TimedPosition> history, const SingularityParams& s_params,
                          const SpeedParams& v_params) {
  ConstraintStatus status;
  const Jacobian j = jacobian(model, base, q);
  status.singularity_proximity = singularity_proximity(manipulability_of(j), s_params);
  const Pose ee = ee_pose(model, base, q);
  status.workspace = check_workspace(box, base.inverse() * ee.position);
  if (history.size() >= 2) {
    const SpeedEstimate speed = estimate_speed(history, v_params);
    status.ee_speed = speed.ee_speed;
    status.speed_violated = speed.violated;
  }
  return status;
}

}  // namespace twinarm
