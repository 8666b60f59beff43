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

#include "twinarm/kinematics.hpp"

#include <string>

#include "twinarm/error.hpp"

namespace twinarm {
namespace {

void check_dimension(const RobotModel& model, const JointVector& q) {
  if (static_cast<std::size_t>(q.size()) != model.dof()) {
    throw Error(ErrorCode::dimension, "joint vector has " + std::to_string(q.size()) +
                                          " entries, model '" + model.name + "' has " +
                                          std::to_string(model.dof()) + " joints");
  }
  if (!q.allFinite()) throw Error(ErrorCode::non_finite, "joint vector contains non-finite values");
}

// Walks the chain once. For each joint records the world-frame axis and origin
// (needed by the Jacobian) and the pose after its rotation.
template <typename OnJoint>
Pose walk_chain(const RobotModel& model, const Pose& base, const JointVector& q, OnJoint&& on_joint) {
  Pose t = base;
  for (std::size_t i = 0; i < model.dof(); ++i) {
    const JointSpec& joint = model.joints[i];
    t = t * joint.origin;
    const Vec3 axis_world = t.orientation * joint.axis;
    const Vec3 origin_world = t.position;
    t.orientation = (t.orientation * quat_from_axis_angle(joint.axis, q[i])).normalized();
    on_joint(i, axis_world, origin_world, t);
  }
  return t * model.ee_offset;
}

}  // namespace

std::vector<Pose> forward_kinematics(const RobotModel& model, const Pose& base, const JointVector& q) {
  check_dimension(model, q);
  std::vector<Pose> frames;
  frames.reserve(model.dof() + 1);
  const Pose ee = walk_chain(model, base, q, [&](std::size_t, const Vec3&, const Vec3&, const Pose& link) {
    frames.push_back(link);
  });
  frames.push_back(ee);
  return frames;
}

Pose ee_pose(const RobotModel& model, const Pose& base, const JointVector& q) {
  check_dimension(model, q);
  return walk_chain(model, base, q, [](std::size_t, const Vec3&, const Vec3&, const Pose&) {});
}

Jacobian jacobian(const RobotModel& model, const Pose& base, const JointVector& q) {
  check_dimension(model, q);
  const std::size_t n = model.dof();
  std::vector<Vec3> axes(n);
  std::vector<Vec3> origins(n);
  const Pose ee = walk_chain(model, base, q, [&](std::size_t i, const Vec3& axis, const Vec3& origin, const Pose&) {
    axes[i] = axis;
    origins[i] = origin;
  });
  Jacobian j(6, static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    const auto col = static_cast<Eigen::Index>(i);
    j.block<3, 1>(0, col) = axes[i].cross(ee.position - origins[i]);
    j.block<3, 1>(3, col) = axes[i];
  }
  return j;
}

double manipulability_of(const Jacobian& j, ManipulabilityRows rows) {
  if (rows == ManipulabilityRows::automatic) {
    rows = j.cols() <= 3 ? ManipulabilityRows::linear : ManipulabilityRows::full;
  }
  Eigen::MatrixXd gram;
  if (rows == ManipulabilityRows::linear) {
    gram = j.topRows<3>().transpose() * j.topRows<3>();
  } else {
    gram = j.transpose() * j;
  }
  const double det = gram.determinant();
  // A Gram determinant is non-negative; anything below is rounding noise.
  return det > 0.0 ? det : 0.0;
}

double manipulability(const RobotModel& model, const Pose& base, const JointVector& q, ManipulabilityRows rows) {
  return manipulability_of(jacobian(model, base, q), rows);
}

}  // namespace twinarm
