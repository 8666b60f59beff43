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

#include <vector>

#include <Eigen/Dense>

#include "twinarm/geometry.hpp"
#include "twinarm/model.hpp"

namespace twinarm {

/// Rows 0-2: linear velocity of the ee origin; rows 3-5: angular velocity.
/// Both expressed in the world frame.
using Jacobian = Eigen::Matrix<double, 6, Eigen::Dynamic>;

/// World poses of every joint's child link frame followed by the ee frame;
/// n + 1 entries for an n-joint chain.
std::vector<Pose> forward_kinematics(const RobotModel& model, const Pose& base, const JointVector& q);

/// Last element of forward_kinematics, without materializing the others.
Pose ee_pose(const RobotModel& model, const Pose& base, const JointVector& q);

Jacobian jacobian(const RobotModel& model, const Pose& base, const JointVector& q);

/// Which Jacobian rows enter the Gram determinant.
///
/// `automatic` uses the linear rows for chains of three or fewer joints and
/// all six rows otherwise. A planar chain always has independent angular
/// columns, so only its positional block can lose rank.
enum class ManipulabilityRows { automatic, full, linear };

/// det(J^T J) over the selected rows, clamped at zero.
double manipulability(const RobotModel& model, const Pose& base, const JointVector& q,
                      ManipulabilityRows rows = ManipulabilityRows::automatic);
double manipulability_of(const Jacobian& j, ManipulabilityRows rows = ManipulabilityRows::automatic);

}  // namespace twinarm
