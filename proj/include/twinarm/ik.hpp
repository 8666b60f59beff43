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

#include "twinarm/geometry.hpp"
#include "twinarm/kinematics.hpp"
#include "twinarm/model.hpp"

namespace twinarm {

struct IkParams {
  int max_iterations = 100;
  double damping = 1e-3;
  double pos_tolerance = 1e-4;
  double rot_tolerance = 1e-3;
  /// Per-iteration, per-joint step bound in radians.
  double step_limit = 0.2;

  void validate() const;
};

struct IkResult {
  JointVector q;
  bool converged = false;
  double pos_error = 0.0;
  double rot_error = 0.0;
  int iterations = 0;
};

using PoseError = Eigen::Matrix<double, 6, 1>;

/// (target position - current position, rotation vector of R_target * R_current^T).
PoseError pose_error(const Pose& current, const Pose& target);

/// One damped least-squares update: J^T (J J^T + damping^2 I)^-1 e.
JointVector dls_step(const Jacobian& j, const PoseError& e, double damping);

/// Damped least-squares IK with per-step clamping and joint-limit projection.
///
/// Starts from `q_seed` and stops as soon as both tolerances hold, so a seed
/// that already satisfies the target returns it unchanged with zero
/// iterations. On non-convergence the lowest-error iterate is returned with
/// converged = false; the caller decides what to command instead.
IkResult solve_ik(const RobotModel& model, const Pose& base, const Pose& target, const JointVector& q_seed,
                  const IkParams& params = {});

}  // namespace twinarm
