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

#include "twinarm/ik.hpp"

#include <algorithm>
#include <limits>
#include <string>

#include "twinarm/error.hpp"

namespace twinarm {

void IkParams::validate() const {
  if (!(max_iterations > 0 && damping > 0.0 && pos_tolerance > 0.0 && rot_tolerance > 0.0 && step_limit > 0.0)) {
    throw Error(ErrorCode::validation, "ik parameters must be strictly positive");
  }
}

PoseError pose_error(const Pose& current, const Pose& target) {
  PoseError e;
  e.head<3>() = target.position - current.position;
  e.tail<3>() = rotation_vector(target.orientation * current.orientation.conjugate());
  return e;
}

JointVector dls_step(const Jacobian& j, const PoseError& e, double damping) {
  Eigen::Matrix<double, 6, 6> a = j * j.transpose();
  a.diagonal().array() += damping * damping;
  return j.transpose() * a.ldlt().solve(e);
}

IkResult solve_ik(const RobotModel& model, const Pose& base, const Pose& target, const JointVector& q_seed,
                  const IkParams& params) {
  params.validate();
  if (static_cast<std::size_t>(q_seed.size()) != model.dof()) {
    throw Error(ErrorCode::dimension, "ik seed has " + std::to_string(q_seed.size()) + " entries, expected " +
                                          std::to_string(model.dof()));
  }
  if (!all_finite(target.position) || !all_finite(target.orientation)) {
    throw Error(ErrorCode::non_finite, "ik target is not finite");
  }
  const Pose goal(target.position, target.orientation.normalized());

  JointVector q = model.clamp_to_limits(q_seed);
  IkResult best;
  double best_score = std::numeric_limits<double>::infinity();

  for (int it = 0;; ++it) {
    const PoseError e = pose_error(ee_pose(model, base, q), goal);
    const double pos_err = e.head<3>().norm();
    const double rot_err = e.tail<3>().norm();
    const double score = e.norm();
    if (score < best_score) {
      best_score = score;
      best = IkResult{q, false, pos_err, rot_err, it};
    }
    if (pos_err <= params.pos_tolerance && rot_err <= params.rot_tolerance) {
      return IkResult{q, true, pos_err, rot_err, it};
    }
    if (it == params.max_iterations) break;

    JointVector dq = dls_step(jacobian(model, base, q), e, params.damping);
    dq = dq.cwiseMax(-params.step_limit).cwiseMin(params.step_limit);
    q = model.clamp_to_limits(q + dq);
  }
  best.iterations = params.max_iterations;
  return best;
}

}  // namespace twinarm
