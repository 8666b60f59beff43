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

// Shared helpers for the test binaries.

#pragma once

#include <cstdint>
#include <random>
#include <string>

#include "twinarm/builtin.hpp"
#include "twinarm/model.hpp"
#include "twinarm/session.hpp"
#include "twinarm/synth.hpp"
#include "twinarm/wire.hpp"

namespace twinarm::testing {

inline RobotModel bundled(std::string_view name) { return load_model(*builtin_model(name)); }

inline JointVector joints(std::initializer_list<double> values) {
  JointVector q(static_cast<Eigen::Index>(values.size()));
  Eigen::Index i = 0;
  for (double v : values) q[i++] = v;
  return q;
}

/// Uniform in [min + margin, max - margin] per joint.
inline JointVector random_in_limits(const RobotModel& model, std::mt19937_64& rng, double margin = 0.0) {
  JointVector q(static_cast<Eigen::Index>(model.dof()));
  for (std::size_t i = 0; i < model.dof(); ++i) {
    const auto& lim = model.joints[i].position_limits;
    std::uniform_real_distribution<double> dist(lim.min + margin, lim.max - margin);
    q[static_cast<Eigen::Index>(i)] = dist(rng);
  }
  return q;
}

/// Central differences of the end-effector pose, 6 x n: linear velocity
/// rows then rotation-vector rows of R(q+h) R(q-h)^T / 2h.
Eigen::Matrix<double, 6, Eigen::Dynamic> finite_difference_jacobian(const RobotModel& model, const Pose& base,
                                                                  const JointVector& q, double step);

/// det(A) by cofactor expansion; independent of any factorization.
double cofactor_determinant(const Eigen::MatrixXd& a);

/// Single right arm at the origin with the bundled model, home pose and a
/// workspace box; no start anchor unless asked.
SessionConfig single_arm_config(bool with_anchor = true);

/// A synth script holding the right hand at `target` for `seconds`.
SynthScript hold_script(const Pose& target, double seconds, double pinch = 0.08);

/// End-effector pose at the bundled home configuration for a config's first arm.
Pose home_ee(const SessionConfig& config, std::size_t arm = 0);

/// Records a gentle scripted drift of the right arm away from home, one
/// sample per frame at 30 Hz.
Trajectory record_gentle(const SessionConfig& config, double seconds);

/// Adds `amount` to one joint of arm 0 from sample `index` on: a single
/// inter-sample jump between index - 1 and index.
void inject_jump(Trajectory& trajectory, const ArmSetup& setup, std::size_t index, std::size_t joint,
                 double amount);

/// Bends one joint of arm 0 smoothly (at most `step` per sample) so that
/// only sample `index` ends up `excess` beyond the joint's upper limit.
void inject_over_limit(Trajectory& trajectory, const ArmSetup& setup, std::size_t index, std::size_t joint,
                       double excess, double step = 0.05);

/// A random well-formed message of the given payload index (0..4, in
/// Payload variant order).
wire::Envelope random_message(std::mt19937_64& rng, std::size_t kind);

}  // namespace twinarm::testing
