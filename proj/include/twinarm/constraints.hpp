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

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "twinarm/geometry.hpp"
#include "twinarm/model.hpp"

namespace twinarm {

/// Axis-aligned box in the arm's base frame.
struct WorkspaceBox {
  Vec3 min = Vec3::Zero();
  Vec3 max = Vec3::Zero();

  void validate() const;
};

/// Log-space proximity ramp between m_start (proximity 0) and m_full (1).
struct SingularityParams {
  double m_start = 1e-4;
  double m_full = 1e-7;

  void validate() const;
};

struct SpeedParams {
  double v_max = 0.5;
  std::size_t window = 5;

  void validate() const;
};

enum class Face { pos_x, neg_x, pos_y, neg_y, pos_z, neg_z };

std::string_view face_name(Face face) noexcept;
Face parse_face(std::string_view name);

struct FaceViolation {
  Face face = Face::pos_x;
  double depth = 0.0;

  bool operator==(const FaceViolation&) const = default;
};

struct ConstraintStatus {
  double singularity_proximity = 0.0;
  std::vector<FaceViolation> workspace;
  double ee_speed = 0.0;
  bool speed_violated = false;

  bool operator==(const ConstraintStatus&) const = default;
};

struct TimedPosition {
  std::int64_t t_ns = 0;
  Vec3 position = Vec3::Zero();
};

double singularity_proximity(double manipulability, const SingularityParams& params);

/// One entry per penetrated face, ordered X, Y, Z. Empty inside the box.
std::vector<FaceViolation> check_workspace(const WorkspaceBox& box, const Vec3& ee_pos_base);

struct SpeedEstimate {
  double ee_speed = 0.0;
  bool violated = false;
};

/// Mean speed between the newest sample and the oldest one inside the
/// trailing window (all samples when fewer than `window` exist). Needs at
/// least two samples; a non-positive time span is an error.
SpeedEstimate estimate_speed(std::span<const TimedPosition> history, const SpeedParams& params);

/// All three checks on the ee pose at q. `history` is the trailing ee
/// position stream in world coordinates and should end with the pose at q;
/// fewer than two samples count as stationary.
ConstraintStatus evaluate(const RobotModel& model, const Pose& base, const JointVector& q, const WorkspaceBox& box,
                          std::span<const TimedPosition> history, const SingularityParams& s_params,
                          const SpeedParams& v_params);

}  // namespace twinarm
