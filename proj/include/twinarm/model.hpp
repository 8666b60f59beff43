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
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "twinarm/geometry.hpp"

namespace twinarm {

using JointVector = Eigen::VectorXd;

enum class Hand { left, right };

std::string_view hand_name(Hand hand) noexcept;
Hand parse_hand(std::string_view name);

struct PositionLimits {
  double min = 0.0;
  double max = 0.0;
};

/// A revolute joint. The origin maps the parent link frame to the joint frame;
/// the joint then rotates about `axis` (expressed in the joint frame).
struct JointSpec {
  std::string name;
  Vec3 axis = Vec3::UnitZ();
  Pose origin;
  PositionLimits position_limits;
  double velocity_limit = 1.0;
};

struct GripperSpec {
  double open_aperture = 0.0;
  double closed_aperture = 0.0;
};

struct RobotModel {
  std::string name;
  std::vector<JointSpec> joints;
  /// Flange to gripper-center frame.
  Pose ee_offset;
  GripperSpec gripper;
  /// FNV-1a 64 digest (hex) of the canonical document.
  std::string model_hash;
  /// Canonical JSON form of the definition, served to viewers on request.
  std::string canonical_document;

  std::size_t dof() const noexcept { return joints.size(); }
  bool within_limits(const JointVector& q) const;
  JointVector clamp_to_limits(const JointVector& q) const;
};

/// Parse and validate a model-config document.
///
/// Accepted fields: `name`, `joints[] {name, axis, origin{xyz, rpy},
/// limits{position[min,max], velocity}}`, `ee_offset{xyz, rpy}`,
/// `gripper{open, closed}`. Throws Error(parse) on malformed text or missing
/// fields and Error(validation) when an invariant fails.
RobotModel load_model(std::string_view document);
RobotModel load_model_file(const std::filesystem::path& path);

struct ArmConfig {
  std::string arm_name;
  RobotModel model;
  Pose base_pose;
  Hand assigned_hand = Hand::right;
};

/// One or two arms, each driven by a distinct hand.
struct ArmSetup {
  std::vector<ArmConfig> arms;

  void validate() const;
  const ArmConfig* find(std::string_view arm_name) const;
};

}  // namespace twinarm
