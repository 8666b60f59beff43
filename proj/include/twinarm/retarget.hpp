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

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>

#include "twinarm/geometry.hpp"
#include "twinarm/model.hpp"

namespace twinarm {

struct Knuckles {
  Vec3 index = Vec3::Zero();
  Vec3 middle = Vec3::Zero();
  Vec3 ring = Vec3::Zero();
  Vec3 little = Vec3::Zero();
};

/// One tracked hand, world frame, meters.
struct HandSkeleton {
  Pose wrist;
  Knuckles knuckles;
  Vec3 thumb_tip = Vec3::Zero();
  Vec3 index_tip = Vec3::Zero();

  bool finite() const;
};

struct HandFrame {
  /// Nanoseconds since the session epoch.
  std::int64_t t_ns = 0;
  std::uint64_t seq = 0;
  std::optional<HandSkeleton> left;
  std::optional<HandSkeleton> right;

  const std::optional<HandSkeleton>& hand(Hand side) const { return side == Hand::left ? left : right; }
  std::optional<HandSkeleton>& hand(Hand side) { return side == Hand::left ? left : right; }
};

struct RetargetParams {
  double thumb_shift = 0.02;
  double pitch_offset = 0.26;
  double grip_close_threshold = 0.04;
  double grip_hysteresis = 0.005;

  void validate() const;
};

enum class GripperState { open, closed };

std::string_view gripper_name(GripperState g) noexcept;
GripperState parse_gripper(std::string_view name);

struct EeTarget {
  Pose pose;
  GripperState gripper = GripperState::open;
  std::uint64_t source_seq = 0;
  std::int64_t source_t_ns = 0;
};

/// Orthonormal hand frame: origin at the knuckle centroid, columns
/// (u, f', w) with u along the little->index knuckle line, f' toward the
/// fingers from the wrist, w = u x f'.
struct HandBasis {
  Vec3 origin = Vec3::Zero();
  Quat rotation = Quat::Identity();
};

/// Throws Error(degenerate_geometry) when the knuckle line and the
/// wrist->centroid direction are (nearly) collinear or coincident.
HandBasis compute_hand_basis(const HandSkeleton& hand);

GripperState gripper_update(GripperState prev, const Vec3& thumb_tip, const Vec3& index_tip,
                            const RetargetParams& params);

struct RetargetResult {
  EeTarget target;
  GripperState grip = GripperState::open;
};

/// Knuckle-centroid pose shifted toward the thumb tip and pitched about u.
RetargetResult hand_to_target(const HandSkeleton& hand, GripperState prev_grip, const RetargetParams& params);

/// Sphere centers for the start gesture; a side without an anchor is ignored.
struct StartAnchors {
  std::optional<Vec3> left;
  std::optional<Vec3> right;
};

/// True iff at least one hand is checked and every present hand that has an
/// anchor has its knuckle centroid within `radius` of it.
bool detect_start_gesture(const HandFrame& frame, const StartAnchors& anchors, double radius = 0.06);

/// Outward palm normal. For a right hand this is w; for a left hand, -w.
Vec3 palm_normal(const HandSkeleton& hand, Hand side);

struct EndGestureParams {
  double hold_seconds = 3.0;
  double cone_degrees = 25.0;
  bool check_left = true;
  bool check_right = true;
};

/// Palms held face up (normal within the cone about world +Z) for every
/// present, checked hand, without interruption over [now - hold, now].
/// Frames must be time ordered; frames after `now` are ignored.
bool detect_end_gesture(std::span<const HandFrame> window, std::int64_t now_ns,
                        const EndGestureParams& params = {});

}  // namespace twinarm
