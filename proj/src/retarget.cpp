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

#include "twinarm/retarget.hpp"

#include <cmath>
#include <numbers>

#include "twinarm/error.hpp"

namespace twinarm {
namespace {

constexpr double kDegenerate = 1e-6;

bool finite(const Vec3& v) { return v.allFinite(); }

}  // namespace

bool HandSkeleton::finite() const {
  return twinarm::finite(wrist.position) && all_finite(wrist.orientation) && twinarm::finite(knuckles.index) &&
         twinarm::finite(knuckles.middle) && twinarm::finite(knuckles.ring) && twinarm::finite(knuckles.little) &&
         twinarm::finite(thumb_tip) && twinarm::finite(index_tip);
}

void RetargetParams::validate() const {
  if (!(thumb_shift >= 0.0 && grip_hysteresis >= 0.0 && grip_close_threshold > grip_hysteresis) ||
      !std::isfinite(pitch_offset)) {
    throw Error(ErrorCode::validation, "retarget parameters out of range");
  }
}

std::string_view gripper_name(GripperState g) noexcept { return g == GripperState::open ? "open" : "closed"; }

GripperState parse_gripper(std::string_view name) {
  if (name == "open") return GripperState::open;
  if (name == "closed") return GripperState::closed;
  throw Error(ErrorCode::parse, "unknown gripper state '" + std::string(name) + "'");
}

HandBasis compute_hand_basis(const HandSkeleton& hand) {
  if (!hand.finite()) throw Error(ErrorCode::non_finite, "hand skeleton contains non-finite values");
  const Knuckles& k = hand.knuckles;
  HandBasis basis;
  basis.origin = (k.index + k.middle + k.ring + k.little) / 4.0;

  const Vec3 across = k.index - k.little;
  const Vec3 forward = basis.origin - hand.wrist.position;
  if (across.norm() < kDegenerate || forward.norm() < kDegenerate) {
    throw Error(ErrorCode::degenerate_geometry, "hand basis: coincident knuckle or wrist points");
  }
  const Vec3 u = across.normalized();
  const Vec3 f = forward.normalized();
  const Vec3 normal = u.cross(f);
  if (normal.norm() < kDegenerate) {
    throw Error(ErrorCode::degenerate_geometry, "hand basis: knuckle line parallel to wrist direction");
  }
  const Vec3 w = normal.normalized();
  const Vec3 f_perp = w.cross(u);

  Mat3 r;
  r.col(0) = u;
  r.col(1) = f_perp;
  r.col(2) = w;
  basis.rotation = Quat(r).normalized();
  return basis;
}

GripperState gripper_update(GripperState prev, const Vec3& thumb_tip, const Vec3& index_tip,
                            const RetargetParams& params) {
  const double d = (thumb_tip - index_tip).norm();
  if (d < params.grip_close_threshold - params.grip_hysteresis) return GripperState::closed;
  if (d > params.grip_close_threshold + params.grip_hysteresis) return GripperState::open;
  return prev;
}

RetargetResult hand_to_target(const HandSkeleton& hand, GripperState prev_grip, const RetargetParams& params) {
  const HandBasis basis = compute_hand_basis(hand);

  Vec3 position = basis.origin;
  if (params.thumb_shift > 0.0) {
    const Vec3 to_thumb = hand.thumb_tip - basis.origin;
    if (to_thumb.norm() < kDegenerate) {
      throw Error(ErrorCode::degenerate_geometry, "thumb tip coincides with knuckle centroid");
    }
    position += params.thumb_shift * to_thumb.normalized();
  }
  Quat orientation = basis.rotation;
  if (params.pitch_offset != 0.0) {
    orientation = (basis.rotation * quat_from_axis_angle(Vec3::UnitX(), params.pitch_offset)).normalized();
  }

  RetargetResult out;
  out.grip = gripper_update(prev_grip, hand.thumb_tip, hand.index_tip, params);
  out.target.pose = Pose(position, orientation);
  out.target.gripper = out.grip;
  return out;
}

bool detect_start_gesture(const HandFrame& frame, const StartAnchors& anchors, double radius) {
  bool checked = false;
  for (Hand side : {Hand::left, Hand::right}) {
    const auto& hand = frame.hand(side);
    const auto& anchor = side == Hand::left ? anchors.left : anchors.right;
    if (!hand || !anchor) continue;
    const Knuckles& k = hand->knuckles;
    const Vec3 centroid = (k.index + k.middle + k.ring + k.little) / 4.0;
    if ((centroid - *anchor).norm() > radius) return false;
    checked = true;
  }
  return checked;
}

Vec3 palm_normal(const HandSkeleton& hand, Hand side) {
  const Vec3 w = compute_hand_basis(hand).rotation * Vec3::UnitZ();
  return side == Hand::right ? w : Vec3(-w);
}

namespace {

// True when every checked hand present in the frame is palm-up, and at least
// one checked hand is present.
bool frame_palms_up(const HandFrame& frame, const EndGestureParams& params, double cos_cone) {
  bool any = false;
  for (Hand side : {Hand::left, Hand::right}) {
    if ((side == Hand::left && !params.check_left) || (side == Hand::right && !params.check_right)) continue;
    const auto& hand = frame.hand(side);
    if (!hand) continue;
    any = true;
    try {
      if (palm_normal(*hand, side).dot(Vec3::UnitZ()) <= cos_cone) return false;
    } catch (const Error&) {
      return false;
    }
  }
  return any;
}

}  // namespace

bool detect_end_gesture(std::span<const HandFrame> window, std::int64_t now_ns, const EndGestureParams& params) {
  const double cos_cone = std::cos(params.cone_degrees * std::numbers::pi / 180.0);
  const auto hold_ns = static_cast<std::int64_t>(std::llround(params.hold_seconds * 1e9));
  const std::int64_t start_ns = now_ns - hold_ns;

  // Walk backwards from the newest frame at or before now; the streak must
  // reach a frame stamped at or before the window start.
  bool saw_current = false;
  for (auto it = window.rbegin(); it != window.rend(); ++it) {
    if (it->t_ns > now_ns) continue;
    if (!frame_palms_up(*it, params, cos_cone)) return false;
    saw_current = true;
    if (it->t_ns <= start_ns) return saw_current;
  }
  return false;
}

}  // namespace twinarm
