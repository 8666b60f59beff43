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

#include <doctest.h>

#include <cmath>
#include <vector>

#include "fixtures.hpp"
#include "twinarm/error.hpp"
#include "twinarm/retarget.hpp"

using namespace twinarm;
using namespace twinarm::testing;

namespace {

HandSkeleton flat_hand() {
  HandSkeleton h;
  h.wrist = Pose(Vec3(0.3, 0, 0), Quat::Identity());
  h.knuckles = {Vec3(0.4, 0.03, 0), Vec3(0.4, 0.01, 0), Vec3(0.4, -0.01, 0), Vec3(0.4, -0.03, 0)};
  h.thumb_tip = Vec3(0.42, 0.06, -0.03);
  h.index_tip = Vec3(0.46, 0.035, -0.02);
  return h;
}

HandSkeleton transformed(const HandSkeleton& h, const Pose& t) {
  HandSkeleton out = h;
  out.wrist = t * h.wrist;
  for (Vec3* p : {&out.knuckles.index, &out.knuckles.middle, &out.knuckles.ring, &out.knuckles.little,
                  &out.thumb_tip, &out.index_tip}) {
    *p = t * *p;
  }
  return out;
}

double angle_between(const Quat& a, const Quat& b) { return rotation_distance(a, b); }

HandFrame palms_frame(std::int64_t t_ns, bool up) {
  HandFrame f;
  f.t_ns = t_ns;
  const Quat r = up ? palms_up_orientation(Hand::right) : quat_from_rpy(3.141592653589793, -0.5, -1.5707963267948966);
  f.right = skeleton_for_basis(Pose(Vec3(0.4, -0.3, 0.3), r), 0.08);
  return f;
}

std::vector<HandFrame> palms_window(double up_seconds, double gap_start = -1.0, double gap_len = 0.0) {
  std::vector<HandFrame> frames;
  // 0.5 s palms down, then the palms-up segment.
  const int total = static_cast<int>(std::llround((0.5 + up_seconds) * 30.0));
  for (int k = 0; k <= total; ++k) {
    const double t = k / 30.0;
    bool up = t >= 0.5 - 1e-9;
    if (gap_start >= 0.0 && t > 0.5 + gap_start && t < 0.5 + gap_start + gap_len) up = false;
    frames.push_back(palms_frame(std::llround(k * 1e9 / 30.0), up));
  }
  return frames;
}

EndGestureParams right_only() {
  EndGestureParams p;
  p.check_left = false;
  p.check_right = true;
  return p;
}

}  // namespace

TEST_CASE("hand basis origin is the knuckle mean") {
  const HandBasis b = compute_hand_basis(flat_hand());
  CHECK((b.origin - Vec3(0.4, 0, 0)).norm() < 1e-15);
}

TEST_CASE("hand basis matches an independent Gram-Schmidt") {
  const HandSkeleton h = flat_hand();
  const HandBasis b = compute_hand_basis(h);
  // Knuckle line +Y, forward +X: u = Y, f' = X, w = u x f = -Z.
  Mat3 oracle;
  oracle.col(0) = Vec3(0, 1, 0);
  oracle.col(1) = Vec3(1, 0, 0);
  oracle.col(2) = Vec3(0, 0, -1);
  CHECK((b.rotation.toRotationMatrix() - oracle).cwiseAbs().maxCoeff() < 1e-9);
  // Frozen oracle quaternion (tests/oracles/retarget_oracle.py), up to sign.
  CHECK(angle_between(b.rotation, Quat(0, 0.70710678118654746, 0.70710678118654757, 0)) < 1e-9);
}

TEST_CASE("hand basis is orthonormal for arbitrary skeletons") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int i = 0; i < 100; ++i) {
    const Pose t(Vec3(u(rng), u(rng), u(rng)), quat_from_rpy(3 * u(rng), 3 * u(rng), 3 * u(rng)));
    HandSkeleton h = transformed(flat_hand(), t);
    h.knuckles.middle += Vec3(u(rng), u(rng), u(rng)) * 0.005;
    const Mat3 r = compute_hand_basis(h).rotation.toRotationMatrix();
    CHECK((r.transpose() * r - Mat3::Identity()).cwiseAbs().maxCoeff() < 1e-9);
    CHECK(r.determinant() == doctest::Approx(1.0));
  }
}

TEST_CASE("degenerate hand geometry") {
  HandSkeleton h = flat_hand();
  h.wrist.position = Vec3(0.4, 0, 0);
  try {
    compute_hand_basis(h);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::degenerate_geometry);
  }
  h = flat_hand();
  h.wrist.position = Vec3(0.4, -0.2, 0);  // forward parallel to the knuckle line
  CHECK_THROWS_AS(compute_hand_basis(h), Error);
}

TEST_CASE("retarget without shift or pitch is the raw basis") {
  RetargetParams p;
  p.thumb_shift = 0.0;
  p.pitch_offset = 0.0;
  const HandSkeleton h = flat_hand();
  const RetargetResult r = hand_to_target(h, GripperState::open, p);
  const HandBasis b = compute_hand_basis(h);
  CHECK(r.target.pose.position == b.origin);
  CHECK(r.target.pose.orientation.coeffs() == b.rotation.coeffs());
}

TEST_CASE("retarget defaults match the step-by-step oracle") {
  const RetargetResult r = hand_to_target(flat_hand(), GripperState::open, RetargetParams{});
  const Vec3 p(0.40571428571428575, 0.017142857142857144, -0.0085714285714285719);
  CHECK((r.target.pose.position - p).norm() < 1e-12);
  const Quat q(0.091665181319690273, -0.70114013901190142, -0.70114013901190131, 0.091665181319690273);
  CHECK(angle_between(r.target.pose.orientation, q) < 1e-9);
  // Pinch distance 0.0482 is above the band: open.
  CHECK(r.grip == GripperState::open);
}

TEST_CASE("retarget is equivariant under rigid motion") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const RetargetResult base = hand_to_target(flat_hand(), GripperState::open, RetargetParams{});
  for (int i = 0; i < 50; ++i) {
    const Pose t(Vec3(u(rng), u(rng), u(rng)), quat_from_rpy(3 * u(rng), 3 * u(rng), 3 * u(rng)));
    const RetargetResult moved = hand_to_target(transformed(flat_hand(), t), GripperState::open, RetargetParams{});
    const Pose expected = t * base.target.pose;
    CHECK((moved.target.pose.position - expected.position).norm() < 1e-9);
    CHECK(angle_between(moved.target.pose.orientation, expected.orientation) < 1e-9);
  }
}

TEST_CASE("gripper thresholds with hysteresis") {
  const RetargetParams p;
  const Vec3 o = Vec3::Zero();
  CHECK(gripper_update(GripperState::open, o, Vec3(0.02, 0, 0), p) == GripperState::closed);
  CHECK(gripper_update(GripperState::closed, o, Vec3(0.06, 0, 0), p) == GripperState::open);
  CHECK(gripper_update(GripperState::closed, o, Vec3(0.041, 0, 0), p) == GripperState::closed);
  CHECK(gripper_update(GripperState::open, o, Vec3(0.041, 0, 0), p) == GripperState::open);
}

TEST_CASE("gripper does not chatter inside the band") {
  const RetargetParams p;
  for (GripperState start : {GripperState::open, GripperState::closed}) {
    GripperState g = start;
    int transitions = 0;
    for (int k = 0; k < 300; ++k) {
      const double d = p.grip_close_threshold + 0.0049 * std::sin(k * 0.7);
      const GripperState next = gripper_update(g, Vec3::Zero(), Vec3(d, 0, 0), p);
      transitions += next != g;
      g = next;
    }
    CHECK(transitions == 0);
  }
}

TEST_CASE("start gesture: sphere membership and conjunction") {
  StartAnchors anchors;
  anchors.right = Vec3(0.3, -0.3, 0.25);
  HandFrame f;
  f.right = skeleton_for_basis(Pose(*anchors.right, Quat::Identity()), 0.08);
  CHECK(detect_start_gesture(f, anchors, 0.06));
  f.right = skeleton_for_basis(Pose(*anchors.right + Vec3(0.07, 0, 0), Quat::Identity()), 0.08);
  CHECK_FALSE(detect_start_gesture(f, anchors, 0.06));

  anchors.left = Vec3(0.3, 0.3, 0.25);
  f.right = skeleton_for_basis(Pose(*anchors.right, Quat::Identity()), 0.08);
  f.left = skeleton_for_basis(Pose(*anchors.left + Vec3(0, 0, 0.2), Quat::Identity()), 0.08);
  CHECK_FALSE(detect_start_gesture(f, anchors, 0.06));
  f.left = skeleton_for_basis(Pose(*anchors.left, Quat::Identity()), 0.08);
  CHECK(detect_start_gesture(f, anchors, 0.06));

  HandFrame empty;
  CHECK_FALSE(detect_start_gesture(empty, anchors, 0.06));
}

TEST_CASE("palm normal sign convention") {
  const HandSkeleton right = skeleton_for_basis(Pose(Vec3::Zero(), palms_up_orientation(Hand::right)), 0.08);
  const HandSkeleton left = skeleton_for_basis(Pose(Vec3::Zero(), palms_up_orientation(Hand::left)), 0.08);
  CHECK((palm_normal(right, Hand::right) - Vec3::UnitZ()).norm() < 1e-12);
  CHECK((palm_normal(left, Hand::left) - Vec3::UnitZ()).norm() < 1e-12);
}

TEST_CASE("end gesture: 3.1 s fires, 2.9 s and a gap do not") {
  const EndGestureParams p = right_only();
  const auto full = palms_window(3.1);
  CHECK(detect_end_gesture(full, full.back().t_ns, p));
  const auto shorter = palms_window(2.9);
  CHECK_FALSE(detect_end_gesture(shorter, shorter.back().t_ns, p));
  const auto gap = palms_window(3.1, 1.5, 0.1);
  CHECK_FALSE(detect_end_gesture(gap, gap.back().t_ns, p));
  CHECK_FALSE(detect_end_gesture({}, 0, p));
}

TEST_CASE("end gesture fires exactly when the hold reaches 3 s") {
  const EndGestureParams p = right_only();
  const auto frames = palms_window(3.1);
  const std::int64_t first_up = std::llround(15 * 1e9 / 30.0);
  std::optional<std::int64_t> fired;
  for (std::size_t n = 1; n <= frames.size() && !fired; ++n) {
    std::span<const HandFrame> window(frames.data(), n);
    if (detect_end_gesture(window, frames[n - 1].t_ns, p)) fired = frames[n - 1].t_ns;
  }
  REQUIRE(fired);
  CHECK(*fired - first_up >= 3'000'000'000LL);
  CHECK(*fired - first_up < 3'000'000'000LL + 34'000'000LL);
}

TEST_CASE("retargeting is deterministic") {
  const HandSkeleton h = flat_hand();
  const RetargetResult a = hand_to_target(h, GripperState::closed, RetargetParams{});
  const RetargetResult b = hand_to_target(h, GripperState::closed, RetargetParams{});
  CHECK(a.target.pose == b.target.pose);
  CHECK(a.grip == b.grip);
}

TEST_CASE("synthetic skeletons invert the retargeting") {
  const RetargetParams p;
  std::mt19937_64 rng(29);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int i = 0; i < 50; ++i) {
    const Pose target(Vec3(u(rng), u(rng), u(rng)), quat_from_rpy(3 * u(rng), 3 * u(rng), 3 * u(rng)));
    const double pinch = 0.01 + 0.09 * (u(rng) + 1) / 2;
    const HandSkeleton h = skeleton_for_target(target, pinch, p);
    const RetargetResult r = hand_to_target(h, GripperState::open, p);
    CHECK((r.target.pose.position - target.position).norm() < 1e-12);
    CHECK(angle_between(r.target.pose.orientation, target.orientation) < 1e-9);
    CHECK((h.thumb_tip - h.index_tip).norm() == doctest::Approx(pinch));
  }
}
