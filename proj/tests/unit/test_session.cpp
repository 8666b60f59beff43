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

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstring>

#include "fixtures.hpp"
#include "twinarm/control.hpp"
#include "twinarm/error.hpp"
#include "twinarm/kinematics.hpp"
#include "twinarm/session.hpp"
#include "twinarm/synth.hpp"

using namespace twinarm;
using namespace twinarm::testing;

namespace {

SessionConfig manual_config() {
  SessionConfig c = single_arm_config(false);
  c.auto_arm = false;
  return c;
}

HandFrame frame_at(const Pose& target, std::uint64_t seq, double pinch = 0.08) {
  HandFrame f;
  f.seq = seq;
  f.t_ns = std::llround(static_cast<double>(seq - 1) * 1e9 / 30.0);
  f.right = skeleton_for_target(target, pinch, RetargetParams{});
  return f;
}

Pose shifted(const Pose& p, const Vec3& d) { return Pose(p.position + d, p.orientation); }

}  // namespace

TEST_CASE("session starts at home") {
  Session s(manual_config());
  REQUIRE(s.current().size() == 1);
  CHECK(s.current()[0].q_cmd == s.config().arm_settings[0].home);
  CHECK(s.recording_state() == RecordingState::idle);
}

TEST_CASE("tracking a reachable target converges") {
  Session s(manual_config());
  const Pose target = shifted(home_ee(s.config()), Vec3(0.02, 0.01, -0.02));
  const TickOutput out = s.tick(frame_at(target, 1));
  REQUIRE(out.accepted);
  REQUIRE(out.arms.size() == 1);
  CHECK(out.arms[0].sample.ik_ok);
  CHECK((out.arms[0].sample.ee_pose.position - target.position).norm() < 1e-4);
  CHECK(s.config().setup.arms[0].model.within_limits(out.arms[0].sample.q_cmd));
}

TEST_CASE("fallback holds the previous command bit for bit") {
  Session s(manual_config());
  const Pose home = home_ee(s.config());
  const TickOutput first = s.tick(frame_at(shifted(home, Vec3(0.01, 0, 0)), 1));
  REQUIRE(first.arms[0].sample.ik_ok);
  const TickOutput bad = s.tick(frame_at(Pose(Vec3(2.0, -0.3, 0.3), home.orientation), 2));
  CHECK_FALSE(bad.arms[0].sample.ik_ok);
  REQUIRE(bad.arms[0].ik);
  CHECK_FALSE(bad.arms[0].ik->converged);
  const JointVector& a = first.arms[0].sample.q_cmd;
  const JointVector& b = bad.arms[0].sample.q_cmd;
  CHECK(std::memcmp(a.data(), b.data(), sizeof(double) * static_cast<std::size_t>(a.size())) == 0);
}

TEST_CASE("absent hand holds the command") {
  Session s(manual_config());
  const TickOutput first = s.tick(frame_at(shifted(home_ee(s.config()), Vec3(0.01, 0, 0)), 1));
  HandFrame empty;
  empty.seq = 2;
  empty.t_ns = 33'333'333;
  const TickOutput held = s.tick(empty);
  CHECK_FALSE(held.arms[0].hand_present);
  CHECK(held.arms[0].sample.q_cmd == first.arms[0].sample.q_cmd);
  CHECK(held.arms[0].sample.ik_ok);
}

TEST_CASE("degenerate skeleton counts as a failed solve") {
  Session s(manual_config());
  const TickOutput first = s.tick(frame_at(home_ee(s.config()), 1));
  HandFrame f = frame_at(home_ee(s.config()), 2);
  f.right->wrist.position = (f.right->knuckles.index + f.right->knuckles.middle + f.right->knuckles.ring +
                             f.right->knuckles.little) /
                            4.0;
  const TickOutput out = s.tick(f);
  CHECK_FALSE(out.arms[0].sample.ik_ok);
  CHECK(out.arms[0].sample.q_cmd == first.arms[0].sample.q_cmd);
}

TEST_CASE("stale frames are dropped") {
  Session s(manual_config());
  const Pose home = home_ee(s.config());
  CHECK(s.tick(frame_at(home, 5)).accepted);
  CHECK_FALSE(s.tick(frame_at(home, 5)).accepted);
  CHECK_FALSE(s.tick(frame_at(home, 3)).accepted);
  CHECK(s.dropped_frames() == 2);
  CHECK(s.tick(frame_at(home, 6)).accepted);
  s.reset_stream();
  CHECK(s.tick(frame_at(home, 1)).accepted);
}

TEST_CASE("gripper follows the pinch") {
  Session s(manual_config());
  const Pose home = home_ee(s.config());
  CHECK(s.tick(frame_at(home, 1, 0.08)).arms[0].sample.gripper == GripperState::open);
  CHECK(s.tick(frame_at(home, 2, 0.02)).arms[0].sample.gripper == GripperState::closed);
  CHECK(s.tick(frame_at(home, 3, 0.041)).arms[0].sample.gripper == GripperState::closed);
  CHECK(s.tick(frame_at(home, 4, 0.06)).arms[0].sample.gripper == GripperState::open);
}

TEST_CASE("constant pose stream has zero speed") {
  Session s(manual_config());
  const auto frames = generate_frames(hold_script(home_ee(s.config()), 1.0));
  for (const HandFrame& f : frames) {
    const TickOutput out = s.tick(f);
    CHECK(out.arms[0].sample.constraint.ee_speed == 0.0);
    CHECK_FALSE(out.arms[0].sample.constraint.speed_violated);
  }
}

TEST_CASE("fallback invariant over a stream with unreachable stretches") {
  Session s(manual_config());
  const Pose home = home_ee(s.config());
  SynthScript script = hold_script(home, 4.0);
  SynthWaypoint far = script.hands[0].waypoints[0];
  far.t = 2.0;
  far.position = Vec3(0.9, -0.3, 0.3);
  SynthWaypoint back = script.hands[0].waypoints[0];
  back.t = 4.0;
  script.hands[0].waypoints.push_back(far);
  script.hands[0].waypoints.push_back(back);
  JointVector prev = s.current()[0].q_cmd;
  int failures = 0;
  for (const HandFrame& f : generate_frames(script)) {
    const TickOutput out = s.tick(f);
    const ArmSample& a = out.arms[0].sample;
    if (!a.ik_ok) {
      ++failures;
      CHECK(a.q_cmd == prev);
    }
    CHECK(a.q_cmd.allFinite());
    CHECK(s.config().setup.arms[0].model.within_limits(a.q_cmd));
    prev = a.q_cmd;
  }
  CHECK(failures > 0);
}

TEST_CASE("command-driven recording of a 10 s stream") {
  Session s(manual_config());
  s.set_labels("stack", "post");
  const auto events = s.start_recording(true);
  CHECK(s.recording_state() == RecordingState::recording);
  CHECK(std::any_of(events.begin(), events.end(),
                    [](const RecordingEvent& e) { return e.kind == RecordingEvent::Kind::started; }));
  const auto frames = generate_frames(hold_script(home_ee(s.config()), 10.0));
  CHECK(frames.size() == 300);
  for (const HandFrame& f : frames) s.tick(f);
  const auto t = s.stop_recording();
  REQUIRE(t);
  CHECK(t->samples.size() >= 299);
  CHECK(t->samples.size() <= 301);
  CHECK(t->header.task_label == "stack");
  CHECK(t->header.condition_label == "post");
  CHECK(t->header.started_at == t->samples.front().t_ns);
  CHECK(t->header.arms.size() == 1);
  CHECK(t->header.arms[0].model_hash == s.config().setup.arms[0].model.model_hash);
  for (std::size_t i = 1; i < t->samples.size(); ++i) {
    CHECK(t->samples[i].seq > t->samples[i - 1].seq);
    CHECK(t->samples[i].t_ns >= t->samples[i - 1].t_ns);
  }
  CHECK(s.recording_state() == RecordingState::idle);
  CHECK_FALSE(s.stop_recording());
}

TEST_CASE("labels reject unknown conditions") {
  Session s(manual_config());
  CHECK_THROWS_AS(s.set_labels("x", "sometimes"), Error);
}

TEST_CASE("gesture-driven recording: arm, start in the sphere, stop on palms up") {
  SessionConfig config = single_arm_config(true);
  const Vec3 anchor = *config.arm_settings[0].start_anchor;
  Session s(config);
  const Pose home = home_ee(config);

  SynthScript script = hold_script(home, 9.0);
  script.palms_up_ramp = 0.0;
  SynthHand& hand = script.hands[0];
  auto wp = hand.waypoints[0];
  wp.t = 1.0;
  wp.position = anchor;
  hand.waypoints.push_back(wp);
  wp.t = 1.5;
  hand.waypoints.push_back(wp);
  wp.t = 2.5;
  wp.position = home.position;
  hand.waypoints.push_back(wp);
  hand.palms_up.push_back({4.0, 7.5});

  std::vector<RecordingEvent::Kind> kinds;
  std::optional<Trajectory> finished;
  std::int64_t stop_t = -1;
  for (const HandFrame& f : generate_frames(script)) {
    TickOutput out = s.tick(f);
    for (auto& e : out.events) {
      kinds.push_back(e.kind);
      if (e.kind == RecordingEvent::Kind::stopped) {
        finished = std::move(e.trajectory);
        stop_t = f.t_ns;
      }
    }
  }
  REQUIRE(kinds.size() >= 3);
  CHECK(kinds[0] == RecordingEvent::Kind::armed);
  CHECK(kinds[1] == RecordingEvent::Kind::started);
  CHECK(kinds[2] == RecordingEvent::Kind::stopped);
  // Outside the sphere again, the session re-arms for the next take.
  for (std::size_t i = 3; i < kinds.size(); ++i) CHECK(kinds[i] == RecordingEvent::Kind::armed);
  CHECK(kinds.size() <= 4);
  REQUIRE(finished);
  CHECK(stop_t >= 7'000'000'000LL);
  CHECK(stop_t < 7'050'000'000LL);
  CHECK(finished->samples.back().t_ns == stop_t);
  CHECK(s.recording_state() != RecordingState::recording);
}

TEST_CASE("no auto-arm while the hand starts inside the sphere") {
  SessionConfig config = single_arm_config(true);
  const Vec3 anchor = *config.arm_settings[0].start_anchor;
  Session s(config);
  const Pose at_anchor(anchor, home_ee(config).orientation);
  for (std::uint64_t k = 1; k <= 10; ++k) s.tick(frame_at(at_anchor, k));
  CHECK(s.recording_state() == RecordingState::idle);
  s.tick(frame_at(home_ee(config), 11));
  CHECK(s.recording_state() == RecordingState::armed);
  s.tick(frame_at(at_anchor, 12));
  CHECK(s.recording_state() == RecordingState::recording);
}

TEST_CASE("reset returns home and discards the recording") {
  Session s(manual_config());
  s.start_recording(true);
  s.tick(frame_at(shifted(home_ee(s.config()), Vec3(0.03, 0, 0)), 1));
  s.reset();
  CHECK(s.recording_state() == RecordingState::idle);
  CHECK(s.active_trajectory() == nullptr);
  CHECK(s.current()[0].q_cmd == s.config().arm_settings[0].home);
}

TEST_CASE("velocity clamp bounds per-tick joint motion") {
  SessionConfig config = manual_config();
  config.clamp_command_velocity = true;
  Session s(config);
  const Pose home = home_ee(config);
  const JointVector before = s.current()[0].q_cmd;
  const TickOutput out = s.tick(frame_at(shifted(home, Vec3(0.15, 0.1, -0.1)), 1));
  const auto& model = config.setup.arms[0].model;
  for (std::size_t j = 0; j < model.dof(); ++j) {
    const auto jj = static_cast<Eigen::Index>(j);
    CHECK(std::abs(out.arms[0].sample.q_cmd[jj] - before[jj]) <= model.joints[j].velocity_limit / 30.0 + 1e-12);
  }
}

TEST_CASE("identical streams give identical trajectories") {
  auto run = [] {
    Session s(manual_config());
    s.start_recording(true);
    SynthScript script = hold_script(home_ee(s.config()), 3.0);
    auto wp = script.hands[0].waypoints[0];
    wp.t = 3.0;
    wp.position += Vec3(0.05, 0.03, -0.04);
    wp.pinch = 0.01;
    script.hands[0].waypoints.push_back(wp);
    for (const HandFrame& f : generate_frames(script)) s.tick(f);
    return serialize_trajectory(*s.stop_recording());
  };
  CHECK(run() == run());
}

TEST_CASE("control commands") {
  Session s(manual_config());
  CHECK(apply_control(s, "start_recording", {{"immediate", true}}).ok);
  CHECK(s.recording_state() == RecordingState::recording);
  const ControlOutcome stop = apply_control(s, "stop_recording", nlohmann::json::object());
  CHECK(stop.ok);
  REQUIRE(stop.events.size() == 1);
  CHECK(stop.events[0].trajectory.has_value());
  CHECK_FALSE(apply_control(s, "stop_recording", nlohmann::json::object()).ok);
  CHECK(apply_control(s, "set_feedback", {{"mode", "none"}}).ok);
  CHECK(s.feedback_mode() == FeedbackMode::none);
  CHECK_FALSE(apply_control(s, "set_feedback", {{"mode", "loud"}}).ok);
  CHECK_FALSE(apply_control(s, "set_feedback", {{"mode", 3}}).ok);
  CHECK(apply_control(s, "set_labels", {{"task", "a"}, {"condition", "live"}}).ok);
  CHECK(apply_control(s, "reset", nlohmann::json::object()).ok);
  const ControlOutcome bad = apply_control(s, "dance", nlohmann::json::object());
  CHECK_FALSE(bad.ok);
  CHECK(bad.message.find("dance") != std::string::npos);
}

TEST_CASE("tick compute latency stays well inside the frame budget") {
  SessionConfig config = default_session_config();
  config.auto_arm = false;
  Session s(config);
  SynthScript script;
  script.duration = 10.0;
  for (std::size_t i = 0; i < 2; ++i) {
    SynthHand hand;
    hand.side = config.setup.arms[i].assigned_hand;
    const Pose home = home_ee(config, i);
    for (int k = 0; k <= 5; ++k) {
      SynthWaypoint wp;
      wp.t = 2.0 * k;
      wp.position = home.position + Vec3(0.04 * std::sin(k), 0.04 * std::cos(k) - 0.04, 0.03 * std::sin(2 * k));
      wp.orientation = home.orientation;
      hand.waypoints.push_back(wp);
    }
    script.hands.push_back(hand);
  }
  std::vector<double> ms;
  for (const HandFrame& f : generate_frames(script)) {
    const auto start = std::chrono::steady_clock::now();
    s.tick(f);
    ms.push_back(std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count());
  }
  std::sort(ms.begin(), ms.end());
  const double p99 = ms[static_cast<std::size_t>(0.99 * static_cast<double>(ms.size() - 1))];
  MESSAGE("p99 tick " << p99 << " ms");
  CHECK(p99 < 5.0);
}

TEST_CASE("session config parsing") {
  const SessionConfig c = default_session_config();
  CHECK(c.setup.arms.size() == 2);
  CHECK(c.setup.arms[0].arm_name == "right");
  CHECK(c.setup.arms[1].assigned_hand == Hand::left);
  CHECK(c.rate_hz == 30.0);
  CHECK(c.end_gesture.hold_seconds == 3.0);
  CHECK(c.end_gesture.cone_degrees == 25.0);
  CHECK_THROWS_AS(parse_session_config("{}"), Error);
  CHECK_THROWS_AS(load_session_config("/nonexistent/config.json"), Error);
}
