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

#include "fixtures.hpp"
#include "twinarm/control.hpp"
#include "twinarm/error.hpp"
#include "twinarm/replay.hpp"
#include "twinarm/synth.hpp"

using namespace twinarm;
using namespace twinarm::testing;

namespace {

const std::filesystem::path kScripts = std::filesystem::path(TWINARM_SOURCE_DIR) / "data" / "scripts";

ErrorCode parse_error(const std::string& doc) {
  try {
    parse_synth_script(doc);
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error for " << doc);
  return ErrorCode::empty;
}

}  // namespace

TEST_CASE("frame timing follows the rate") {
  const SynthScript s = hold_script(Pose(Vec3(0.3, -0.3, 0.3), Quat::Identity()), 10.0);
  const auto frames = generate_frames(s);
  REQUIRE(frames.size() == 300);
  CHECK(s.frame_count() == 300);
  for (std::size_t k = 0; k < frames.size(); ++k) {
    CHECK(frames[k].seq == k + 1);
    CHECK(frames[k].t_ns == std::llround(static_cast<double>(k) * 1e9 / 30.0));
    CHECK(frames[k].right.has_value());
    CHECK_FALSE(frames[k].left.has_value());
  }
}

TEST_CASE("scripts are validated") {
  CHECK(parse_error("{") == ErrorCode::parse);
  CHECK(parse_error(R"({"hands": [{"side": "right", "waypoints": [{"t": 0, "p": [0,0,0]}]}]})") ==
        ErrorCode::parse);
  CHECK(parse_error(R"({"duration": 1, "hands": [{"side": "middle", "waypoints": [{"t": 0, "p": [0,0,0]}]}]})") ==
        ErrorCode::parse);
  CHECK(parse_error(R"({"duration": 1, "frame": "elbow",
                        "hands": [{"side": "right", "waypoints": [{"t": 0, "p": [0,0,0]}]}]})") == ErrorCode::parse);
  CHECK(parse_error(R"({"duration": 1, "hands": [{"side": "right",
                        "waypoints": [{"t": 0.5, "p": [0,0,0]}, {"t": 0.2, "p": [0,0,0]}]}]})") == ErrorCode::parse);
  CHECK(parse_error(R"({"duration": 1, "rate_hz": 0,
                        "hands": [{"side": "right", "waypoints": [{"t": 0, "p": [0,0,0]}]}]})") == ErrorCode::parse);
}

TEST_CASE("waypoints interpolate and hold") {
  SynthScript s = parse_synth_script(R"({"duration": 2, "rate_hz": 10, "frame": "hand",
      "hands": [{"side": "right", "waypoints": [{"t": 0.5, "p": [0, 0, 0]}, {"t": 1.5, "p": [0.1, 0, 0]}]}]})");
  const auto frames = generate_frames(s);
  REQUIRE(frames.size() == 20);
  auto centroid = [](const HandFrame& f) {
    const auto& k = f.right->knuckles;
    return Vec3((k.index + k.middle + k.ring + k.little) / 4.0);
  };
  CHECK(centroid(frames[0]).norm() <= 1e-12);
  CHECK((centroid(frames[10]) - Vec3(0.05, 0, 0)).norm() <= 1e-12);
  CHECK((centroid(frames[19]) - Vec3(0.1, 0, 0)).norm() <= 1e-12);
}

TEST_CASE("absent intervals drop the hand") {
  SynthScript s = hold_script(Pose(Vec3(0.3, -0.3, 0.3), Quat::Identity()), 1.0);
  s.hands[0].absent.push_back({0.4, 0.6});
  for (const HandFrame& f : generate_frames(s)) {
    const double t = static_cast<double>(f.t_ns) * 1e-9;
    CHECK(f.right.has_value() == !(t >= 0.4 - 1e-9 && t <= 0.6 + 1e-9));
  }
}

TEST_CASE("palms-up blocks drive the end gesture") {
  const EndGestureParams params;
  const Pose home = home_ee(single_arm_config(false));
  auto fires_at = [&](double block) -> std::optional<std::int64_t> {
    SynthScript s = hold_script(home, block + 2.0);
    s.palms_up_ramp = 0.0;
    s.hands[0].palms_up.push_back({1.0, 1.0 + block});
    const auto frames = generate_frames(s);
    for (std::size_t i = 0; i < frames.size(); ++i) {
      if (detect_end_gesture(std::span(frames.data(), i + 1), frames[i].t_ns, params)) return frames[i].t_ns;
    }
    return std::nullopt;
  };
  const auto long_block = fires_at(3.1);
  REQUIRE(long_block);
  CHECK(*long_block >= 4'000'000'000LL);
  CHECK(*long_block < 4'040'000'000LL);
  CHECK_FALSE(fires_at(2.9));
}

TEST_CASE("palms-up orientation points the palm normal up") {
  for (Hand side : {Hand::left, Hand::right}) {
    Pose basis(Vec3(0.2, 0.1, 0.3), palms_up_orientation(side));
    const HandSkeleton h = skeleton_for_basis(basis, 0.05);
    CHECK(palm_normal(h, side).dot(Vec3::UnitZ()) == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("messages interleave controls before frames") {
  SynthScript s = hold_script(Pose(Vec3(0.3, -0.3, 0.3), Quat::Identity()), 1.0);
  s.controls.push_back({0.5, "start_recording", nlohmann::json{{"immediate", true}}});
  const auto msgs = synthesize_messages(s);
  REQUIRE(msgs.size() == 31);
  for (std::size_t i = 0; i < msgs.size(); ++i) CHECK(msgs[i].seq == i + 1);
  std::size_t control_index = 0;
  for (std::size_t i = 0; i < msgs.size(); ++i) {
    if (msgs[i].type() == "control") control_index = i;
  }
  CHECK(msgs[control_index].t_ns == 500'000'000);
  CHECK(msgs[control_index + 1].type() == "hand_frame");
  CHECK(msgs[control_index + 1].t_ns == msgs[control_index].t_ns);
  CHECK(msgs[control_index - 1].t_ns < msgs[control_index].t_ns);

  const std::string lines = synth_lines(s);
  CHECK(parse_message_lines(lines) == msgs);
  CHECK(synth_lines(s) == lines);
}

TEST_CASE("a constant script streams zero speed") {
  const SessionConfig c = single_arm_config(false);
  Session session(c);
  for (const HandFrame& f : generate_frames(hold_script(home_ee(c), 1.0))) {
    const TickOutput out = session.tick(f);
    CHECK(out.arms[0].sample.constraint.ee_speed == 0.0);
  }
}

TEST_CASE("bundled scripts parse") {
  for (const char* name : {"record_demo.json", "sweep_10s.json", "hold_still.json"}) {
    CAPTURE(name);
    const SynthScript s = load_synth_script(kScripts / name);
    CHECK(s.frame_count() > 0);
    CHECK_FALSE(s.hands.empty());
  }
  CHECK(load_synth_script(kScripts / "sweep_10s.json").frame_count() == 300);
}

TEST_CASE("demo script records one clean trajectory") {
  Session session(default_session_config());
  const auto trajectories = feed_messages(session, synthesize_messages(load_synth_script(kScripts / "record_demo.json")));
  REQUIRE(trajectories.size() == 1);
  const Trajectory& t = trajectories[0];
  CHECK(t.header.task_label == "pick_place");
  CHECK(t.header.condition_label == "live");
  CHECK(t.header.arms.size() == 2);
  CHECK(t.samples.size() > 150);
  const ValidationReport r = validate_trajectory(t, session.config().setup);
  INFO(format_validation(r));
  CHECK(r.passed());
  for (const auto& s : t.samples) {
    for (const auto& a : s.arms) CHECK(a.ik_ok);
  }
}
