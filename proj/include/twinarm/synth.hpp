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

#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "twinarm/geometry.hpp"
#include "twinarm/net.hpp"
#include "twinarm/retarget.hpp"
#include "twinarm/wire.hpp"

namespace twinarm {

/// Synthetic hand-stream scripts.
///
///   {"rate_hz": 30, "duration": 10, "frame": "target" | "hand",
///    "palms_up_ramp": 1.5,
///    "hands": [{"side": "right",
///               "waypoints": [{"t": 0, "p": [x,y,z], "rpy": [r,p,y], "pinch": 0.08}, ...],
///               "palms_up": [[t0, t1], ...], "absent": [[t0, t1], ...]}],
///    "controls": [{"t": 0.5, "cmd": "start_recording", "args": {...}}]}
///
/// With frame "target" a waypoint is the end-effector target the retargeting
/// should produce; with "hand" it is the hand basis (knuckle centroid and
/// across/forward/normal axes). Between waypoints positions and pinch are
/// interpolated linearly and orientations by slerp; before the first and
/// after the last waypoint they hold. Inside a palms_up interval the hand is
/// turned palm up about its knuckle centroid, easing in and out over
/// `palms_up_ramp` seconds on either side (0 turns it instantly).
enum class SynthFrame { target, hand };

struct SynthWaypoint {
  double t = 0.0;
  Vec3 position = Vec3::Zero();
  Quat orientation = Quat::Identity();
  double pinch = 0.08;
};

using TimeInterval = std::pair<double, double>;

struct SynthHand {
  Hand side = Hand::right;
  std::vector<SynthWaypoint> waypoints;
  std::vector<TimeInterval> palms_up;
  std::vector<TimeInterval> absent;
};

struct SynthControl {
  double t = 0.0;
  std::string cmd;
  nlohmann::json args = nlohmann::json::object();
};

struct SynthScript {
  double rate_hz = 30.0;
  double duration = 0.0;
  SynthFrame frame = SynthFrame::target;
  double palms_up_ramp = 1.5;
  /// Must match the session's retargeting for "target" scripts.
  RetargetParams retarget;
  std::vector<SynthHand> hands;
  std::vector<SynthControl> controls;

  /// round(duration * rate_hz)
  std::size_t frame_count() const;
};

SynthScript parse_synth_script(std::string_view document);
SynthScript load_synth_script(const std::filesystem::path& path);

/// A hand whose basis is `basis` (origin = knuckle centroid) with the given
/// thumb-index distance.
HandSkeleton skeleton_for_basis(const Pose& basis, double pinch);
/// A hand that retargets exactly onto `target` under `params`.
HandSkeleton skeleton_for_target(const Pose& target, double pinch, const RetargetParams& params);
/// Basis orientation whose palm normal is +Z for `side`.
Quat palms_up_orientation(Hand side);

/// Frame k is stamped t_ns = round(k * 1e9 / rate_hz) and seq = k + 1.
std::vector<HandFrame> generate_frames(const SynthScript& script);

/// Frames and controls as wire messages in time order (a control at time t
/// precedes the frame stamped t). seq counts all messages from 1.
std::vector<wire::Envelope> synthesize_messages(const SynthScript& script);

/// One encoded message per line.
std::string synth_lines(const SynthScript& script);
std::vector<wire::Envelope> parse_message_lines(std::string_view text);

struct StreamResult {
  std::size_t frames_sent = 0;
  std::size_t controls_sent = 0;
  std::size_t controls_failed = 0;
  /// The server answered the last frame with a robot_state.
  bool last_frame_acknowledged = false;
};

/// Connects as hand_source and streams the script paced by its timestamps
/// (as fast as possible when `realtime` is false).
StreamResult stream_script(const SynthScript& script, const Endpoint& endpoint, bool realtime = true);

}  // namespace twinarm
