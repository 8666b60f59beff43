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

#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "twinarm/session.hpp"
#include "twinarm/wire.hpp"

namespace twinarm {

struct ControlOutcome {
  bool ok = true;
  std::string message;
  /// Recording transitions; a stop carries the finished trajectory.
  std::vector<RecordingEvent> events;
  /// The next robot_state differs (recording flag, feedback mode, pose).
  bool state_changed = false;
};

/// Session-level commands: start_recording {immediate}, stop_recording,
/// set_feedback {mode}, set_labels {task, condition}, reset. Anything else
/// yields ok = false. Bad arguments yield ok = false with the reason.
ControlOutcome apply_control(Session& session, std::string_view cmd, const nlohmann::json& args);

/// Drives a session offline with decoded messages: hand frames tick, controls
/// apply, the rest is ignored. Returns every trajectory finished on the way.
std::vector<Trajectory> feed_messages(Session& session, const std::vector<wire::Envelope>& messages);

}  // namespace twinarm
