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

#include "twinarm/control.hpp"

#include "twinarm/error.hpp"

namespace twinarm {
namespace {

bool flag(const nlohmann::json& args, const char* key) {
  if (!args.is_object() || !args.contains(key)) return false;
  if (!args[key].is_boolean()) throw Error(ErrorCode::invalid_argument, std::string(key) + " must be a boolean");
  return args[key].get<bool>();
}

std::string text(const nlohmann::json& args, const char* key) {
  if (!args.is_object() || !args.contains(key)) return {};
  if (!args[key].is_string()) throw Error(ErrorCode::invalid_argument, std::string(key) + " must be a string");
  return args[key].get<std::string>();
}

ControlOutcome run(Session& session, std::string_view cmd, const nlohmann::json& args) {
  ControlOutcome out;
  if (cmd == "start_recording") {
    out.events = session.start_recording(flag(args, "immediate"));
    out.state_changed = true;
    out.message = recording_name(session.recording_state());
  } else if (cmd == "stop_recording") {
    auto trajectory = session.stop_recording();
    if (!trajectory) return {false, "not recording", {}, false};
    out.message = "stopped (" + std::to_string(trajectory->samples.size()) + " samples)";
    out.events.push_back({RecordingEvent::Kind::stopped, std::move(trajectory)});
    out.state_changed = true;
  } else if (cmd == "set_feedback") {
    if (!args.is_object() || !args.contains("mode")) throw Error(ErrorCode::invalid_argument, "mode is required");
    session.set_feedback(parse_feedback(text(args, "mode")));
    out.state_changed = true;
    out.message = feedback_name(session.feedback_mode());
  } else if (cmd == "set_labels") {
    session.set_labels(text(args, "task"), text(args, "condition"));
    out.message = "labels set";
  } else if (cmd == "reset") {
    session.reset();
    out.state_changed = true;
    out.message = "reset";
  } else {
    return {false, "unknown command '" + std::string(cmd) + "'", {}, false};
  }
  return out;
}

}  // namespace

ControlOutcome apply_control(Session& session, std::string_view cmd, const nlohmann::json& args) {
  try {
    return run(session, cmd, args);
  } catch (const Error& e) {
    return {false, e.what(), {}, false};
  }
}

std::vector<Trajectory> feed_messages(Session& session, const std::vector<wire::Envelope>& messages) {
  std::vector<Trajectory> finished;
  auto collect = [&](std::vector<RecordingEvent>& events) {
    for (RecordingEvent& e : events) {
      if (e.kind == RecordingEvent::Kind::stopped && e.trajectory) finished.push_back(std::move(*e.trajectory));
    }
  };
  for (const wire::Envelope& msg : messages) {
    if (const auto* frame = std::get_if<wire::HandFrameBody>(&msg.payload)) {
      TickOutput out = session.tick(wire::to_hand_frame(*frame, msg.seq, msg.t_ns));
      collect(out.events);
    } else if (const auto* control = std::get_if<wire::ControlBody>(&msg.payload)) {
      ControlOutcome out = apply_control(session, control->cmd, control->args);
      collect(out.events);
    }
  }
  return finished;
}

}  // namespace twinarm
