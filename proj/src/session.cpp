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

#include "twinarm/session.hpp"

#include <algorithm>
#include <cmath>

#include "twinarm/error.hpp"
#include "twinarm/kinematics.hpp"

namespace twinarm {

bool ArmSample::operator==(const ArmSample& other) const {
  return arm == other.arm && q_cmd.size() == other.q_cmd.size() && q_cmd == other.q_cmd &&
         gripper == other.gripper && ee_pose == other.ee_pose && ik_ok == other.ik_ok &&
         constraint == other.constraint;
}

Session::Session(SessionConfig config) : config_(std::move(config)), feedback_(config_.feedback_mode) {
  config_.validate();
  reset();
}

void Session::reset() {
  arms_.clear();
  current_.clear();
  for (std::size_t i = 0; i < config_.setup.arms.size(); ++i) {
    ArmRuntime rt;
    rt.last_q = config_.arm_settings[i].home;
    arms_.push_back(std::move(rt));
    current_.push_back(hold_sample(i));
  }
  gesture_window_.clear();
  recording_ = RecordingState::idle;
  active_.reset();
  last_seq_.reset();
}

void Session::reset_stream() {
  last_seq_.reset();
  for (ArmRuntime& rt : arms_) rt.ee_history.clear();
  gesture_window_.clear();
}

ArmSample Session::hold_sample(std::size_t i) const {
  const ArmConfig& arm = config_.setup.arms[i];
  const ArmRuntime& rt = arms_[i];
  ArmSample s;
  s.arm = arm.arm_name;
  s.q_cmd = rt.last_q;
  s.gripper = rt.grip;
  s.ee_pose = ee_pose(arm.model, arm.base_pose, rt.last_q);
  s.ik_ok = true;
  s.constraint = evaluate(arm.model, arm.base_pose, rt.last_q, config_.arm_settings[i].workspace, rt.ee_history,
                          config_.singularity, config_.speed);
  return s;
}

StartAnchors Session::anchors() const {
  StartAnchors out;
  for (std::size_t i = 0; i < config_.setup.arms.size(); ++i) {
    const auto& anchor = config_.arm_settings[i].start_anchor;
    if (!anchor) continue;
    (config_.setup.arms[i].assigned_hand == Hand::left ? out.left : out.right) = *anchor;
  }
  return out;
}

EndGestureParams Session::end_params() const {
  EndGestureParams p = config_.end_gesture;
  p.check_left = p.check_right = false;
  for (const auto& arm : config_.setup.arms) {
    (arm.assigned_hand == Hand::left ? p.check_left : p.check_right) = true;
  }
  return p;
}

void Session::set_labels(std::string task, std::string condition) {
  if (!condition.empty() && condition != "none" && condition != "live" && condition != "post") {
    throw Error(ErrorCode::invalid_argument, "condition label must be none, live or post");
  }
  task_label_ = std::move(task);
  if (!condition.empty()) condition_label_ = std::move(condition);
}

void Session::begin_trajectory() {
  Trajectory t;
  t.header.rate_hz = config_.rate_hz;
  t.header.task_label = task_label_;
  t.header.condition_label = condition_label_.empty() ? std::string(feedback_name(feedback_)) : condition_label_;
  t.header.started_at = last_t_ns_;
  for (const auto& arm : config_.setup.arms) t.header.arms.push_back({arm.arm_name, arm.model.model_hash});
  active_ = std::move(t);
  gesture_window_.clear();
  recording_ = RecordingState::recording;
}

Trajectory Session::finish_trajectory() {
  Trajectory out = std::move(*active_);
  active_.reset();
  recording_ = RecordingState::idle;
  return out;
}

std::vector<RecordingEvent> Session::start_recording(bool immediate) {
  std::vector<RecordingEvent> events;
  if (recording_ == RecordingState::recording) return events;
  if (recording_ == RecordingState::idle) {
    recording_ = RecordingState::armed;
    events.push_back({RecordingEvent::Kind::armed, std::nullopt});
  }
  if (immediate) {
    begin_trajectory();
    events.push_back({RecordingEvent::Kind::started, std::nullopt});
  }
  return events;
}

std::optional<Trajectory> Session::stop_recording() {
  if (recording_ != RecordingState::recording) return std::nullopt;
  return finish_trajectory();
}

TickOutput Session::tick(const HandFrame& frame) {
  TickOutput out;
  out.t_ns = frame.t_ns;
  out.seq = frame.seq;
  if (last_seq_ && frame.seq <= *last_seq_) {
    ++dropped_;
    return out;
  }
  out.accepted = true;
  last_seq_ = frame.seq;
  last_t_ns_ = frame.t_ns;

  const std::int64_t keep_ns = static_cast<std::int64_t>(std::llround((config_.end_gesture.hold_seconds + 1.0) * 1e9));
  while (!gesture_window_.empty() && gesture_window_.back().t_ns >= frame.t_ns) gesture_window_.pop_back();
  gesture_window_.push_back(frame);
  while (!gesture_window_.empty() && gesture_window_.front().t_ns < frame.t_ns - keep_ns) {
    gesture_window_.pop_front();
  }

  for (std::size_t i = 0; i < config_.setup.arms.size(); ++i) {
    const ArmConfig& arm = config_.setup.arms[i];
    ArmRuntime& rt = arms_[i];
    ArmTick tick;
    JointVector command = rt.last_q;
    bool ik_ok = true;

    const auto& hand = frame.hand(arm.assigned_hand);
    if (hand) {
      tick.hand_present = true;
      try {
        const RetargetResult rr = hand_to_target(*hand, rt.grip, config_.retarget);
        tick.target = rr.target;
        tick.target->source_seq = frame.seq;
        tick.target->source_t_ns = frame.t_ns;
        rt.grip = rr.grip;
        tick.ik = solve_ik(arm.model, arm.base_pose, rr.target.pose, rt.last_q, config_.ik);
        ik_ok = tick.ik->converged;
        if (ik_ok) command = tick.ik->q;
      } catch (const Error&) {
        // Unusable skeleton: treated like an IK failure.
        ik_ok = false;
      }
    }

    if (config_.clamp_command_velocity && ik_ok && tick.hand_present) {
      const double dt = 1.0 / config_.rate_hz;
      for (std::size_t j = 0; j < arm.model.dof(); ++j) {
        const auto jj = static_cast<Eigen::Index>(j);
        const double max_step = arm.model.joints[j].velocity_limit * dt;
        command[jj] = rt.last_q[jj] + std::clamp(command[jj] - rt.last_q[jj], -max_step, max_step);
      }
    }
    rt.last_q = command;

    const Pose ee = ee_pose(arm.model, arm.base_pose, command);
    while (!rt.ee_history.empty() && rt.ee_history.back().t_ns >= frame.t_ns) rt.ee_history.pop_back();
    rt.ee_history.push_back({frame.t_ns, ee.position});
    if (rt.ee_history.size() > config_.speed.window) {
      rt.ee_history.erase(rt.ee_history.begin(),
                          rt.ee_history.end() - static_cast<std::ptrdiff_t>(config_.speed.window));
    }

    tick.sample.arm = arm.arm_name;
    tick.sample.q_cmd = command;
    tick.sample.gripper = rt.grip;
    tick.sample.ee_pose = ee;
    tick.sample.ik_ok = ik_ok;
    tick.sample.constraint = evaluate(arm.model, arm.base_pose, command, config_.arm_settings[i].workspace,
                                      rt.ee_history, config_.singularity, config_.speed);
    current_[i] = tick.sample;
    out.arms.push_back(std::move(tick));
  }

  const bool at_start = detect_start_gesture(frame, anchors(), config_.start_radius);
  switch (recording_) {
    case RecordingState::idle:
      if (config_.auto_arm && !at_start) {
        recording_ = RecordingState::armed;
        out.events.push_back({RecordingEvent::Kind::armed, std::nullopt});
      }
      break;
    case RecordingState::armed:
      if (at_start) {
        begin_trajectory();
        out.events.push_back({RecordingEvent::Kind::started, std::nullopt});
      }
      break;
    case RecordingState::recording:
      break;
  }

  if (recording_ == RecordingState::recording) {
    if (active_->samples.empty()) active_->header.started_at = frame.t_ns;
    TrajectorySample sample;
    sample.t_ns = frame.t_ns;
    sample.seq = frame.seq;
    for (const auto& a : out.arms) sample.arms.push_back(a.sample);
    active_->samples.push_back(std::move(sample));

    const std::vector<HandFrame> window(gesture_window_.begin(), gesture_window_.end());
    if (detect_end_gesture(window, frame.t_ns, end_params())) {
      out.events.push_back({RecordingEvent::Kind::stopped, finish_trajectory()});
    }
  }
  return out;
}

}  // namespace twinarm
