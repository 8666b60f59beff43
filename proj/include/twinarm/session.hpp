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
#include <cstdint>
#include <deque>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "twinarm/constraints.hpp"
#include "twinarm/ik.hpp"
#include "twinarm/model.hpp"
#include "twinarm/retarget.hpp"

namespace twinarm {

enum class FeedbackMode { none, live };
enum class RecordingState { idle, armed, recording };

std::string_view feedback_name(FeedbackMode mode) noexcept;
FeedbackMode parse_feedback(std::string_view name);
std::string_view recording_name(RecordingState state) noexcept;

/// Per-arm settings that live beside ArmSetup, index-aligned with setup.arms.
struct ArmSettings {
  WorkspaceBox workspace;
  JointVector home;
  std::optional<Vec3> start_anchor;
};

struct SessionConfig {
  ArmSetup setup;
  std::vector<ArmSettings> arm_settings;
  double rate_hz = 30.0;
  RetargetParams retarget;
  IkParams ik;
  SingularityParams singularity;
  SpeedParams speed;
  double start_radius = 0.06;
  EndGestureParams end_gesture;
  FeedbackMode feedback_mode = FeedbackMode::live;
  /// Arm automatically once the hands are outside the start spheres.
  bool auto_arm = true;
  /// Limit each command step to the joint velocity limits (safe-replay mode).
  bool clamp_command_velocity = false;
  std::filesystem::path storage_dir = "recordings";

  void validate() const;
};

/// `model` entries may be inline objects, `builtin:NAME`, or paths relative
/// to `base_dir`.
SessionConfig parse_session_config(std::string_view document, const std::filesystem::path& base_dir = {});
SessionConfig load_session_config(const std::filesystem::path& path);
/// The bundled dual-arm setup.
SessionConfig default_session_config();

// ---------------------------------------------------------------------------
// Trajectories

struct ArmSample {
  std::string arm;
  JointVector q_cmd;
  GripperState gripper = GripperState::open;
  Pose ee_pose;
  bool ik_ok = true;
  ConstraintStatus constraint;

  bool operator==(const ArmSample& other) const;
};

struct TrajectorySample {
  std::int64_t t_ns = 0;
  std::uint64_t seq = 0;
  std::vector<ArmSample> arms;

  bool operator==(const TrajectorySample&) const = default;
};

struct TrajectoryArm {
  std::string name;
  std::string model_hash;

  bool operator==(const TrajectoryArm&) const = default;
};

inline constexpr int kTrajectoryFormatVersion = 1;

struct TrajectoryHeader {
  int format_version = kTrajectoryFormatVersion;
  std::vector<TrajectoryArm> arms;
  double rate_hz = 30.0;
  std::string task_label;
  std::string condition_label;
  std::int64_t started_at = 0;

  bool operator==(const TrajectoryHeader&) const = default;
};

struct Trajectory {
  TrajectoryHeader header;
  std::vector<TrajectorySample> samples;

  bool operator==(const Trajectory&) const = default;
};

/// Canonical line-delimited JSON: header line, then one line per sample.
/// Floats are written with 17 significant digits, so the text round-trips.
std::string serialize_trajectory(const Trajectory& trajectory);
/// Writes `<dir>/traj_<started_at>[_k].traj.jsonl`, never overwriting.
std::filesystem::path save_trajectory(const Trajectory& trajectory, const std::filesystem::path& dir);

// ---------------------------------------------------------------------------
// Control loop

struct ArmTick {
  ArmSample sample;
  bool hand_present = false;
  std::optional<EeTarget> target;
  std::optional<IkResult> ik;
};

struct RecordingEvent {
  enum class Kind { armed, started, stopped };
  Kind kind = Kind::armed;
  /// Set on `stopped`.
  std::optional<Trajectory> trajectory;
};

struct TickOutput {
  bool accepted = false;
  std::int64_t t_ns = 0;
  std::uint64_t seq = 0;
  std::vector<ArmTick> arms;
  std::vector<RecordingEvent> events;
};

/// Single-owner control loop state. Not thread safe: exactly one thread
/// calls into a Session.
class Session {
 public:
  explicit Session(SessionConfig config);

  /// Retarget, solve, fall back, evaluate, record. A frame whose seq does
  /// not exceed the last consumed one is dropped (accepted = false).
  TickOutput tick(const HandFrame& frame);

  /// idle -> armed, and armed -> recording as well when `immediate`.
  std::vector<RecordingEvent> start_recording(bool immediate);
  /// recording -> idle. Returns the finished trajectory; nullopt when not recording.
  std::optional<Trajectory> stop_recording();
  void set_feedback(FeedbackMode mode) { feedback_ = mode; }
  /// `condition` must be one of none|live|post (empty keeps the current value).
  void set_labels(std::string task, std::string condition);
  /// Back to home, idle, cleared histories; any active trajectory is discarded.
  void reset();
  /// Forget the last consumed seq and the timing histories (a new hand
  /// source starts its own count and clock).
  void reset_stream();

  const SessionConfig& config() const noexcept { return config_; }
  FeedbackMode feedback_mode() const noexcept { return feedback_; }
  RecordingState recording_state() const noexcept { return recording_; }
  std::size_t dropped_frames() const noexcept { return dropped_; }
  /// Latest per-arm state (home pose before the first tick).
  const std::vector<ArmSample>& current() const noexcept { return current_; }
  const Trajectory* active_trajectory() const { return active_ ? &*active_ : nullptr; }

 private:
  struct ArmRuntime {
    JointVector last_q;
    GripperState grip = GripperState::open;
    std::vector<TimedPosition> ee_history;
  };

  ArmSample hold_sample(std::size_t arm_index) const;
  void begin_trajectory();
  Trajectory finish_trajectory();
  StartAnchors anchors() const;
  EndGestureParams end_params() const;

  SessionConfig config_;
  std::vector<ArmRuntime> arms_;
  std::vector<ArmSample> current_;
  std::deque<HandFrame> gesture_window_;
  RecordingState recording_ = RecordingState::idle;
  FeedbackMode feedback_;
  std::optional<Trajectory> active_;
  std::optional<std::uint64_t> last_seq_;
  std::int64_t last_t_ns_ = 0;
  std::size_t dropped_ = 0;
  std::string task_label_;
  std::string condition_label_;
};

}  // namespace twinarm
