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
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "twinarm/constraints.hpp"
#include "twinarm/model.hpp"
#include "twinarm/session.hpp"

namespace twinarm {

/// Inverse of serialize_trajectory. Errors name the offending line.
Trajectory parse_trajectory(std::string_view text);
/// Throws Error(model_mismatch) when an arm or model hash is not in `setup`.
void check_against_setup(const Trajectory& trajectory, const ArmSetup& setup);
Trajectory load_trajectory(const std::filesystem::path& path, const ArmSetup& setup);

enum class CheckName { speed, joint_velocity, limits, continuity };

std::string_view check_name(CheckName name) noexcept;

/// Outcome of one replay check, worst offender across all arms and samples.
///
/// worst_value per check:
///  - speed: windowed ee speed from FK, m/s (fails above v_max)
///  - joint_velocity: max |dq_j|/dt divided by joint j's velocity limit
///    (fails above 1)
///  - limits: max distance outside [min, max], radians; negative means the
///    tightest margin inside (fails above 0)
///  - continuity: max |dq_j| between consecutive samples, radians (fails
///    above the continuity threshold)
struct CheckResult {
  CheckName name = CheckName::speed;
  bool passed = true;
  double worst_value = 0.0;
  std::optional<std::uint64_t> worst_sample_seq;
  std::string worst_arm;
};

struct ValidationReport {
  std::vector<CheckResult> checks;

  bool passed() const;
  const CheckResult& check(CheckName name) const;
};

struct ValidationParams {
  SpeedParams speed;
  double continuity_threshold = 0.5;
};

/// Throws Error(empty) for a trajectory without samples.
ValidationReport validate_trajectory(const Trajectory& trajectory, const ArmSetup& setup,
                                     const ValidationParams& params = {});

/// Per-check formulas, evaluated at a single sample index. Exposed so the
/// worst values in a report can be recomputed independently.
double joint_velocity_ratio_at(const Trajectory& trajectory, const ArmSetup& setup, std::size_t sample,
                               std::size_t arm);
double limit_excess_at(const Trajectory& trajectory, const ArmSetup& setup, std::size_t sample, std::size_t arm);
double joint_jump_at(const Trajectory& trajectory, std::size_t sample, std::size_t arm);
double ee_speed_at(const Trajectory& trajectory, const ArmSetup& setup, std::size_t sample, std::size_t arm,
                   const SpeedParams& params);

/// What the replayer drives: the kinematic simulation here, a hardware
/// driver in a physical deployment.
class CommandSink {
 public:
  virtual ~CommandSink() = default;
  /// Command every arm of one sample, in header order, and return the joint
  /// positions the backend reports afterwards.
  virtual std::vector<JointVector> command(const TrajectorySample& sample) = 0;
};

/// Holds the commanded joints verbatim: kinematic replay is exact.
class KinematicSimSink : public CommandSink {
 public:
  std::vector<JointVector> command(const TrajectorySample& sample) override;
};

/// One robot state per replayed sample, with joint positions from the sink.
struct ReplayFrame {
  const TrajectorySample* sample = nullptr;
  std::vector<JointVector> measured_q;
  std::int64_t scheduled_ns = 0;
  std::int64_t emitted_ns = 0;
};

class ReplayObserver {
 public:
  virtual ~ReplayObserver() = default;
  virtual void on_frame(const ReplayFrame& frame) = 0;
};

struct ReplayOptions {
  double speed_scale = 1.0;
  /// When false, samples are emitted back to back (no sleeping).
  bool realtime = true;
};

struct FidelityReport {
  double max_joint_error = 0.0;
  /// Largest lateness of an emission against its scaled schedule, seconds.
  double max_time_jitter = 0.0;
  std::size_t samples_replayed = 0;
  double wall_duration = 0.0;
};

FidelityReport replay_in_sim(const Trajectory& trajectory, const ArmSetup& setup, CommandSink& sink,
                             ReplayObserver* observer = nullptr, const ReplayOptions& options = {});

/// One line per check: "PASS|FAIL <name> worst=<v> [seq=<s> arm=<a>]".
std::string format_validation(const ValidationReport& report);
std::string fidelity_json(const FidelityReport& report);

}  // namespace twinarm
