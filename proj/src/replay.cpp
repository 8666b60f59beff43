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

#include "twinarm/replay.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <thread>

#include <json.hpp>

#include "twinarm/error.hpp"
#include "twinarm/kinematics.hpp"

namespace twinarm {
namespace {

const ArmConfig& arm_config(const Trajectory& t, const ArmSetup& setup, std::size_t arm) {
  const ArmConfig* cfg = setup.find(t.header.arms.at(arm).name);
  if (!cfg) throw Error(ErrorCode::model_mismatch, "arm '" + t.header.arms[arm].name + "' is not in the setup");
  return *cfg;
}

struct Worst {
  double value = -std::numeric_limits<double>::infinity();
  std::optional<std::uint64_t> seq;
  std::string arm;

  void offer(double v, std::uint64_t s, const std::string& a) {
    if (v > value) {
      value = v;
      seq = s;
      arm = a;
    }
  }
};

CheckResult finish(CheckName name, const Worst& w, bool passed) {
  CheckResult r;
  r.name = name;
  r.passed = passed;
  r.worst_value = w.seq ? w.value : 0.0;
  r.worst_sample_seq = w.seq;
  r.worst_arm = w.arm;
  return r;
}

}  // namespace

std::string_view check_name(CheckName name) noexcept {
  switch (name) {
    case CheckName::speed: return "speed";
    case CheckName::joint_velocity: return "joint_velocity";
    case CheckName::limits: return "limits";
    case CheckName::continuity: return "continuity";
  }
  return "?";
}

bool ValidationReport::passed() const {
  for (const auto& c : checks) {
    if (!c.passed) return false;
  }
  return true;
}

const CheckResult& ValidationReport::check(CheckName name) const {
  for (const auto& c : checks) {
    if (c.name == name) return c;
  }
  throw Error(ErrorCode::invalid_argument, "report has no check named " + std::string(check_name(name)));
}

double joint_velocity_ratio_at(const Trajectory& t, const ArmSetup& setup, std::size_t k, std::size_t arm) {
  if (k == 0) return 0.0;
  const RobotModel& model = arm_config(t, setup, arm).model;
  const JointVector& q1 = t.samples[k].arms[arm].q_cmd;
  const JointVector& q0 = t.samples[k - 1].arms[arm].q_cmd;
  const double dt = static_cast<double>(t.samples[k].t_ns - t.samples[k - 1].t_ns) * 1e-9;
  double worst = 0.0;
  for (std::size_t j = 0; j < model.dof(); ++j) {
    const auto jj = static_cast<Eigen::Index>(j);
    const double dq = std::abs(q1[jj] - q0[jj]);
    double ratio;
    if (dt > 0.0) {
      ratio = dq / dt / model.joints[j].velocity_limit;
    } else {
      ratio = dq > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
    }
    worst = std::max(worst, ratio);
  }
  return worst;
}

double limit_excess_at(const Trajectory& t, const ArmSetup& setup, std::size_t k, std::size_t arm) {
  const RobotModel& model = arm_config(t, setup, arm).model;
  const JointVector& q = t.samples[k].arms[arm].q_cmd;
  double worst = -std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < model.dof(); ++j) {
    const auto& lim = model.joints[j].position_limits;
    const double v = q[static_cast<Eigen::Index>(j)];
    worst = std::max(worst, std::max(v - lim.max, lim.min - v));
  }
  return worst;
}

double joint_jump_at(const Trajectory& t, std::size_t k, std::size_t arm) {
  if (k == 0) return 0.0;
  return (t.samples[k].arms[arm].q_cmd - t.samples[k - 1].arms[arm].q_cmd).cwiseAbs().maxCoeff();
}

double ee_speed_at(const Trajectory& t, const ArmSetup& setup, std::size_t k, std::size_t arm,
                   const SpeedParams& params) {
  if (k == 0) return 0.0;
  const ArmConfig& cfg = arm_config(t, setup, arm);
  const std::size_t first = k + 1 >= params.window ? k + 1 - params.window : 0;
  std::vector<TimedPosition> history;
  for (std::size_t i = first; i <= k; ++i) {
    history.push_back({t.samples[i].t_ns, ee_pose(cfg.model, cfg.base_pose, t.samples[i].arms[arm].q_cmd).position});
  }
  if (history.back().t_ns <= history.front().t_ns) return 0.0;
  return estimate_speed(history, params).ee_speed;
}

ValidationReport validate_trajectory(const Trajectory& t, const ArmSetup& setup, const ValidationParams& params) {
  if (t.samples.empty()) throw Error(ErrorCode::empty, "trajectory has no samples");
  check_against_setup(t, setup);
  params.speed.validate();

  Worst speed, velocity, limits, jump;
  for (std::size_t arm = 0; arm < t.header.arms.size(); ++arm) {
    const std::string& name = t.header.arms[arm].name;
    for (std::size_t k = 0; k < t.samples.size(); ++k) {
      const std::uint64_t seq = t.samples[k].seq;
      limits.offer(limit_excess_at(t, setup, k, arm), seq, name);
      if (k == 0) continue;
      velocity.offer(joint_velocity_ratio_at(t, setup, k, arm), seq, name);
      jump.offer(joint_jump_at(t, k, arm), seq, name);
      speed.offer(ee_speed_at(t, setup, k, arm, params.speed), seq, name);
    }
  }

  ValidationReport report;
  report.checks.push_back(finish(CheckName::speed, speed, !speed.seq || speed.value <= params.speed.v_max));
  report.checks.push_back(finish(CheckName::joint_velocity, velocity, !velocity.seq || velocity.value <= 1.0));
  report.checks.push_back(finish(CheckName::limits, limits, !limits.seq || limits.value <= 0.0));
  report.checks.push_back(
      finish(CheckName::continuity, jump, !jump.seq || jump.value <= params.continuity_threshold));
  return report;
}

std::vector<JointVector> KinematicSimSink::command(const TrajectorySample& sample) {
  std::vector<JointVector> out;
  out.reserve(sample.arms.size());
  for (const auto& arm : sample.arms) out.push_back(arm.q_cmd);
  return out;
}

FidelityReport replay_in_sim(const Trajectory& t, const ArmSetup& setup, CommandSink& sink, ReplayObserver* observer,
                             const ReplayOptions& options) {
  if (!(options.speed_scale > 0.0)) throw Error(ErrorCode::invalid_argument, "speed scale must be positive");
  check_against_setup(t, setup);

  using clock = std::chrono::steady_clock;
  FidelityReport report;
  if (t.samples.empty()) return report;

  const std::int64_t t0 = t.samples.front().t_ns;
  const auto start = clock::now();
  for (const TrajectorySample& sample : t.samples) {
    const auto scheduled_ns = static_cast<std::int64_t>(std::llround(static_cast<double>(sample.t_ns - t0) /
                                                                     options.speed_scale));
    if (options.realtime) std::this_thread::sleep_until(start + std::chrono::nanoseconds(scheduled_ns));

    ReplayFrame frame;
    frame.sample = &sample;
    frame.measured_q = sink.command(sample);
    frame.scheduled_ns = scheduled_ns;
    frame.emitted_ns = std::chrono::duration_cast<std::chrono::nanoseconds>(clock::now() - start).count();

    for (std::size_t a = 0; a < sample.arms.size() && a < frame.measured_q.size(); ++a) {
      const double err = (frame.measured_q[a] - sample.arms[a].q_cmd).cwiseAbs().maxCoeff();
      report.max_joint_error = std::max(report.max_joint_error, err);
    }
    if (options.realtime) {
      const double jitter = std::abs(static_cast<double>(frame.emitted_ns - frame.scheduled_ns)) * 1e-9;
      report.max_time_jitter = std::max(report.max_time_jitter, jitter);
    }
    if (observer) observer->on_frame(frame);
    ++report.samples_replayed;
  }
  report.wall_duration = std::chrono::duration<double>(clock::now() - start).count();
  return report;
}

std::string format_validation(const ValidationReport& report) {
  std::string out;
  char value[64];
  for (const CheckResult& c : report.checks) {
    std::snprintf(value, sizeof value, "%.6g", c.worst_value);
    out += c.passed ? "PASS " : "FAIL ";
    out += check_name(c.name);
    out += " worst=";
    out += value;
    if (c.worst_sample_seq) out += " seq=" + std::to_string(*c.worst_sample_seq) + " arm=" + c.worst_arm;
    out += '\n';
  }
  return out;
}

std::string fidelity_json(const FidelityReport& r) {
  nlohmann::ordered_json out;
  out["max_joint_error"] = r.max_joint_error;
  out["max_time_jitter"] = r.max_time_jitter;
  out["samples_replayed"] = r.samples_replayed;
  out["wall_duration"] = r.wall_duration;
  return out.dump();
}

}  // namespace twinarm
