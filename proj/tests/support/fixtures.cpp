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

#include "fixtures.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "twinarm/kinematics.hpp"

namespace twinarm::testing {

Eigen::Matrix<double, 6, Eigen::Dynamic> finite_difference_jacobian(const RobotModel& model, const Pose& base,
                                                                  const JointVector& q, double step) {
  const auto n = static_cast<Eigen::Index>(model.dof());
  Eigen::Matrix<double, 6, Eigen::Dynamic> j(6, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    JointVector plus = q, minus = q;
    plus[i] += step;
    minus[i] -= step;
    const Pose a = ee_pose(model, base, plus);
    const Pose b = ee_pose(model, base, minus);
    j.block<3, 1>(0, i) = (a.position - b.position) / (2.0 * step);
    const Eigen::AngleAxisd delta((a.orientation * b.orientation.inverse()).normalized());
    j.block<3, 1>(3, i) = delta.angle() * delta.axis() / (2.0 * step);
  }
  return j;
}

double cofactor_determinant(const Eigen::MatrixXd& a) {
  const Eigen::Index n = a.rows();
  if (n == 1) return a(0, 0);
  if (n == 2) return a(0, 0) * a(1, 1) - a(0, 1) * a(1, 0);
  double det = 0.0;
  for (Eigen::Index col = 0; col < n; ++col) {
    Eigen::MatrixXd minor(n - 1, n - 1);
    for (Eigen::Index r = 1; r < n; ++r) {
      Eigen::Index mc = 0;
      for (Eigen::Index c = 0; c < n; ++c) {
        if (c == col) continue;
        minor(r - 1, mc++) = a(r, c);
      }
    }
    det += ((col % 2 == 0) ? 1.0 : -1.0) * a(0, col) * cofactor_determinant(minor);
  }
  return det;
}

SessionConfig single_arm_config(bool with_anchor) {
  SessionConfig config = parse_session_config(*builtin_setup("single_vx300s"));
  if (!with_anchor) config.arm_settings[0].start_anchor.reset();
  return config;
}

SynthScript hold_script(const Pose& target, double seconds, double pinch) {
  SynthScript s;
  s.duration = seconds;
  SynthHand hand;
  hand.side = Hand::right;
  SynthWaypoint wp;
  wp.position = target.position;
  wp.orientation = target.orientation;
  wp.pinch = pinch;
  hand.waypoints.push_back(wp);
  s.hands.push_back(hand);
  return s;
}

Pose home_ee(const SessionConfig& config, std::size_t arm) {
  const ArmConfig& a = config.setup.arms[arm];
  return ee_pose(a.model, a.base_pose, config.arm_settings[arm].home);
}

Trajectory record_gentle(const SessionConfig& config, double seconds) {
  SessionConfig c = config;
  c.auto_arm = false;
  const Pose home = home_ee(c);
  SynthScript script = hold_script(home, seconds);
  SynthWaypoint end = script.hands[0].waypoints[0];
  end.t = seconds;
  end.position += Vec3(0.04, 0.03, -0.03);
  script.hands[0].waypoints.push_back(end);

  Session session(c);
  session.start_recording(true);
  for (const HandFrame& f : generate_frames(script)) session.tick(f);
  return *session.stop_recording();
}

namespace {

void refresh_ee(TrajectorySample& sample, const ArmSetup& setup) {
  const ArmConfig& arm = setup.arms[0];
  sample.arms[0].ee_pose = ee_pose(arm.model, arm.base_pose, sample.arms[0].q_cmd);
}

}  // namespace

void inject_jump(Trajectory& trajectory, const ArmSetup& setup, std::size_t index, std::size_t joint,
                 double amount) {
  for (std::size_t i = index; i < trajectory.samples.size(); ++i) {
    trajectory.samples[i].arms[0].q_cmd[static_cast<Eigen::Index>(joint)] += amount;
    refresh_ee(trajectory.samples[i], setup);
  }
}

void inject_over_limit(Trajectory& trajectory, const ArmSetup& setup, std::size_t index, std::size_t joint,
                       double excess, double step) {
  const auto j = static_cast<Eigen::Index>(joint);
  const double upper = setup.arms[0].model.joints[joint].position_limits.max;
  const double peak = upper + excess - trajectory.samples[index].arms[0].q_cmd[j];
  for (std::size_t i = 0; i < trajectory.samples.size(); ++i) {
    const double distance = std::abs(static_cast<double>(i) - static_cast<double>(index));
    const double offset = std::max(0.0, peak - step * distance);
    if (offset == 0.0) continue;
    trajectory.samples[i].arms[0].q_cmd[j] += offset;
    refresh_ee(trajectory.samples[i], setup);
  }
}

namespace {

double any_real(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::uniform_int_distribution<int> exp(-12, 6);
  return unit(rng) * std::pow(10.0, exp(rng));
}

wire::V3 any_v3(std::mt19937_64& rng) { return {any_real(rng), any_real(rng), any_real(rng)}; }

wire::Q4 any_q4(std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Eigen::Vector4d v(g(rng), g(rng), g(rng), g(rng));
  v.normalize();
  return {v[0], v[1], v[2], v[3]};
}

std::string any_name(std::mt19937_64& rng) {
  static const char* kNames[] = {"right", "left", "arm_a", "x", "ünïcode", "with \"quotes\"", ""};
  return kNames[rng() % 7];
}

}  // namespace

wire::Envelope random_message(std::mt19937_64& rng, std::size_t kind) {
  using namespace wire;
  Envelope m;
  m.seq = rng() >> (rng() % 64);
  m.t_ns = static_cast<std::int64_t>(rng() >> 2) * ((rng() & 1) ? 1 : -1);
  std::uniform_int_distribution<int> small(0, 3);
  switch (kind) {
    case 0: {
      HandFrameBody b;
      const int n = small(rng) % 3;
      for (int i = 0; i < n; ++i) {
        HandBody h;
        h.side = (i == 0) ? Hand::right : Hand::left;
        h.wrist = {any_v3(rng), any_q4(rng)};
        h.index = any_v3(rng);
        h.middle = any_v3(rng);
        h.ring = any_v3(rng);
        h.little = any_v3(rng);
        h.thumb_tip = any_v3(rng);
        h.index_tip = any_v3(rng);
        b.hands.push_back(h);
      }
      m.payload = b;
      break;
    }
    case 1: {
      RobotStateBody b;
      const int arms = 1 + small(rng) % 2;
      for (int a = 0; a < arms; ++a) {
        ArmStateBody arm;
        arm.name = any_name(rng);
        const int links = small(rng) + 2;
        for (int l = 0; l < links; ++l) arm.links.push_back({any_name(rng), any_v3(rng), any_q4(rng)});
        const int dof = small(rng) + 1;
        for (int j = 0; j < dof; ++j) arm.q_cmd.push_back(any_real(rng));
        arm.gripper = (rng() & 1) ? GripperState::closed : GripperState::open;
        arm.ik_ok = rng() & 1;
        arm.constraint.singularity_proximity = std::abs(any_real(rng));
        arm.constraint.ee_speed = std::abs(any_real(rng));
        arm.constraint.speed_violated = rng() & 1;
        const int faces = small(rng) % 3;
        for (int f = 0; f < faces; ++f) {
          arm.constraint.workspace.push_back({static_cast<Face>(rng() % 6), std::abs(any_real(rng))});
        }
        b.arms.push_back(arm);
      }
      b.recording = rng() & 1;
      b.feedback_mode = (rng() & 1) ? FeedbackMode::live : FeedbackMode::none;
      m.payload = b;
      break;
    }
    case 2: {
      static const char* kCmds[] = {"start_recording", "stop_recording", "set_feedback", "set_labels",
                                    "reset", "get_model", "replay"};
      ControlBody b;
      b.cmd = kCmds[rng() % 7];
      const int keys = small(rng);
      for (int k = 0; k < keys; ++k) {
        const std::string key = "k" + std::to_string(rng() % 100);
        switch (small(rng)) {
          case 0: b.args[key] = any_real(rng); break;
          case 1: b.args[key] = any_name(rng); break;
          case 2: b.args[key] = static_cast<bool>(rng() & 1); break;
          default: b.args[key] = nlohmann::json{{"nested", static_cast<std::int64_t>(rng() % 1000)},
                                              {"list", {1, 2.5, "three"}}};
        }
      }
      m.payload = b;
      break;
    }
    case 3: {
      AckBody b;
      b.for_seq = rng();
      b.ok = rng() & 1;
      b.message = any_name(rng);
      m.payload = b;
      break;
    }
    default: {
      HelloBody b;
      b.role = static_cast<Role>(rng() % 3);
      m.payload = b;
      break;
    }
  }
  return m;
}

}  // namespace twinarm::testing
