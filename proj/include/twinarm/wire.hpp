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

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <json.hpp>

#include "twinarm/constraints.hpp"
#include "twinarm/model.hpp"
#include "twinarm/retarget.hpp"
#include "twinarm/session.hpp"

namespace twinarm::wire {

inline constexpr int kProtocolVersion = 1;

using V3 = std::array<double, 3>;
/// (w, x, y, z)
using Q4 = std::array<double, 4>;

struct PoseBody {
  V3 p{};
  Q4 q{1.0, 0.0, 0.0, 0.0};
  bool operator==(const PoseBody&) const = default;
};

struct HandBody {
  Hand side = Hand::right;
  PoseBody wrist;
  V3 index{}, middle{}, ring{}, little{};
  V3 thumb_tip{}, index_tip{};
  bool operator==(const HandBody&) const = default;
};

struct HandFrameBody {
  std::vector<HandBody> hands;
  bool operator==(const HandFrameBody&) const = default;
};

struct LinkBody {
  std::string name;
  V3 p{};
  Q4 q{1.0, 0.0, 0.0, 0.0};
  bool operator==(const LinkBody&) const = default;
};

struct ArmStateBody {
  std::string name;
  std::vector<LinkBody> links;
  std::vector<double> q_cmd;
  GripperState gripper = GripperState::open;
  bool ik_ok = true;
  ConstraintStatus constraint;
  bool operator==(const ArmStateBody&) const = default;
};

struct RobotStateBody {
  std::vector<ArmStateBody> arms;
  bool recording = false;
  FeedbackMode feedback_mode = FeedbackMode::live;
  bool operator==(const RobotStateBody&) const = default;
};

struct ControlBody {
  std::string cmd;
  /// Object; keys are emitted sorted.
  nlohmann::json args = nlohmann::json::object();
  bool operator==(const ControlBody&) const = default;
};

struct AckBody {
  std::uint64_t for_seq = 0;
  bool ok = true;
  std::string message;
  bool operator==(const AckBody&) const = default;
};

enum class Role { hand_source, viewer, controller };
std::string_view role_name(Role role) noexcept;

struct HelloBody {
  Role role = Role::viewer;
  int protocol_version = kProtocolVersion;
  bool operator==(const HelloBody&) const = default;
};

using Payload = std::variant<HandFrameBody, RobotStateBody, ControlBody, AckBody, HelloBody>;

struct Envelope {
  std::uint64_t seq = 0;
  std::int64_t t_ns = 0;
  Payload payload;

  std::string_view type() const noexcept;
  bool operator==(const Envelope&) const = default;
};

/// Canonical bytes: {"type","seq","t_ns","payload"} with payload keys in
/// schema order, shortest round-trip floats, no whitespace. Throws
/// Error(non_finite) on NaN/inf.
std::string encode_message(const Envelope& msg);

/// Accepts any key order and ignores unknown keys. Throws Error(unknown_type)
/// naming the type, Error(parse) on malformed bodies, and
/// Error(version_mismatch) for a hello with another protocol version.
Envelope decode_message(std::string_view bytes);

HandFrameBody to_body(const HandFrame& frame);
HandFrame to_hand_frame(const HandFrameBody& body, std::uint64_t seq, std::int64_t t_ns);

/// robot_state body for the current arm samples: links are the base frame
/// followed by forward_kinematics of q_cmd (joint link frames, then "ee").
RobotStateBody make_robot_state(const ArmSetup& setup, const std::vector<ArmSample>& arms, bool recording,
                                FeedbackMode feedback);

}  // namespace twinarm::wire
