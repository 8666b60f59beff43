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

#include <cmath>

#include "twinarm/error.hpp"
#include "twinarm/kinematics.hpp"
#include "twinarm/wire.hpp"

namespace twinarm::wire {
namespace {

using ojson = nlohmann::ordered_json;
using json = nlohmann::json;

// -- encoding ---------------------------------------------------------------

double finite(double v) {
  if (!std::isfinite(v)) throw Error(ErrorCode::non_finite, "message contains a non-finite number");
  return v;
}

template <std::size_t N>
ojson arr(const std::array<double, N>& a) {
  ojson out = ojson::array();
  for (double v : a) out.push_back(finite(v));
  return out;
}

ojson arr(const std::vector<double>& a) {
  ojson out = ojson::array();
  for (double v : a) out.push_back(finite(v));
  return out;
}

ojson encode_body(const HandFrameBody& b) {
  ojson hands = ojson::array();
  for (const HandBody& h : b.hands) {
    ojson wrist;
    wrist["p"] = arr(h.wrist.p);
    wrist["q"] = arr(h.wrist.q);
    ojson knuckles;
    knuckles["index"] = arr(h.index);
    knuckles["middle"] = arr(h.middle);
    knuckles["ring"] = arr(h.ring);
    knuckles["little"] = arr(h.little);
    ojson hand;
    hand["side"] = hand_name(h.side);
    hand["wrist"] = std::move(wrist);
    hand["knuckles"] = std::move(knuckles);
    hand["thumb_tip"] = arr(h.thumb_tip);
    hand["index_tip"] = arr(h.index_tip);
    hands.push_back(std::move(hand));
  }
  ojson out;
  out["hands"] = std::move(hands);
  return out;
}

ojson encode_body(const RobotStateBody& b) {
  ojson arms = ojson::array();
  for (const ArmStateBody& a : b.arms) {
    ojson links = ojson::array();
    for (const LinkBody& l : a.links) {
      ojson link;
      link["name"] = l.name;
      link["p"] = arr(l.p);
      link["q"] = arr(l.q);
      links.push_back(std::move(link));
    }
    ojson workspace = ojson::array();
    for (const FaceViolation& f : a.constraint.workspace) {
      ojson face;
      face["face"] = face_name(f.face);
      face["depth"] = finite(f.depth);
      workspace.push_back(std::move(face));
    }
    ojson constraint;
    constraint["singularity_proximity"] = finite(a.constraint.singularity_proximity);
    constraint["workspace"] = std::move(workspace);
    constraint["ee_speed"] = finite(a.constraint.ee_speed);
    constraint["speed_violated"] = a.constraint.speed_violated;
    ojson arm;
    arm["name"] = a.name;
    arm["links"] = std::move(links);
    arm["q_cmd"] = arr(a.q_cmd);
    arm["gripper"] = gripper_name(a.gripper);
    arm["ik_ok"] = a.ik_ok;
    arm["constraint"] = std::move(constraint);
    arms.push_back(std::move(arm));
  }
  ojson out;
  out["arms"] = std::move(arms);
  out["recording"] = b.recording;
  out["feedback_mode"] = feedback_name(b.feedback_mode);
  return out;
}

ojson encode_body(const ControlBody& b) {
  if (!b.args.is_object()) throw Error(ErrorCode::invalid_argument, "control args must be an object");
  ojson out;
  out["cmd"] = b.cmd;
  // Round-trip through sorted json so nested objects are key-sorted as well.
  out["args"] = ojson::parse(b.args.dump());
  return out;
}

ojson encode_body(const AckBody& b) {
  ojson out;
  out["for_seq"] = b.for_seq;
  out["ok"] = b.ok;
  out["message"] = b.message;
  return out;
}

ojson encode_body(const HelloBody& b) {
  ojson out;
  out["role"] = role_name(b.role);
  out["protocol_version"] = b.protocol_version;
  return out;
}

// -- decoding ---------------------------------------------------------------

[[noreturn]] void malformed(std::string_view type, const std::string& what) {
  throw Error(ErrorCode::parse, "malformed " + std::string(type) + " message: " + what);
}

struct Reader {
  std::string_view type;

  const json& get(const json& obj, const char* key) const {
    if (!obj.is_object()) malformed(type, "expected an object");
    auto it = obj.find(key);
    if (it == obj.end()) malformed(type, std::string("missing '") + key + "'");
    return *it;
  }
  double num(const json& v) const {
    if (!v.is_number()) malformed(type, "expected a number");
    return v.get<double>();
  }
  bool boolean(const json& v) const {
    if (!v.is_boolean()) malformed(type, "expected a boolean");
    return v.get<bool>();
  }
  std::string str(const json& v) const {
    if (!v.is_string()) malformed(type, "expected a string");
    return v.get<std::string>();
  }
  template <std::size_t N>
  std::array<double, N> fixed(const json& v) const {
    if (!v.is_array() || v.size() != N) malformed(type, "expected a " + std::to_string(N) + "-element array");
    std::array<double, N> out{};
    for (std::size_t i = 0; i < N; ++i) out[i] = num(v[i]);
    return out;
  }
  std::vector<double> vec(const json& v) const {
    if (!v.is_array()) malformed(type, "expected an array");
    std::vector<double> out;
    for (const auto& x : v) out.push_back(num(x));
    return out;
  }
  const json& list(const json& v) const {
    if (!v.is_array()) malformed(type, "expected an array");
    return v;
  }
  template <typename Fn>
  auto guarded(Fn&& fn) const {
    try {
      return fn();
    } catch (const Error& e) {
      malformed(type, e.what());
    }
  }
};

HandFrameBody decode_hand_frame(const json& p) {
  const Reader r{"hand_frame"};
  HandFrameBody b;
  for (const json& h : r.list(r.get(p, "hands"))) {
    HandBody hand;
    hand.side = r.guarded([&] { return parse_hand(r.str(r.get(h, "side"))); });
    const json& wrist = r.get(h, "wrist");
    hand.wrist.p = r.fixed<3>(r.get(wrist, "p"));
    hand.wrist.q = r.fixed<4>(r.get(wrist, "q"));
    const json& k = r.get(h, "knuckles");
    hand.index = r.fixed<3>(r.get(k, "index"));
    hand.middle = r.fixed<3>(r.get(k, "middle"));
    hand.ring = r.fixed<3>(r.get(k, "ring"));
    hand.little = r.fixed<3>(r.get(k, "little"));
    hand.thumb_tip = r.fixed<3>(r.get(h, "thumb_tip"));
    hand.index_tip = r.fixed<3>(r.get(h, "index_tip"));
    b.hands.push_back(hand);
  }
  return b;
}

RobotStateBody decode_robot_state(const json& p) {
  const Reader r{"robot_state"};
  RobotStateBody b;
  for (const json& a : r.list(r.get(p, "arms"))) {
    ArmStateBody arm;
    arm.name = r.str(r.get(a, "name"));
    for (const json& l : r.list(r.get(a, "links"))) {
      LinkBody link;
      link.name = r.str(r.get(l, "name"));
      link.p = r.fixed<3>(r.get(l, "p"));
      link.q = r.fixed<4>(r.get(l, "q"));
      arm.links.push_back(std::move(link));
    }
    arm.q_cmd = r.vec(r.get(a, "q_cmd"));
    arm.gripper = r.guarded([&] { return parse_gripper(r.str(r.get(a, "gripper"))); });
    arm.ik_ok = r.boolean(r.get(a, "ik_ok"));
    const json& c = r.get(a, "constraint");
    arm.constraint.singularity_proximity = r.num(r.get(c, "singularity_proximity"));
    for (const json& f : r.list(r.get(c, "workspace"))) {
      FaceViolation v;
      v.face = r.guarded([&] { return parse_face(r.str(r.get(f, "face"))); });
      v.depth = r.num(r.get(f, "depth"));
      arm.constraint.workspace.push_back(v);
    }
    arm.constraint.ee_speed = r.num(r.get(c, "ee_speed"));
    arm.constraint.speed_violated = r.boolean(r.get(c, "speed_violated"));
    b.arms.push_back(std::move(arm));
  }
  b.recording = r.boolean(r.get(p, "recording"));
  b.feedback_mode = r.guarded([&] { return parse_feedback(r.str(r.get(p, "feedback_mode"))); });
  return b;
}

ControlBody decode_control(const json& p) {
  const Reader r{"control"};
  ControlBody b;
  b.cmd = r.str(r.get(p, "cmd"));
  auto it = p.find("args");
  if (it != p.end()) {
    if (!it->is_object()) malformed("control", "args must be an object");
    b.args = *it;
  }
  return b;
}

AckBody decode_ack(const json& p) {
  const Reader r{"ack"};
  AckBody b;
  const json& seq = r.get(p, "for_seq");
  if (!seq.is_number_unsigned() && !(seq.is_number_integer() && seq.get<std::int64_t>() >= 0)) {
    malformed("ack", "for_seq must be a non-negative integer");
  }
  b.for_seq = seq.get<std::uint64_t>();
  b.ok = r.boolean(r.get(p, "ok"));
  b.message = r.str(r.get(p, "message"));
  return b;
}

HelloBody decode_hello(const json& p) {
  const Reader r{"hello"};
  HelloBody b;
  const std::string role = r.str(r.get(p, "role"));
  if (role == "hand_source") {
    b.role = Role::hand_source;
  } else if (role == "viewer") {
    b.role = Role::viewer;
  } else if (role == "controller") {
    b.role = Role::controller;
  } else {
    malformed("hello", "unknown role '" + role + "'");
  }
  const json& v = r.get(p, "protocol_version");
  if (!v.is_number_integer()) malformed("hello", "protocol_version must be an integer");
  b.protocol_version = v.get<int>();
  if (b.protocol_version != kProtocolVersion) {
    throw Error(ErrorCode::version_mismatch, "protocol_version " + std::to_string(b.protocol_version) +
                                                 " is not supported (server speaks " +
                                                 std::to_string(kProtocolVersion) + ")");
  }
  return b;
}

V3 v3(const Vec3& v) { return {v.x(), v.y(), v.z()}; }
Vec3 vec(const V3& v) { return {v[0], v[1], v[2]}; }
Q4 q4(const Quat& q) { return {q.w(), q.x(), q.y(), q.z()}; }
Quat quat(const Q4& q) { return Quat(q[0], q[1], q[2], q[3]); }

LinkBody link(std::string name, const Pose& p) { return {std::move(name), v3(p.position), q4(p.orientation)}; }

}  // namespace

std::string_view role_name(Role role) noexcept {
  switch (role) {
    case Role::hand_source: return "hand_source";
    case Role::viewer: return "viewer";
    case Role::controller: return "controller";
  }
  return "?";
}

std::string_view Envelope::type() const noexcept {
  static constexpr std::string_view kNames[] = {"hand_frame", "robot_state", "control", "ack", "hello"};
  return kNames[payload.index()];
}

std::string encode_message(const Envelope& msg) {
  ojson out;
  out["type"] = msg.type();
  out["seq"] = msg.seq;
  out["t_ns"] = msg.t_ns;
  out["payload"] = std::visit([](const auto& body) { return encode_body(body); }, msg.payload);
  return out.dump();
}

Envelope decode_message(std::string_view bytes) {
  json doc;
  try {
    doc = json::parse(bytes);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::parse, std::string("malformed message: ") + e.what());
  }
  if (!doc.is_object()) throw Error(ErrorCode::parse, "malformed message: not an object");
  auto type_it = doc.find("type");
  if (type_it == doc.end() || !type_it->is_string()) throw Error(ErrorCode::parse, "malformed message: no type");
  const std::string type = type_it->get<std::string>();

  Envelope env;
  auto seq = doc.find("seq");
  auto t = doc.find("t_ns");
  if (seq == doc.end() || !seq->is_number_integer() || (seq->is_number_integer() && !seq->is_number_unsigned() &&
                                                         seq->get<std::int64_t>() < 0)) {
    throw Error(ErrorCode::parse, "malformed " + type + " message: seq must be a non-negative integer");
  }
  if (t == doc.end() || !t->is_number_integer()) {
    throw Error(ErrorCode::parse, "malformed " + type + " message: t_ns must be an integer");
  }
  env.seq = seq->get<std::uint64_t>();
  env.t_ns = t->get<std::int64_t>();
  auto payload_it = doc.find("payload");
  static const json kEmpty = json::object();
  const json& payload = payload_it == doc.end() ? kEmpty : *payload_it;

  if (type == "hand_frame") {
    env.payload = decode_hand_frame(payload);
  } else if (type == "robot_state") {
    env.payload = decode_robot_state(payload);
  } else if (type == "control") {
    env.payload = decode_control(payload);
  } else if (type == "ack") {
    env.payload = decode_ack(payload);
  } else if (type == "hello") {
    env.payload = decode_hello(payload);
  } else {
    throw Error(ErrorCode::unknown_type, "unknown message type '" + type + "'");
  }
  return env;
}

HandFrameBody to_body(const HandFrame& frame) {
  HandFrameBody body;
  for (Hand side : {Hand::left, Hand::right}) {
    const auto& h = frame.hand(side);
    if (!h) continue;
    HandBody b;
    b.side = side;
    b.wrist = {v3(h->wrist.position), q4(h->wrist.orientation)};
    b.index = v3(h->knuckles.index);
    b.middle = v3(h->knuckles.middle);
    b.ring = v3(h->knuckles.ring);
    b.little = v3(h->knuckles.little);
    b.thumb_tip = v3(h->thumb_tip);
    b.index_tip = v3(h->index_tip);
    body.hands.push_back(b);
  }
  return body;
}

HandFrame to_hand_frame(const HandFrameBody& body, std::uint64_t seq, std::int64_t t_ns) {
  HandFrame frame;
  frame.seq = seq;
  frame.t_ns = t_ns;
  for (const HandBody& b : body.hands) {
    HandSkeleton h;
    h.wrist = Pose(vec(b.wrist.p), quat(b.wrist.q));
    h.knuckles = {vec(b.index), vec(b.middle), vec(b.ring), vec(b.little)};
    h.thumb_tip = vec(b.thumb_tip);
    h.index_tip = vec(b.index_tip);
    frame.hand(b.side) = h;
  }
  return frame;
}

RobotStateBody make_robot_state(const ArmSetup& setup, const std::vector<ArmSample>& arms, bool recording,
                                FeedbackMode feedback) {
  RobotStateBody body;
  body.recording = recording;
  body.feedback_mode = feedback;
  for (const ArmSample& s : arms) {
    const ArmConfig* cfg = setup.find(s.arm);
    if (!cfg) throw Error(ErrorCode::model_mismatch, "arm '" + s.arm + "' is not in the setup");
    ArmStateBody arm;
    arm.name = s.arm;
    arm.links.push_back(link("base", cfg->base_pose));
    const std::vector<Pose> frames = forward_kinematics(cfg->model, cfg->base_pose, s.q_cmd);
    for (std::size_t i = 0; i + 1 < frames.size(); ++i) arm.links.push_back(link(cfg->model.joints[i].name, frames[i]));
    arm.links.push_back(link("ee", frames.back()));
    arm.q_cmd.assign(s.q_cmd.data(), s.q_cmd.data() + s.q_cmd.size());
    arm.gripper = s.gripper;
    arm.ik_ok = s.ik_ok;
    arm.constraint = s.constraint;
    body.arms.push_back(std::move(arm));
  }
  return body;
}

}  // namespace twinarm::wire
