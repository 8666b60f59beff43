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

#include "twinarm/synth.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <thread>

#include "twinarm/error.hpp"

namespace twinarm {
namespace {

using json = nlohmann::json;

// Hand pattern in the basis frame (x across the knuckles, y forward, z normal).
constexpr double kKnuckleOffsets[4] = {0.03, 0.01, -0.01, -0.03};
constexpr double kWristBack = 0.09;
const Vec3 kPinchCenter(0.04, 0.06, -0.02);
const Vec3 kPinchAxis(0.0, -0.6, -0.8);

[[noreturn]] void fail(const std::string& what) { throw Error(ErrorCode::parse, "synth script: " + what); }

double number(const json& obj, const char* key, double fallback, bool required = false) {
  auto it = obj.find(key);
  if (it == obj.end()) {
    if (required) fail(std::string("missing '") + key + "'");
    return fallback;
  }
  if (!it->is_number()) fail(std::string("'") + key + "' must be a number");
  return it->get<double>();
}

Vec3 vec3(const json& v, const char* what) {
  if (!v.is_array() || v.size() != 3) fail(std::string(what) + " must be a 3-element array");
  Vec3 out;
  for (int i = 0; i < 3; ++i) {
    if (!v[i].is_number()) fail(std::string(what) + " must hold numbers");
    out[i] = v[i].get<double>();
  }
  return out;
}

std::vector<TimeInterval> intervals(const json& hand, const char* key) {
  std::vector<TimeInterval> out;
  auto it = hand.find(key);
  if (it == hand.end()) return out;
  if (!it->is_array()) fail(std::string("'") + key + "' must be a list of [t0, t1]");
  for (const json& iv : *it) {
    if (!iv.is_array() || iv.size() != 2 || !iv[0].is_number() || !iv[1].is_number()) {
      fail(std::string("'") + key + "' entries must be [t0, t1]");
    }
    const double a = iv[0].get<double>(), b = iv[1].get<double>();
    if (!(a <= b)) fail(std::string("'") + key + "' interval must have t0 <= t1");
    out.emplace_back(a, b);
  }
  return out;
}

// 1 inside an interval, easing to 0 over `ramp` seconds on either side.
double palms_up_weight(const std::vector<TimeInterval>& ivs, double t, double ramp) {
  constexpr double kEps = 1e-9;
  double weight = 0.0;
  for (const TimeInterval& iv : ivs) {
    if (t >= iv.first - kEps && t <= iv.second + kEps) return 1.0;
    if (ramp <= 0.0) continue;
    const double gap = t < iv.first ? iv.first - t : t - iv.second;
    if (gap < ramp) weight = std::max(weight, 1.0 - gap / ramp);
  }
  return weight;
}

bool inside(const std::vector<TimeInterval>& ivs, double t) {
  // Frame times are k / rate; a tolerance keeps "[0, 3.1]" inclusive of the frame stamped 3.1.
  constexpr double kEps = 1e-9;
  return std::any_of(ivs.begin(), ivs.end(), [&](const TimeInterval& iv) {
    return t >= iv.first - kEps && t <= iv.second + kEps;
  });
}

SynthWaypoint sample(const std::vector<SynthWaypoint>& wps, double t) {
  if (t <= wps.front().t) return wps.front();
  if (t >= wps.back().t) return wps.back();
  auto hi = std::upper_bound(wps.begin(), wps.end(), t, [](double v, const SynthWaypoint& w) { return v < w.t; });
  const SynthWaypoint& b = *hi;
  const SynthWaypoint& a = *(hi - 1);
  const double s = (t - a.t) / (b.t - a.t);
  SynthWaypoint out;
  out.t = t;
  out.position = a.position + s * (b.position - a.position);
  out.orientation = a.orientation.slerp(s, b.orientation).normalized();
  out.pinch = a.pinch + s * (b.pinch - a.pinch);
  return out;
}

Vec3 pinch_local(double pinch, bool thumb) {
  const Vec3 axis = kPinchAxis.normalized();
  return kPinchCenter + (thumb ? 0.5 : -0.5) * pinch * axis;
}

}  // namespace

std::size_t SynthScript::frame_count() const {
  return static_cast<std::size_t>(std::llround(duration * rate_hz));
}

SynthScript parse_synth_script(std::string_view document) {
  json doc;
  try {
    doc = json::parse(document);
  } catch (const json::parse_error& e) {
    fail(e.what());
  }
  if (!doc.is_object()) fail("top level must be an object");
  SynthScript s;
  s.rate_hz = number(doc, "rate_hz", 30.0);
  s.duration = number(doc, "duration", 0.0, true);
  if (!(s.rate_hz > 0.0) || !std::isfinite(s.rate_hz)) fail("rate_hz must be positive");
  if (!(s.duration >= 0.0) || !std::isfinite(s.duration)) fail("duration must be non-negative");
  if (auto it = doc.find("frame"); it != doc.end()) {
    if (*it == "target") {
      s.frame = SynthFrame::target;
    } else if (*it == "hand") {
      s.frame = SynthFrame::hand;
    } else {
      fail("frame must be \"target\" or \"hand\"");
    }
  }
  s.palms_up_ramp = number(doc, "palms_up_ramp", s.palms_up_ramp);
  if (!(s.palms_up_ramp >= 0.0)) fail("palms_up_ramp must be non-negative");
  if (auto it = doc.find("retarget"); it != doc.end()) {
    if (!it->is_object()) fail("'retarget' must be an object");
    s.retarget.thumb_shift = number(*it, "thumb_shift", s.retarget.thumb_shift);
    s.retarget.pitch_offset = number(*it, "pitch_offset", s.retarget.pitch_offset);
  }
  auto hands = doc.find("hands");
  if (hands == doc.end() || !hands->is_array()) fail("'hands' must be a list");
  for (const json& h : *hands) {
    if (!h.is_object()) fail("hand entries must be objects");
    SynthHand hand;
    try {
      hand.side = parse_hand(h.value("side", std::string("right")));
    } catch (const Error& e) {
      fail(e.what());
    }
    for (const SynthHand& other : s.hands) {
      if (other.side == hand.side) fail("duplicate hand '" + std::string(hand_name(hand.side)) + "'");
    }
    auto wps = h.find("waypoints");
    if (wps == h.end() || !wps->is_array() || wps->empty()) fail("each hand needs a non-empty 'waypoints' list");
    for (const json& w : *wps) {
      if (!w.is_object()) fail("waypoints must be objects");
      SynthWaypoint wp;
      wp.t = number(w, "t", 0.0, true);
      if (!w.contains("p")) fail("waypoint needs 'p'");
      wp.position = vec3(w["p"], "p");
      const Vec3 rpy = w.contains("rpy") ? vec3(w["rpy"], "rpy") : Vec3::Zero();
      wp.orientation = quat_from_rpy(rpy.x(), rpy.y(), rpy.z());
      wp.pinch = number(w, "pinch", 0.08);
      if (!(wp.pinch >= 0.0)) fail("pinch must be non-negative");
      if (!hand.waypoints.empty() && !(wp.t > hand.waypoints.back().t)) fail("waypoint times must increase");
      hand.waypoints.push_back(wp);
    }
    hand.palms_up = intervals(h, "palms_up");
    hand.absent = intervals(h, "absent");
    s.hands.push_back(std::move(hand));
  }
  if (auto it = doc.find("controls"); it != doc.end()) {
    if (!it->is_array()) fail("'controls' must be a list");
    for (const json& c : *it) {
      if (!c.is_object() || !c.contains("cmd") || !c["cmd"].is_string()) fail("controls need a 'cmd' string");
      SynthControl control;
      control.t = number(c, "t", 0.0, true);
      control.cmd = c["cmd"].get<std::string>();
      if (c.contains("args")) {
        if (!c["args"].is_object()) fail("control args must be an object");
        control.args = c["args"];
      }
      s.controls.push_back(std::move(control));
    }
    std::stable_sort(s.controls.begin(), s.controls.end(),
                     [](const SynthControl& a, const SynthControl& b) { return a.t < b.t; });
  }
  try {
    s.retarget.validate();
  } catch (const Error& e) {
    fail(e.what());
  }
  return s;
}

SynthScript load_synth_script(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::io, "cannot open script " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_synth_script(ss.str());
}

HandSkeleton skeleton_for_basis(const Pose& basis, double pinch) {
  HandSkeleton h;
  const Vec3 c = basis.position;
  const Mat3 r = basis.rotation();
  Vec3* knuckles[4] = {&h.knuckles.index, &h.knuckles.middle, &h.knuckles.ring, &h.knuckles.little};
  for (int i = 0; i < 4; ++i) *knuckles[i] = c + r * Vec3(kKnuckleOffsets[i], 0.0, 0.0);
  h.wrist = Pose(c + r * Vec3(0.0, -kWristBack, 0.0), basis.orientation);
  h.thumb_tip = c + r * pinch_local(pinch, true);
  h.index_tip = c + r * pinch_local(pinch, false);
  return h;
}

HandSkeleton skeleton_for_target(const Pose& target, double pinch, const RetargetParams& params) {
  const Quat rotation =
      (target.orientation * quat_from_axis_angle(Vec3::UnitX(), -params.pitch_offset)).normalized();
  const Vec3 thumb_dir = (rotation * pinch_local(pinch, true)).normalized();
  return skeleton_for_basis(Pose(target.position - params.thumb_shift * thumb_dir, rotation), pinch);
}

Quat palms_up_orientation(Hand side) {
  // Fingers along +X with the palm facing +Z: the thumb side is -Y for a
  // right hand and +Y for a left one.
  const Vec3 u = side == Hand::right ? Vec3(-Vec3::UnitY()) : Vec3(Vec3::UnitY());
  const Vec3 w = side == Hand::right ? Vec3(Vec3::UnitZ()) : Vec3(-Vec3::UnitZ());
  Mat3 r;
  r.col(0) = u;
  r.col(1) = w.cross(u);
  r.col(2) = w;
  return Quat(r).normalized();
}

std::vector<HandFrame> generate_frames(const SynthScript& script) {
  const std::size_t n = script.frame_count();
  std::vector<HandFrame> frames;
  frames.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double t = static_cast<double>(k) / script.rate_hz;
    HandFrame f;
    f.t_ns = std::llround(static_cast<double>(k) * 1e9 / script.rate_hz);
    f.seq = k + 1;
    for (const SynthHand& hand : script.hands) {
      if (inside(hand.absent, t)) continue;
      const SynthWaypoint wp = sample(hand.waypoints, t);
      HandSkeleton skeleton = script.frame == SynthFrame::target
                                  ? skeleton_for_target(Pose(wp.position, wp.orientation), wp.pinch, script.retarget)
                                  : skeleton_for_basis(Pose(wp.position, wp.orientation), wp.pinch);
      const double up = palms_up_weight(hand.palms_up, t, script.palms_up_ramp);
      if (up > 0.0) {
        // Turn the hand about its knuckle centroid.
        const HandBasis basis = compute_hand_basis(skeleton);
        const Quat turned = basis.rotation.slerp(up, palms_up_orientation(hand.side)).normalized();
        skeleton = skeleton_for_basis(Pose(basis.origin, turned), wp.pinch);
      }
      f.hand(hand.side) = skeleton;
    }
    frames.push_back(std::move(f));
  }
  return frames;
}

std::vector<wire::Envelope> synthesize_messages(const SynthScript& script) {
  const std::vector<HandFrame> frames = generate_frames(script);
  std::vector<wire::Envelope> out;
  out.reserve(frames.size() + script.controls.size());
  std::uint64_t seq = 0;
  std::size_t next_control = 0;
  auto emit_controls_until = [&](double t) {
    while (next_control < script.controls.size() && script.controls[next_control].t <= t + 1e-9) {
      const SynthControl& c = script.controls[next_control++];
      const auto t_ns = std::llround(c.t * 1e9);
      out.push_back({++seq, t_ns, wire::ControlBody{c.cmd, c.args}});
    }
  };
  for (std::size_t k = 0; k < frames.size(); ++k) {
    emit_controls_until(static_cast<double>(k) / script.rate_hz);
    out.push_back({++seq, frames[k].t_ns, wire::to_body(frames[k])});
  }
  emit_controls_until(std::max(script.duration, script.controls.empty() ? 0.0 : script.controls.back().t));
  return out;
}

std::string synth_lines(const SynthScript& script) {
  std::string text;
  for (const wire::Envelope& msg : synthesize_messages(script)) {
    text += wire::encode_message(msg);
    text += '\n';
  }
  return text;
}

std::vector<wire::Envelope> parse_message_lines(std::string_view text) {
  std::vector<wire::Envelope> out;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    const std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
    try {
      out.push_back(wire::decode_message(line));
    } catch (const Error& e) {
      throw Error(e.code(), "line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

StreamResult stream_script(const SynthScript& script, const Endpoint& endpoint, bool realtime) {
  WsClient client;
  client.connect(endpoint);
  const wire::AckBody hello = client.hello(wire::Role::hand_source);
  if (!hello.ok) throw Error(ErrorCode::protocol, "server refused hand_source: " + hello.message);

  StreamResult result;
  std::int64_t last_frame_t = -1;
  const auto start = std::chrono::steady_clock::now();
  for (const wire::Envelope& msg : synthesize_messages(script)) {
    if (realtime) std::this_thread::sleep_until(start + std::chrono::nanoseconds(msg.t_ns));
    // Keep the inbox short; robot_state is not needed until the end.
    while (client.receive_raw(std::chrono::milliseconds(0))) {
    }
    const auto seq = client.send(msg.payload, msg.t_ns);
    if (std::holds_alternative<wire::ControlBody>(msg.payload)) {
      // Controls are answered before any later frame is consumed.
      ++result.controls_sent;
      auto ack = client.wait_ack(seq, std::chrono::seconds(10));
      if (!ack || !ack->ok) ++result.controls_failed;
    } else {
      ++result.frames_sent;
      last_frame_t = msg.t_ns;
    }
    if (!client.is_open()) throw Error(ErrorCode::io, "server closed the connection");
  }
  if (last_frame_t >= 0) {
    const auto deadline = std::chrono::steady_clock::now() + std::chrono::seconds(3);
    while (std::chrono::steady_clock::now() < deadline) {
      auto bytes = client.receive_raw(std::chrono::milliseconds(100));
      if (!bytes) continue;
      if (bytes->compare(0, 21, "{\"type\":\"robot_state\"") != 0) continue;
      if (wire::decode_message(*bytes).t_ns == last_frame_t) {
        result.last_frame_acknowledged = true;
        break;
      }
    }
  }
  client.close();
  return result;
}

}  // namespace twinarm
