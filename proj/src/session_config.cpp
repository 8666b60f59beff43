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

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "twinarm/builtin.hpp"
#include "twinarm/error.hpp"
#include "twinarm/session.hpp"

namespace twinarm {
namespace {

using nlohmann::json;

[[noreturn]] void parse_fail(const std::string& what) { throw Error(ErrorCode::parse, "session config: " + what); }

double number_or(const json& obj, const char* key, double fallback) {
  auto it = obj.find(key);
  if (it == obj.end()) return fallback;
  if (!it->is_number()) parse_fail(std::string(key) + " must be a number");
  return it->get<double>();
}

bool bool_or(const json& obj, const char* key, bool fallback) {
  auto it = obj.find(key);
  if (it == obj.end()) return fallback;
  if (!it->is_boolean()) parse_fail(std::string(key) + " must be a boolean");
  return it->get<bool>();
}

const json& section(const json& doc, const char* key) {
  static const json empty = json::object();
  auto it = doc.find(key);
  if (it == doc.end()) return empty;
  if (!it->is_object()) parse_fail(std::string(key) + " must be an object");
  return *it;
}

Vec3 vec3(const json& v, const std::string& where) {
  if (!v.is_array() || v.size() != 3 || !v[0].is_number() || !v[1].is_number() || !v[2].is_number()) {
    parse_fail(where + " must be a 3-element numeric array");
  }
  return {v[0].get<double>(), v[1].get<double>(), v[2].get<double>()};
}

RobotModel resolve_model(const json& ref, const std::filesystem::path& base_dir) {
  if (ref.is_object()) return load_model(ref.dump());
  if (!ref.is_string()) parse_fail("arm model must be an object or a string");
  const std::string name = ref.get<std::string>();
  constexpr std::string_view kBuiltin = "builtin:";
  if (name.starts_with(kBuiltin)) {
    const auto doc = builtin_model(std::string_view(name).substr(kBuiltin.size()));
    if (!doc) parse_fail("unknown builtin model '" + name + "'");
    return load_model(*doc);
  }
  const std::filesystem::path p(name);
  return load_model_file(p.is_absolute() ? p : base_dir / p);
}

}  // namespace

std::string_view feedback_name(FeedbackMode mode) noexcept { return mode == FeedbackMode::none ? "none" : "live"; }

FeedbackMode parse_feedback(std::string_view name) {
  if (name == "none") return FeedbackMode::none;
  if (name == "live") return FeedbackMode::live;
  throw Error(ErrorCode::invalid_argument, "feedback mode must be none or live, got '" + std::string(name) + "'");
}

std::string_view recording_name(RecordingState state) noexcept {
  switch (state) {
    case RecordingState::idle: return "idle";
    case RecordingState::armed: return "armed";
    case RecordingState::recording: return "recording";
  }
  return "?";
}

void SessionConfig::validate() const {
  setup.validate();
  if (arm_settings.size() != setup.arms.size()) {
    throw Error(ErrorCode::validation, "session config: arm settings do not match arms");
  }
  if (!(rate_hz > 0.0)) throw Error(ErrorCode::validation, "session config: rate_hz must be positive");
  if (!(start_radius > 0.0)) throw Error(ErrorCode::validation, "session config: start_radius must be positive");
  if (!(end_gesture.hold_seconds > 0.0)) {
    throw Error(ErrorCode::validation, "session config: end_hold_seconds must be positive");
  }
  retarget.validate();
  ik.validate();
  singularity.validate();
  speed.validate();
  for (std::size_t i = 0; i < arm_settings.size(); ++i) {
    arm_settings[i].workspace.validate();
    const RobotModel& model = setup.arms[i].model;
    if (static_cast<std::size_t>(arm_settings[i].home.size()) != model.dof()) {
      throw Error(ErrorCode::dimension, "session config: home pose of arm '" + setup.arms[i].arm_name +
                                            "' has the wrong length");
    }
    if (!model.within_limits(arm_settings[i].home)) {
      throw Error(ErrorCode::validation, "session config: home pose of arm '" + setup.arms[i].arm_name +
                                             "' violates joint limits");
    }
  }
}

SessionConfig parse_session_config(std::string_view document, const std::filesystem::path& base_dir) {
  json doc;
  try {
    doc = json::parse(document);
  } catch (const json::parse_error& e) {
    parse_fail(e.what());
  }
  if (!doc.is_object()) parse_fail("document must be an object");

  SessionConfig cfg;
  auto arms = doc.find("arms");
  if (arms == doc.end() || !arms->is_array()) parse_fail("'arms' array is required");
  for (std::size_t i = 0; i < arms->size(); ++i) {
    const json& a = (*arms)[i];
    const std::string where = "arms[" + std::to_string(i) + "]";
    if (!a.is_object()) parse_fail(where + " must be an object");
    if (!a.contains("name") || !a["name"].is_string()) parse_fail(where + ".name is required");
    if (!a.contains("model")) parse_fail(where + ".model is required");

    ArmConfig arm;
    arm.arm_name = a["name"].get<std::string>();
    arm.model = resolve_model(a["model"], base_dir);
    arm.assigned_hand = parse_hand(a.value("hand", arm.arm_name));
    if (a.contains("base")) {
      const json& b = a["base"];
      if (!b.is_object() || !b.contains("xyz") || !b.contains("rpy")) parse_fail(where + ".base needs xyz and rpy");
      arm.base_pose = pose_from_xyz_rpy(vec3(b["xyz"], where + ".base.xyz"), vec3(b["rpy"], where + ".base.rpy"));
    }

    ArmSettings settings;
    if (!a.contains("workspace")) parse_fail(where + ".workspace is required");
    const json& ws = a["workspace"];
    if (!ws.is_object() || !ws.contains("min") || !ws.contains("max")) {
      parse_fail(where + ".workspace needs min and max");
    }
    settings.workspace.min = vec3(ws["min"], where + ".workspace.min");
    settings.workspace.max = vec3(ws["max"], where + ".workspace.max");
    if (a.contains("home")) {
      const json& h = a["home"];
      if (!h.is_array()) parse_fail(where + ".home must be an array");
      settings.home.resize(static_cast<Eigen::Index>(h.size()));
      for (std::size_t k = 0; k < h.size(); ++k) {
        if (!h[k].is_number()) parse_fail(where + ".home must be numeric");
        settings.home[static_cast<Eigen::Index>(k)] = h[k].get<double>();
      }
    } else {
      settings.home = arm.model.clamp_to_limits(JointVector::Zero(static_cast<Eigen::Index>(arm.model.dof())));
    }
    if (a.contains("start_anchor")) settings.start_anchor = vec3(a["start_anchor"], where + ".start_anchor");

    cfg.setup.arms.push_back(std::move(arm));
    cfg.arm_settings.push_back(std::move(settings));
  }

  cfg.rate_hz = number_or(doc, "rate_hz", cfg.rate_hz);

  const json& rt = section(doc, "retarget");
  cfg.retarget.thumb_shift = number_or(rt, "thumb_shift", cfg.retarget.thumb_shift);
  cfg.retarget.pitch_offset = number_or(rt, "pitch_offset", cfg.retarget.pitch_offset);
  cfg.retarget.grip_close_threshold = number_or(rt, "grip_close_threshold", cfg.retarget.grip_close_threshold);
  cfg.retarget.grip_hysteresis = number_or(rt, "grip_hysteresis", cfg.retarget.grip_hysteresis);

  const json& ik = section(doc, "ik");
  cfg.ik.max_iterations = static_cast<int>(number_or(ik, "max_iterations", cfg.ik.max_iterations));
  cfg.ik.damping = number_or(ik, "damping", cfg.ik.damping);
  cfg.ik.pos_tolerance = number_or(ik, "pos_tolerance", cfg.ik.pos_tolerance);
  cfg.ik.rot_tolerance = number_or(ik, "rot_tolerance", cfg.ik.rot_tolerance);
  cfg.ik.step_limit = number_or(ik, "step_limit", cfg.ik.step_limit);

  const json& sg = section(doc, "singularity");
  cfg.singularity.m_start = number_or(sg, "m_start", cfg.singularity.m_start);
  cfg.singularity.m_full = number_or(sg, "m_full", cfg.singularity.m_full);

  const json& sp = section(doc, "speed");
  cfg.speed.v_max = number_or(sp, "v_max", cfg.speed.v_max);
  const double window = number_or(sp, "window", static_cast<double>(cfg.speed.window));
  if (window < 0) parse_fail("speed.window must be non-negative");
  cfg.speed.window = static_cast<std::size_t>(window);

  const json& gs = section(doc, "gestures");
  cfg.start_radius = number_or(gs, "start_radius", cfg.start_radius);
  cfg.end_gesture.hold_seconds = number_or(gs, "end_hold_seconds", cfg.end_gesture.hold_seconds);
  cfg.end_gesture.cone_degrees = number_or(gs, "palm_up_cone_deg", cfg.end_gesture.cone_degrees);

  if (doc.contains("feedback_mode")) {
    if (!doc["feedback_mode"].is_string()) parse_fail("feedback_mode must be a string");
    cfg.feedback_mode = parse_feedback(doc["feedback_mode"].get<std::string>());
  }
  cfg.auto_arm = bool_or(doc, "auto_arm", cfg.auto_arm);
  cfg.clamp_command_velocity = bool_or(doc, "clamp_command_velocity", cfg.clamp_command_velocity);
  if (doc.contains("storage_dir")) {
    if (!doc["storage_dir"].is_string()) parse_fail("storage_dir must be a string");
    const std::filesystem::path p(doc["storage_dir"].get<std::string>());
    cfg.storage_dir = p.is_absolute() || base_dir.empty() ? p : base_dir / p;
  }

  cfg.validate();
  return cfg;
}

SessionConfig load_session_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::io, "cannot open config file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_session_config(ss.str(), path.parent_path());
}

SessionConfig default_session_config() { return parse_session_config(*builtin_setup("dual_vx300s")); }

}  // namespace twinarm
