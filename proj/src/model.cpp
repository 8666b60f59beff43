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

#include "twinarm/model.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "twinarm/error.hpp"

namespace twinarm {
namespace {

using nlohmann::json;

constexpr double kUnitTolerance = 1e-9;

[[noreturn]] void parse_fail(const std::string& what) {
  throw Error(ErrorCode::parse, "model config: " + what);
}

[[noreturn]] void invalid(const std::string& what) {
  throw Error(ErrorCode::validation, "model config: " + what);
}

const json& field(const json& obj, const char* key, const std::string& where) {
  if (!obj.is_object()) parse_fail(where + " is not an object");
  auto it = obj.find(key);
  if (it == obj.end()) parse_fail(where + " is missing '" + key + "'");
  return *it;
}

double number(const json& v, const std::string& where) {
  if (!v.is_number()) parse_fail(where + " must be a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) invalid(where + " must be finite");
  return d;
}

Vec3 vec3(const json& v, const std::string& where) {
  if (!v.is_array() || v.size() != 3) parse_fail(where + " must be a 3-element array");
  return {number(v[0], where), number(v[1], where), number(v[2], where)};
}

struct ParsedPose {
  Vec3 xyz;
  Vec3 rpy;
};

ParsedPose pose_fields(const json& v, const std::string& where) {
  return {vec3(field(v, "xyz", where), where + ".xyz"),
          vec3(field(v, "rpy", where), where + ".rpy")};
}

json pose_json(const ParsedPose& p) {
  return {{"rpy", {p.rpy.x(), p.rpy.y(), p.rpy.z()}},
          {"xyz", {p.xyz.x(), p.xyz.y(), p.xyz.z()}}};
}

std::string fnv1a_hex(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace

std::string_view hand_name(Hand hand) noexcept { return hand == Hand::left ? "left" : "right"; }

Hand parse_hand(std::string_view name) {
  if (name == "left") return Hand::left;
  if (name == "right") return Hand::right;
  throw Error(ErrorCode::parse, "unknown hand side '" + std::string(name) + "'");
}

bool RobotModel::within_limits(const JointVector& q) const {
  if (static_cast<std::size_t>(q.size()) != dof()) return false;
  for (std::size_t i = 0; i < dof(); ++i) {
    const auto& lim = joints[i].position_limits;
    if (!(q[i] >= lim.min && q[i] <= lim.max)) return false;
  }
  return true;
}

JointVector RobotModel::clamp_to_limits(const JointVector& q) const {
  JointVector out = q;
  for (std::size_t i = 0; i < dof() && i < static_cast<std::size_t>(q.size()); ++i) {
    const auto& lim = joints[i].position_limits;
    out[i] = std::clamp(q[i], lim.min, lim.max);
  }
  return out;
}

RobotModel load_model(std::string_view document) {
  json doc;
  try {
    doc = json::parse(document);
  } catch (const json::parse_error& e) {
    parse_fail(e.what());
  }

  RobotModel model;
  const json& name = field(doc, "name", "document");
  if (!name.is_string()) parse_fail("name must be a string");
  model.name = name.get<std::string>();

  const json& joints = field(doc, "joints", "document");
  if (!joints.is_array()) parse_fail("joints must be an array");

  json canonical_joints = json::array();
  std::set<std::string> names;
  for (std::size_t i = 0; i < joints.size(); ++i) {
    const std::string where = "joints[" + std::to_string(i) + "]";
    const json& j = joints[i];
    JointSpec spec;
    const json& jname = field(j, "name", where);
    if (!jname.is_string()) parse_fail(where + ".name must be a string");
    spec.name = jname.get<std::string>();
    if (!names.insert(spec.name).second) invalid("duplicate joint name '" + spec.name + "'");

    spec.axis = vec3(field(j, "axis", where), where + ".axis");
    if (std::abs(spec.axis.norm() - 1.0) > kUnitTolerance) {
      invalid(where + ".axis is not a unit vector");
    }
    const ParsedPose origin = pose_fields(field(j, "origin", where), where + ".origin");
    spec.origin = pose_from_xyz_rpy(origin.xyz, origin.rpy);

    const json& limits = field(j, "limits", where);
    const json& position = field(limits, "position", where + ".limits");
    if (!position.is_array() || position.size() != 2) {
      parse_fail(where + ".limits.position must be [min, max]");
    }
    spec.position_limits.min = number(position[0], where + ".limits.position");
    spec.position_limits.max = number(position[1], where + ".limits.position");
    if (!(spec.position_limits.min < spec.position_limits.max)) {
      invalid(where + ".limits.position requires min < max");
    }
    spec.velocity_limit = number(field(limits, "velocity", where + ".limits"), where + ".limits.velocity");
    if (!(spec.velocity_limit > 0.0)) invalid(where + ".limits.velocity must be positive");

    canonical_joints.push_back(
        {{"axis", {spec.axis.x(), spec.axis.y(), spec.axis.z()}},
         {"limits", {{"position", {spec.position_limits.min, spec.position_limits.max}},
                     {"velocity", spec.velocity_limit}}},
         {"name", spec.name},
         {"origin", pose_json(origin)}});
    model.joints.push_back(std::move(spec));
  }
  if (model.joints.empty()) invalid("at least one joint is required");

  const ParsedPose ee = pose_fields(field(doc, "ee_offset", "document"), "ee_offset");
  model.ee_offset = pose_from_xyz_rpy(ee.xyz, ee.rpy);

  const json& gripper = field(doc, "gripper", "document");
  model.gripper.open_aperture = number(field(gripper, "open", "gripper"), "gripper.open");
  model.gripper.closed_aperture = number(field(gripper, "closed", "gripper"), "gripper.closed");
  if (!(model.gripper.open_aperture > model.gripper.closed_aperture &&
        model.gripper.closed_aperture >= 0.0)) {
    invalid("gripper requires open > closed >= 0");
  }

  // nlohmann::json objects are key-sorted, so this dump is independent of the
  // input's key order and whitespace.
  const json canonical = {
      {"ee_offset", pose_json(ee)},
      {"gripper", {{"closed", model.gripper.closed_aperture}, {"open", model.gripper.open_aperture}}},
      {"joints", canonical_joints},
      {"name", model.name}};
  model.canonical_document = canonical.dump();
  model.model_hash = fnv1a_hex(model.canonical_document);
  return model;
}

RobotModel load_model_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::io, "cannot open model file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return load_model(ss.str());
}

void ArmSetup::validate() const {
  if (arms.empty() || arms.size() > 2) {
    throw Error(ErrorCode::validation, "arm setup requires one or two arms");
  }
  if (arms.size() == 2) {
    if (arms[0].assigned_hand == arms[1].assigned_hand) {
      throw Error(ErrorCode::validation, "arms must be assigned distinct hands");
    }
    if (arms[0].arm_name == arms[1].arm_name) {
      throw Error(ErrorCode::validation, "arm names must be unique");
    }
  }
}

const ArmConfig* ArmSetup::find(std::string_view arm_name) const {
  for (const auto& arm : arms) {
    if (arm.arm_name == arm_name) return &arm;
  }
  return nullptr;
}

}  // namespace twinarm
