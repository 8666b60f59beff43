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
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "twinarm/error.hpp"
#include "twinarm/replay.hpp"
#include "twinarm/session.hpp"

namespace twinarm {
namespace {

// Minimal append-only JSON writer with fixed float formatting; nlohmann's
// dump() picks shortest representations, which this file format does not use.
class LineWriter {
 public:
  LineWriter& raw(std::string_view s) {
    out_.append(s);
    return *this;
  }
  LineWriter& key(std::string_view k) {
    sep();
    out_.append(nlohmann::json(std::string(k)).dump());
    out_.push_back(':');
    fresh_ = true;
    return *this;
  }
  LineWriter& num(double v) {
    sep();
    if (!std::isfinite(v)) throw Error(ErrorCode::non_finite, "trajectory contains a non-finite value");
    if (v == 0.0) v = 0.0;  // drop the sign of -0
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    out_.append(buf);
    return *this;
  }
  LineWriter& integer(long long v) {
    sep();
    out_.append(std::to_string(v));
    return *this;
  }
  LineWriter& uinteger(unsigned long long v) {
    sep();
    out_.append(std::to_string(v));
    return *this;
  }
  LineWriter& boolean(bool b) {
    sep();
    out_.append(b ? "true" : "false");
    return *this;
  }
  LineWriter& str(std::string_view s) {
    sep();
    out_.append(nlohmann::json(std::string(s)).dump());
    return *this;
  }
  LineWriter& open(char c) {
    sep();
    out_.push_back(c);
    fresh_ = true;
    return *this;
  }
  LineWriter& close(char c) {
    out_.push_back(c);
    fresh_ = false;
    return *this;
  }
  template <typename Range>
  LineWriter& nums(const Range& r) {
    open('[');
    for (double v : r) num(v);
    return close(']');
  }
  std::string& text() { return out_; }

 private:
  void sep() {
    if (!fresh_) out_.push_back(',');
    fresh_ = false;
  }
  std::string out_;
  bool fresh_ = true;
};

void write_sample(LineWriter& w, const TrajectorySample& s) {
  w.open('{');
  w.key("t").integer(s.t_ns);
  w.key("seq").uinteger(s.seq);
  w.key("arms").open('[');
  for (const ArmSample& a : s.arms) {
    w.open('{');
    w.key("name").str(a.arm);
    w.key("q_cmd").nums(std::vector<double>(a.q_cmd.data(), a.q_cmd.data() + a.q_cmd.size()));
    w.key("gripper").str(gripper_name(a.gripper));
    w.key("ee_pose").open('{');
    w.key("p").nums(std::vector<double>{a.ee_pose.position.x(), a.ee_pose.position.y(), a.ee_pose.position.z()});
    const Quat& q = a.ee_pose.orientation;
    w.key("q").nums(std::vector<double>{q.w(), q.x(), q.y(), q.z()});
    w.close('}');
    w.key("ik_ok").boolean(a.ik_ok);
    w.key("constraint").open('{');
    w.key("singularity_proximity").num(a.constraint.singularity_proximity);
    w.key("workspace").open('[');
    for (const auto& f : a.constraint.workspace) {
      w.open('{');
      w.key("face").str(face_name(f.face));
      w.key("depth").num(f.depth);
      w.close('}');
    }
    w.close(']');
    w.key("ee_speed").num(a.constraint.ee_speed);
    w.key("speed_violated").boolean(a.constraint.speed_violated);
    w.close('}');
    w.close('}');
  }
  w.close(']');
  w.close('}');
}

using ojson = nlohmann::ordered_json;

[[noreturn]] void line_fail(std::size_t line, const std::string& what) {
  throw Error(ErrorCode::parse, "trajectory line " + std::to_string(line) + ": " + what);
}

const ojson& req(const ojson& obj, const char* key, std::size_t line) {
  if (!obj.is_object()) line_fail(line, "expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) line_fail(line, std::string("missing '") + key + "'");
  return *it;
}

double num(const ojson& v, std::size_t line) {
  if (!v.is_number()) line_fail(line, "expected a number");
  return v.get<double>();
}

std::vector<double> nums(const ojson& v, std::size_t line, std::size_t expected = 0) {
  if (!v.is_array()) line_fail(line, "expected an array");
  if (expected && v.size() != expected) line_fail(line, "array has the wrong length");
  std::vector<double> out;
  for (const auto& x : v) out.push_back(num(x, line));
  return out;
}

std::string str(const ojson& v, std::size_t line) {
  if (!v.is_string()) line_fail(line, "expected a string");
  return v.get<std::string>();
}

bool boolean(const ojson& v, std::size_t line) {
  if (!v.is_boolean()) line_fail(line, "expected a boolean");
  return v.get<bool>();
}

template <typename Int>
Int integer(const ojson& v, std::size_t line) {
  if (!v.is_number_integer()) line_fail(line, "expected an integer");
  return v.get<Int>();
}

TrajectorySample parse_sample(const ojson& j, std::size_t line) {
  TrajectorySample s;
  s.t_ns = integer<std::int64_t>(req(j, "t", line), line);
  s.seq = integer<std::uint64_t>(req(j, "seq", line), line);
  const ojson& arms = req(j, "arms", line);
  if (!arms.is_array()) line_fail(line, "arms must be an array");
  for (const ojson& a : arms) {
    ArmSample arm;
    arm.arm = str(req(a, "name", line), line);
    const auto q = nums(req(a, "q_cmd", line), line);
    arm.q_cmd = Eigen::Map<const JointVector>(q.data(), static_cast<Eigen::Index>(q.size()));
    try {
      arm.gripper = parse_gripper(str(req(a, "gripper", line), line));
    } catch (const Error& e) {
      line_fail(line, e.what());
    }
    const ojson& pose = req(a, "ee_pose", line);
    const auto p = nums(req(pose, "p", line), line, 3);
    const auto o = nums(req(pose, "q", line), line, 4);
    arm.ee_pose = Pose(Vec3(p[0], p[1], p[2]), Quat(o[0], o[1], o[2], o[3]));
    arm.ik_ok = boolean(req(a, "ik_ok", line), line);
    const ojson& c = req(a, "constraint", line);
    arm.constraint.singularity_proximity = num(req(c, "singularity_proximity", line), line);
    const ojson& ws = req(c, "workspace", line);
    if (!ws.is_array()) line_fail(line, "workspace must be an array");
    for (const ojson& f : ws) {
      FaceViolation v;
      try {
        v.face = parse_face(str(req(f, "face", line), line));
      } catch (const Error& e) {
        line_fail(line, e.what());
      }
      v.depth = num(req(f, "depth", line), line);
      arm.constraint.workspace.push_back(v);
    }
    arm.constraint.ee_speed = num(req(c, "ee_speed", line), line);
    arm.constraint.speed_violated = boolean(req(c, "speed_violated", line), line);
    s.arms.push_back(std::move(arm));
  }
  return s;
}

}  // namespace

std::string serialize_trajectory(const Trajectory& trajectory) {
  const TrajectoryHeader& h = trajectory.header;
  LineWriter w;
  w.open('{');
  w.key("format_version").integer(h.format_version);
  w.key("model_hash").open('{');
  for (const auto& arm : h.arms) w.key(arm.name).str(arm.model_hash);
  w.close('}');
  w.key("rate_hz").num(h.rate_hz);
  w.key("task_label").str(h.task_label);
  w.key("condition_label").str(h.condition_label);
  w.key("started_at").integer(h.started_at);
  w.close('}').raw("\n");
  std::string out = std::move(w.text());
  for (const auto& s : trajectory.samples) {
    LineWriter line;
    write_sample(line, s);
    out.append(line.text());
    out.push_back('\n');
  }
  return out;
}

std::filesystem::path save_trajectory(const Trajectory& trajectory, const std::filesystem::path& dir) {
  const std::string text = serialize_trajectory(trajectory);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::io, "cannot create " + dir.string() + ": " + ec.message());
  const std::string stem = "traj_" + std::to_string(trajectory.header.started_at);
  std::filesystem::path path = dir / (stem + ".traj.jsonl");
  for (int k = 1; std::filesystem::exists(path); ++k) {
    path = dir / (stem + "_" + std::to_string(k) + ".traj.jsonl");
  }
  std::ofstream out(path, std::ios::binary);
  out << text;
  out.flush();
  if (!out) throw Error(ErrorCode::io, "failed writing " + path.string());
  return path;
}

Trajectory parse_trajectory(std::string_view text) {
  Trajectory traj;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  bool have_header = false;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    const std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (line.empty()) line_fail(line_no, "empty line");

    ojson j;
    try {
      j = ojson::parse(line);
    } catch (const ojson::parse_error& e) {
      line_fail(line_no, e.what());
    }
    if (!have_header) {
      TrajectoryHeader& h = traj.header;
      h.format_version = integer<int>(req(j, "format_version", line_no), line_no);
      if (h.format_version != kTrajectoryFormatVersion) {
        throw Error(ErrorCode::version_mismatch, "trajectory format_version " + std::to_string(h.format_version) +
                                                     " is not supported (expected " +
                                                     std::to_string(kTrajectoryFormatVersion) + ")");
      }
      const ojson& hashes = req(j, "model_hash", line_no);
      if (!hashes.is_object()) line_fail(line_no, "model_hash must be an object");
      for (auto it = hashes.begin(); it != hashes.end(); ++it) h.arms.push_back({it.key(), str(it.value(), line_no)});
      h.rate_hz = num(req(j, "rate_hz", line_no), line_no);
      h.task_label = str(req(j, "task_label", line_no), line_no);
      h.condition_label = str(req(j, "condition_label", line_no), line_no);
      h.started_at = integer<std::int64_t>(req(j, "started_at", line_no), line_no);
      have_header = true;
    } else {
      traj.samples.push_back(parse_sample(j, line_no));
    }
  }
  if (!have_header) throw Error(ErrorCode::parse, "trajectory line 1: missing header");
  return traj;
}

Trajectory load_trajectory(const std::filesystem::path& path, const ArmSetup& setup) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::io, "cannot open trajectory " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  Trajectory traj = parse_trajectory(ss.str());
  check_against_setup(traj, setup);
  return traj;
}

void check_against_setup(const Trajectory& traj, const ArmSetup& setup) {
  for (const auto& arm : traj.header.arms) {
    const ArmConfig* cfg = setup.find(arm.name);
    if (!cfg || cfg->model.model_hash != arm.model_hash) {
      throw Error(ErrorCode::model_mismatch,
                  "trajectory arm '" + arm.name + "' (model " + arm.model_hash + ") is not in the loaded setup");
    }
  }
  for (const auto& s : traj.samples) {
    if (s.arms.size() != traj.header.arms.size()) {
      throw Error(ErrorCode::model_mismatch, "sample " + std::to_string(s.seq) + " has the wrong number of arms");
    }
    for (std::size_t i = 0; i < s.arms.size(); ++i) {
      const ArmConfig* cfg = setup.find(traj.header.arms[i].name);
      if (s.arms[i].arm != cfg->arm_name ||
          static_cast<std::size_t>(s.arms[i].q_cmd.size()) != cfg->model.dof()) {
        throw Error(ErrorCode::model_mismatch,
                    "sample " + std::to_string(s.seq) + " is inconsistent with arm '" + cfg->arm_name + "'");
      }
    }
  }
}

}  // namespace twinarm
