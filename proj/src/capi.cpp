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

#include <algorithm>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>

#include "twinarm/builtin.hpp"
#include "twinarm/calibrate.hpp"
#include "twinarm/error.hpp"
#include "twinarm/kinematics.hpp"
#include "twinarm/net.hpp"
#include "twinarm/replay.hpp"
#include "twinarm/session.hpp"
#include "twinarm/synth.hpp"
#include "twinarm/twinarm.h"

struct ta_model {
  twinarm::RobotModel model;
};

struct ta_config {
  twinarm::SessionConfig config;
};

struct ta_server {
  std::unique_ptr<twinarm::Server> server;
};

struct ta_trajectory {
  twinarm::Trajectory trajectory;
};

namespace {

using twinarm::Error;
using twinarm::ErrorCode;

thread_local std::string last_error;

ta_status status_of(ErrorCode code) {
  switch (code) {
    case ErrorCode::parse: return TA_ERR_PARSE;
    case ErrorCode::validation: return TA_ERR_VALIDATION;
    case ErrorCode::dimension: return TA_ERR_DIMENSION;
    case ErrorCode::degenerate_geometry: return TA_ERR_DEGENERATE;
    case ErrorCode::non_finite: return TA_ERR_NON_FINITE;
    case ErrorCode::io: return TA_ERR_IO;
    case ErrorCode::version_mismatch: return TA_ERR_VERSION_MISMATCH;
    case ErrorCode::model_mismatch: return TA_ERR_MODEL_MISMATCH;
    case ErrorCode::unknown_type: return TA_ERR_UNKNOWN_TYPE;
    case ErrorCode::protocol: return TA_ERR_PROTOCOL;
    case ErrorCode::bind: return TA_ERR_BIND;
    case ErrorCode::invalid_argument: return TA_ERR_INVALID_ARGUMENT;
    case ErrorCode::empty: return TA_ERR_EMPTY;
  }
  return TA_ERR_INTERNAL;
}

template <typename Fn>
ta_status guard(Fn&& fn) {
  try {
    fn();
    last_error.clear();
    return TA_OK;
  } catch (const Error& e) {
    last_error = e.what();
    return status_of(e.code());
  } catch (const std::exception& e) {
    last_error = e.what();
    return TA_ERR_INTERNAL;
  } catch (...) {
    last_error = "unknown failure";
    return TA_ERR_INTERNAL;
  }
}

void require(const void* p, const char* what) {
  if (p == nullptr) throw Error(ErrorCode::invalid_argument, std::string(what) + " must not be null");
}

char* dup(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out == nullptr) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

twinarm::JointVector joints(const double* q, size_t n) {
  if (n > 0) require(q, "q");
  return Eigen::Map<const Eigen::VectorXd>(q, static_cast<Eigen::Index>(n));
}

std::string read_file(const char* path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::io, std::string("cannot open ") + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

extern "C" {

const char* ta_version(void) { return "0.1.0"; }

const char* ta_status_string(ta_status status) {
  switch (status) {
    case TA_OK: return "ok";
    case TA_ERR_PARSE: return "parse error";
    case TA_ERR_VALIDATION: return "validation error";
    case TA_ERR_DIMENSION: return "dimension mismatch";
    case TA_ERR_DEGENERATE: return "degenerate geometry";
    case TA_ERR_NON_FINITE: return "non-finite value";
    case TA_ERR_IO: return "i/o error";
    case TA_ERR_VERSION_MISMATCH: return "version mismatch";
    case TA_ERR_MODEL_MISMATCH: return "model mismatch";
    case TA_ERR_UNKNOWN_TYPE: return "unknown message type";
    case TA_ERR_PROTOCOL: return "protocol error";
    case TA_ERR_BIND: return "bind failure";
    case TA_ERR_INVALID_ARGUMENT: return "invalid argument";
    case TA_ERR_EMPTY: return "empty input";
    case TA_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

const char* ta_last_error(void) { return last_error.c_str(); }

void ta_string_free(char* s) { std::free(s); }

ta_status ta_model_load(const char* source, ta_model** out) {
  return guard([&] {
    require(source, "source");
    require(out, "out");
    const std::string_view src(source);
    constexpr std::string_view kBuiltin = "builtin:";
    twinarm::RobotModel model;
    if (src.starts_with(kBuiltin)) {
      const auto doc = twinarm::builtin_model(src.substr(kBuiltin.size()));
      if (!doc) throw Error(ErrorCode::invalid_argument, "unknown builtin model '" + std::string(src) + "'");
      model = twinarm::load_model(*doc);
    } else {
      model = twinarm::load_model_file(source);
    }
    *out = new ta_model{std::move(model)};
  });
}

ta_status ta_model_load_json(const char* document, ta_model** out) {
  return guard([&] {
    require(document, "document");
    require(out, "out");
    *out = new ta_model{twinarm::load_model(document)};
  });
}

void ta_model_free(ta_model* model) { delete model; }

ta_status ta_model_dof(const ta_model* model, size_t* out) {
  return guard([&] {
    require(model, "model");
    require(out, "out");
    *out = model->model.dof();
  });
}

ta_status ta_model_hash(const ta_model* model, char** out) {
  return guard([&] {
    require(model, "model");
    require(out, "out");
    *out = dup(model->model.model_hash);
  });
}

ta_status ta_model_ee_pose(const ta_model* model, const double* q, size_t n, double position[3],
                           double quaternion[4]) {
  return guard([&] {
    require(model, "model");
    require(position, "position");
    require(quaternion, "quaternion");
    const twinarm::Pose p = twinarm::ee_pose(model->model, twinarm::Pose(), joints(q, n));
    for (int i = 0; i < 3; ++i) position[i] = p.position[i];
    quaternion[0] = p.orientation.w();
    quaternion[1] = p.orientation.x();
    quaternion[2] = p.orientation.y();
    quaternion[3] = p.orientation.z();
  });
}

ta_status ta_model_jacobian(const ta_model* model, const double* q, size_t n, double* out) {
  return guard([&] {
    require(model, "model");
    require(out, "out");
    const twinarm::Jacobian j = twinarm::jacobian(model->model, twinarm::Pose(), joints(q, n));
    for (Eigen::Index r = 0; r < 6; ++r) {
      for (Eigen::Index c = 0; c < j.cols(); ++c) out[r * j.cols() + c] = j(r, c);
    }
  });
}

ta_status ta_model_manipulability(const ta_model* model, const double* q, size_t n, double* out) {
  return guard([&] {
    require(model, "model");
    require(out, "out");
    *out = twinarm::manipulability(model->model, twinarm::Pose(), joints(q, n));
  });
}

ta_status ta_config_load(const char* path, ta_config** out) {
  return guard([&] {
    require(out, "out");
    if (path == nullptr || *path == '\0') {
      *out = new ta_config{twinarm::default_session_config()};
    } else {
      *out = new ta_config{twinarm::load_session_config(path)};
    }
  });
}

void ta_config_free(ta_config* config) { delete config; }

ta_status ta_server_create(const ta_config* config, const char* bind, ta_feedback feedback, ta_server** out) {
  return guard([&] {
    require(config, "config");
    require(bind, "bind");
    require(out, "out");
    twinarm::ServerOptions options;
    options.bind = twinarm::parse_endpoint(bind);
    if (feedback == TA_FEEDBACK_NONE) options.feedback_override = twinarm::FeedbackMode::none;
    if (feedback == TA_FEEDBACK_LIVE) options.feedback_override = twinarm::FeedbackMode::live;
    *out = new ta_server{std::make_unique<twinarm::Server>(config->config, options)};
  });
}

ta_status ta_server_start(ta_server* server) {
  return guard([&] {
    require(server, "server");
    server->server->start();
  });
}

ta_status ta_server_port(const ta_server* server, uint16_t* out) {
  return guard([&] {
    require(server, "server");
    require(out, "out");
    *out = server->server->port();
  });
}

ta_status ta_server_run(ta_server* server) {
  return guard([&] {
    require(server, "server");
    server->server->run();
  });
}

ta_status ta_server_stop(ta_server* server) {
  return guard([&] {
    require(server, "server");
    server->server->stop();
  });
}

void ta_server_free(ta_server* server) { delete server; }

ta_status ta_synth_to_file(const char* script_path, const char* out_path, size_t* frames) {
  return guard([&] {
    require(script_path, "script_path");
    require(out_path, "out_path");
    const twinarm::SynthScript script = twinarm::load_synth_script(script_path);
    const std::string text = twinarm::synth_lines(script);
    std::ofstream out(out_path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::io, std::string("cannot write ") + out_path);
    out << text;
    out.close();
    if (!out) throw Error(ErrorCode::io, std::string("write failed for ") + out_path);
    if (frames) *frames = script.frame_count();
  });
}

ta_status ta_synth_connect(const char* script_path, const char* address, size_t* frames) {
  return guard([&] {
    require(script_path, "script_path");
    require(address, "address");
    const twinarm::SynthScript script = twinarm::load_synth_script(script_path);
    const auto result = twinarm::stream_script(script, twinarm::parse_endpoint(address));
    if (frames) *frames = result.frames_sent;
    if (result.controls_failed > 0) {
      throw Error(ErrorCode::protocol,
                  std::to_string(result.controls_failed) + " control request(s) were rejected by the server");
    }
  });
}

ta_status ta_trajectory_load(const char* path, const ta_config* config, ta_trajectory** out) {
  return guard([&] {
    require(path, "path");
    require(config, "config");
    require(out, "out");
    *out = new ta_trajectory{twinarm::load_trajectory(path, config->config.setup)};
  });
}

void ta_trajectory_free(ta_trajectory* trajectory) { delete trajectory; }

ta_status ta_trajectory_sample_count(const ta_trajectory* trajectory, size_t* out) {
  return guard([&] {
    require(trajectory, "trajectory");
    require(out, "out");
    *out = trajectory->trajectory.samples.size();
  });
}

ta_status ta_trajectory_validate(const ta_trajectory* trajectory, const ta_config* config, int* passed,
                                 char** report) {
  return guard([&] {
    require(trajectory, "trajectory");
    require(config, "config");
    require(passed, "passed");
    twinarm::ValidationParams params;
    params.speed = config->config.speed;
    const auto result = twinarm::validate_trajectory(trajectory->trajectory, config->config.setup, params);
    *passed = result.passed() ? 1 : 0;
    if (report) *report = dup(twinarm::format_validation(result));
  });
}

ta_status ta_trajectory_replay(const ta_trajectory* trajectory, const ta_config* config, double speed,
                               char** report) {
  return guard([&] {
    require(trajectory, "trajectory");
    require(config, "config");
    twinarm::KinematicSimSink sink;
    twinarm::ReplayOptions options;
    options.speed_scale = speed;
    const auto result = twinarm::replay_in_sim(trajectory->trajectory, config->config.setup, sink, nullptr, options);
    if (report) *report = dup(twinarm::fidelity_json(result));
  });
}

ta_status ta_trajectory_replay_remote(const ta_trajectory* trajectory, const char* address, double speed,
                                      char** report) {
  return guard([&] {
    require(trajectory, "trajectory");
    require(address, "address");
    if (!(speed > 0.0)) throw Error(ErrorCode::invalid_argument, "speed must be positive");
    const auto& samples = trajectory->trajectory.samples;
    double span = 0.0;
    for (const auto& s : samples) span = std::max(span, static_cast<double>(s.t_ns - samples.front().t_ns) * 1e-9);
    twinarm::WsClient client;
    client.connect(twinarm::parse_endpoint(address));
    const auto hello = client.hello(twinarm::wire::Role::controller);
    if (!hello.ok) throw Error(ErrorCode::protocol, "server refused connection: " + hello.message);
    nlohmann::json args;
    args["trajectory"] = twinarm::serialize_trajectory(trajectory->trajectory);
    args["speed"] = speed;
    const auto timeout = std::chrono::milliseconds(static_cast<long long>((span / speed + 30.0) * 1000.0));
    const auto ack = client.request("replay", std::move(args), timeout);
    client.close();
    if (!ack.ok) throw Error(ErrorCode::protocol, "server replay failed: " + ack.message);
    if (report) *report = dup(ack.message);
  });
}

ta_status ta_calibrate(const char* config_path, size_t samples, uint64_t seed, char** report) {
  return guard([&] {
    require(config_path, "config_path");
    require(report, "report");
    const std::string text = read_file(config_path);
    const auto doc = nlohmann::json::parse(text, nullptr, false);
    if (doc.is_discarded() || !doc.is_object()) {
      throw Error(ErrorCode::parse, std::string(config_path) + " is not a JSON object");
    }
    twinarm::RobotModel model;
    std::string subject;
    if (doc.contains("joints")) {
      model = twinarm::load_model(text);
      subject = "model " + model.name;
    } else {
      const auto config = twinarm::load_session_config(config_path);
      model = config.setup.arms.front().model;
      subject = "arm " + config.setup.arms.front().arm_name + " (model " + model.name + ")";
    }
    const auto result = twinarm::calibrate_singularity(model, samples, seed);
    *report = dup(subject + "\n" + twinarm::format_calibration(result));
  });
}

}  // extern "C"
