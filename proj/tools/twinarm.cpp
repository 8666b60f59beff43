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

// Command-line front end over the C interface.

#include <cstdio>
#include <string>

#include <CLI11.hpp>

#include "twinarm/twinarm.h"

namespace {

int report_failure(const char* what, ta_status status) {
  std::fprintf(stderr, "twinarm: %s: %s (%s)\n", what, ta_last_error(), ta_status_string(status));
  return 2;
}

struct Owned {
  char* text = nullptr;
  ~Owned() { ta_string_free(text); }
};

int cmd_serve(const std::string& config_path, const std::string& bind, const std::string& feedback) {
  ta_config* config = nullptr;
  if (ta_status s = ta_config_load(config_path.c_str(), &config); s != TA_OK) return report_failure("config", s);
  ta_feedback mode = TA_FEEDBACK_FROM_CONFIG;
  if (feedback == "none") mode = TA_FEEDBACK_NONE;
  if (feedback == "live") mode = TA_FEEDBACK_LIVE;
  ta_server* server = nullptr;
  ta_status s = ta_server_create(config, bind.c_str(), mode, &server);
  ta_config_free(config);
  if (s != TA_OK) return report_failure("serve", s);
  s = ta_server_run(server);
  ta_server_free(server);
  if (s != TA_OK) return report_failure("serve", s);
  return 0;
}

int cmd_synth(const std::string& script, const std::string& out, const std::string& connect) {
  size_t frames = 0;
  if (!out.empty()) {
    if (ta_status s = ta_synth_to_file(script.c_str(), out.c_str(), &frames); s != TA_OK) {
      return report_failure("synth", s);
    }
    std::printf("wrote %zu frames to %s\n", frames, out.c_str());
    return 0;
  }
  if (ta_status s = ta_synth_connect(script.c_str(), connect.c_str(), &frames); s != TA_OK) {
    return report_failure("synth", s);
  }
  std::printf("streamed %zu frames to %s\n", frames, connect.c_str());
  return 0;
}

int cmd_replay(const std::string& path, const std::string& connect, const std::string& config_path, bool validate,
               double speed, bool force) {
  ta_config* config = nullptr;
  if (ta_status s = ta_config_load(config_path.c_str(), &config); s != TA_OK) return report_failure("config", s);
  ta_trajectory* trajectory = nullptr;
  ta_status s = ta_trajectory_load(path.c_str(), config, &trajectory);
  if (s != TA_OK) {
    ta_config_free(config);
    return report_failure("load", s);
  }
  int rc = 0;
  if (validate) {
    int passed = 0;
    Owned report;
    s = ta_trajectory_validate(trajectory, config, &passed, &report.text);
    if (s != TA_OK) {
      rc = report_failure("validate", s);
    } else {
      std::printf("validation\n%s", report.text);
      if (!passed) {
        std::fprintf(stderr, "twinarm: validation failed%s\n", force ? " (continuing: --force)" : "");
        if (!force) rc = 1;
      }
    }
  }
  if (rc == 0) {
    Owned fidelity;
    s = connect.empty() ? ta_trajectory_replay(trajectory, config, speed, &fidelity.text)
                        : ta_trajectory_replay_remote(trajectory, connect.c_str(), speed, &fidelity.text);
    if (s != TA_OK) {
      rc = report_failure("replay", s);
    } else {
      std::printf("fidelity %s\n", fidelity.text);
    }
  }
  ta_trajectory_free(trajectory);
  ta_config_free(config);
  return rc;
}

int cmd_calibrate(const std::string& config_path, std::size_t samples, std::uint64_t seed) {
  Owned report;
  if (ta_status s = ta_calibrate(config_path.c_str(), samples, seed, &report.text); s != TA_OK) {
    return report_failure("calibrate", s);
  }
  std::fputs(report.text, stdout);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"twinarm: hand-retargeting digital twin server and tools"};
  app.require_subcommand(1);
  app.set_version_flag("--version", ta_version());

  std::string config_path, bind = "127.0.0.1:8765", feedback;
  auto* serve = app.add_subcommand("serve", "Run the websocket server with a live session");
  serve->add_option("--config", config_path, "Session config (default: bundled dual-arm setup)");
  serve->add_option("--bind", bind, "Listen address HOST:PORT")->capture_default_str();
  serve->add_option("--feedback", feedback, "Override the feedback mode")->check(CLI::IsMember({"none", "live"}));

  std::string script, out, connect;
  auto* synth = app.add_subcommand("synth", "Generate a synthetic 30 Hz hand stream from a script");
  synth->add_option("--script", script, "Synth script")->required()->check(CLI::ExistingFile);
  auto* target = synth->add_option_group("target", "Where the stream goes");
  target->add_option("--out", out, "Write line-delimited messages to a file");
  target->add_option("--connect", connect, "Stream to a server at HOST:PORT");
  target->require_option(1);

  std::string traj_path, replay_connect, replay_config;
  bool validate = false, force = false;
  double speed = 1.0;
  auto* replay = app.add_subcommand("replay", "Validate and replay a recorded trajectory");
  replay->add_option("path", traj_path, "Trajectory file")->required();
  replay->add_option("--connect", replay_connect, "Replay on a server at HOST:PORT");
  replay->add_option("--config", replay_config, "Setup the trajectory was recorded with (default: bundled)");
  replay->add_flag("--validate", validate, "Run the replay checks first");
  replay->add_option("--speed", speed, "Playback speed factor")->check(CLI::PositiveNumber)->capture_default_str();
  replay->add_flag("--force", force, "Replay even when validation fails");

  std::string cal_config;
  std::size_t samples = 0;
  std::uint64_t seed = 1;
  auto* calibrate = app.add_subcommand("calibrate", "Suggest singularity thresholds from random configurations");
  calibrate->add_option("--config", cal_config, "Model document or session config")->required();
  calibrate->add_option("--samples", samples, "Number of random configurations")->required()->check(
      CLI::PositiveNumber);
  calibrate->add_option("--seed", seed, "Random seed")->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  if (serve->parsed()) return cmd_serve(config_path, bind, feedback);
  if (synth->parsed()) return cmd_synth(script, out, connect);
  if (replay->parsed()) return cmd_replay(traj_path, replay_connect, replay_config, validate, speed, force);
  if (calibrate->parsed()) return cmd_calibrate(cal_config, samples, seed);
  return 0;
}
