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

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "twinarm/session.hpp"
#include "twinarm/wire.hpp"

namespace twinarm {

struct Endpoint {
  std::string host = "127.0.0.1";
  std::uint16_t port = 8765;
};

/// "host:port", "[v6]:port" or ":port". Throws Error(invalid_argument).
Endpoint parse_endpoint(std::string_view text);

struct ServerOptions {
  Endpoint bind;
  /// Replaces the config's feedback mode at startup.
  std::optional<FeedbackMode> feedback_override;
  /// Write finished trajectories to the config's storage_dir.
  bool save_recordings = true;
  bool log = true;
};

struct ServerStats {
  std::size_t ticks = 0;
  std::size_t dropped_frames = 0;
  /// session tick + robot_state encode, seconds, one entry per accepted frame.
  std::vector<double> tick_seconds;
  /// hand_frame arrival on the socket to robot_state hand-off, seconds.
  std::vector<double> loop_seconds;
  std::vector<std::filesystem::path> saved_files;
};

/// Websocket server at path /ws in front of one Session. One io thread runs
/// every connection; one session thread owns the Session and consumes the
/// latest hand frame plus a FIFO of control requests.
class Server {
 public:
  Server(SessionConfig config, ServerOptions options);
  ~Server();
  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  /// Binds and starts the worker threads. Throws Error(bind).
  void start();
  /// Port actually bound (useful with port 0).
  std::uint16_t port() const;
  /// Starts if needed and blocks until stop() or SIGINT/SIGTERM.
  void run();
  void stop();
  ServerStats stats() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Minimal websocket client for the wire protocol.
class WsClient {
 public:
  WsClient();
  ~WsClient();
  WsClient(const WsClient&) = delete;
  WsClient& operator=(const WsClient&) = delete;

  /// Throws Error(io) when the connection or handshake fails.
  void connect(const Endpoint& endpoint, std::string_view target = "/ws");
  void close();
  bool is_open() const;

  void send_raw(std::string bytes);
  /// Stamps seq (next_seq()) when zero and t_ns (steady clock) when absent, then sends.
  std::uint64_t send(wire::Payload payload, std::optional<std::int64_t> t_ns = std::nullopt, std::uint64_t seq = 0);
  std::uint64_t next_seq();

  /// Next queued message; nullopt on timeout or once closed and drained.
  std::optional<std::string> receive_raw(std::chrono::milliseconds timeout);
  std::optional<wire::Envelope> receive(std::chrono::milliseconds timeout);
  /// Waits for the ack answering `for_seq`, leaving other messages queued.
  std::optional<wire::AckBody> wait_ack(std::uint64_t for_seq, std::chrono::milliseconds timeout);

  /// hello + wait for its ack.
  wire::AckBody hello(wire::Role role, std::chrono::milliseconds timeout = std::chrono::seconds(5));
  /// control + wait for its ack. Throws Error(io) on timeout.
  wire::AckBody request(std::string cmd, nlohmann::json args = nlohmann::json::object(),
                        std::chrono::milliseconds timeout = std::chrono::seconds(10));

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace twinarm
