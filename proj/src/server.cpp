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
#include <atomic>
#include <condition_variable>
#include <csignal>
#include <cstdio>
#include <deque>
#include <mutex>
#include <set>
#include <thread>

#include <boost/asio.hpp>
#include <boost/asio/signal_set.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>

#include "twinarm/control.hpp"
#include "twinarm/error.hpp"
#include "twinarm/net.hpp"
#include "twinarm/replay.hpp"

namespace twinarm {

namespace net = boost::asio;
namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
using tcp = net::ip::tcp;
using Clock = std::chrono::steady_clock;

Endpoint parse_endpoint(std::string_view text) {
  const auto colon = text.rfind(':');
  if (colon == std::string_view::npos) {
    throw Error(ErrorCode::invalid_argument, "address '" + std::string(text) + "' must be HOST:PORT");
  }
  std::string host(text.substr(0, colon));
  const std::string port(text.substr(colon + 1));
  if (host.size() >= 2 && host.front() == '[' && host.back() == ']') host = host.substr(1, host.size() - 2);
  if (host.empty()) host = "127.0.0.1";
  unsigned long value = 0;
  std::size_t used = 0;
  try {
    value = std::stoul(port, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (port.empty() || used != port.size() || value > 65535) {
    throw Error(ErrorCode::invalid_argument, "invalid port in address '" + std::string(text) + "'");
  }
  return {host, static_cast<std::uint16_t>(value)};
}

namespace {

std::string model_catalog(const ArmSetup& setup, const nlohmann::json& args) {
  if (args.contains("arm")) {
    if (!args["arm"].is_string()) throw Error(ErrorCode::invalid_argument, "arm must be a string");
    const auto name = args["arm"].get<std::string>();
    const ArmConfig* arm = setup.find(name);
    if (!arm) throw Error(ErrorCode::invalid_argument, "unknown arm '" + name + "'");
    return arm->model.canonical_document;
  }
  nlohmann::ordered_json arms = nlohmann::ordered_json::array();
  for (const ArmConfig& arm : setup.arms) {
    nlohmann::ordered_json entry;
    entry["name"] = arm.arm_name;
    const Pose& b = arm.base_pose;
    entry["base"] = {{"p", {b.position.x(), b.position.y(), b.position.z()}},
                     {"q", {b.orientation.w(), b.orientation.x(), b.orientation.y(), b.orientation.z()}}};
    entry["model_hash"] = arm.model.model_hash;
    entry["model"] = nlohmann::ordered_json::parse(arm.model.canonical_document);
    arms.push_back(std::move(entry));
  }
  nlohmann::ordered_json out;
  out["arms"] = std::move(arms);
  return out.dump();
}

}  // namespace

struct Server::Impl {
  class Connection;

  struct ControlRequest {
    std::weak_ptr<Connection> origin;
    std::uint64_t seq = 0;
    enum class Kind { control, new_hand_source, send_state };
    Kind kind = Kind::control;
    wire::ControlBody body;
  };

  SessionConfig config;
  ServerOptions options;
  net::io_context ioc{1};
  tcp::acceptor acceptor{ioc};
  std::uint16_t bound_port = 0;
  std::thread io_thread;
  std::thread session_thread;
  std::atomic<bool> running{false};
  std::atomic<std::uint64_t> out_seq{0};

  std::mutex conn_mutex;
  std::set<std::shared_ptr<Connection>> connections;
  Connection* hand_source = nullptr;

  std::mutex inbox_mutex;
  std::condition_variable inbox_cv;
  std::optional<std::pair<wire::Envelope, Clock::time_point>> pending_frame;
  std::deque<ControlRequest> controls;
  bool stopping = false;

  mutable std::mutex stats_mutex;
  ServerStats stats;

  Impl(SessionConfig c, ServerOptions o) : config(std::move(c)), options(std::move(o)) {
    if (options.feedback_override) config.feedback_mode = *options.feedback_override;
    config.validate();
  }

  void log(const std::string& line) const {
    if (options.log) std::fprintf(stderr, "[serve] %s\n", line.c_str());
  }

  std::uint64_t next_seq() { return ++out_seq; }

  std::int64_t now_ns() const {
    return std::chrono::duration_cast<std::chrono::nanoseconds>(Clock::now().time_since_epoch()).count();
  }

  std::shared_ptr<const std::string> encode_ack(std::uint64_t for_seq, bool ok, std::string message) {
    return std::make_shared<const std::string>(
        wire::encode_message({next_seq(), now_ns(), wire::AckBody{for_seq, ok, std::move(message)}}));
  }

  // -- connections ----------------------------------------------------------

  class Connection : public std::enable_shared_from_this<Connection> {
   public:
    Connection(Impl& server, tcp::socket socket) : server_(server), ws_(std::move(socket)) {}

    void run() {
      net::dispatch(ws_.get_executor(), [self = shared_from_this()] { self->read_request(); });
    }

    /// Safe from any thread.
    void send(std::shared_ptr<const std::string> bytes, bool close_after = false) {
      net::post(ws_.get_executor(), [self = shared_from_this(), bytes = std::move(bytes), close_after] {
        if (self->closing_) return;
        // A slow viewer loses robot_state frames instead of growing without bound.
        if (self->queue_.size() > 256 && !close_after) return;
        self->queue_.push_back(std::move(bytes));
        if (close_after) self->closing_ = true;
        if (!self->writing_) self->write_next();
      });
    }

    void close_now() {
      net::post(ws_.get_executor(), [self = shared_from_this()] {
        beast::error_code ec;
        beast::get_lowest_layer(self->ws_).socket().close(ec);
      });
    }

    bool helloed() const { return role_.has_value(); }

   private:
    void read_request() {
      http::async_read(beast::get_lowest_layer(ws_), buffer_, request_,
                       [self = shared_from_this()](beast::error_code ec, std::size_t) { self->on_request(ec); });
    }

    void on_request(beast::error_code ec) {
      if (ec) return;
      if (!websocket::is_upgrade(request_) || request_.target() != "/ws") {
        auto res = std::make_shared<http::response<http::string_body>>(http::status::not_found, request_.version());
        res->set(http::field::content_type, "text/plain");
        res->body() = "websocket endpoint is /ws\n";
        res->keep_alive(false);
        res->prepare_payload();
        http::async_write(beast::get_lowest_layer(ws_), *res,
                          [self = shared_from_this(), res](beast::error_code, std::size_t) {
                            beast::error_code ignored;
                            beast::get_lowest_layer(self->ws_).socket().shutdown(tcp::socket::shutdown_send, ignored);
                          });
        return;
      }
      ws_.set_option(websocket::stream_base::timeout::suggested(beast::role_type::server));
      ws_.async_accept(request_, [self = shared_from_this()](beast::error_code ec) { self->on_accept(ec); });
    }

    void on_accept(beast::error_code ec) {
      if (ec) return;
      ws_.text(true);
      {
        std::lock_guard lock(server_.conn_mutex);
        server_.connections.insert(shared_from_this());
      }
      read_next();
    }

    void read_next() {
      ws_.async_read(buffer_, [self = shared_from_this()](beast::error_code ec, std::size_t) { self->on_read(ec); });
    }

    void on_read(beast::error_code ec) {
      if (ec) {
        disconnect();
        return;
      }
      const auto arrived = Clock::now();
      std::string bytes = beast::buffers_to_string(buffer_.data());
      buffer_.consume(buffer_.size());
      handle(bytes, arrived);
      if (!closing_) read_next();
    }

    void violation(std::uint64_t seq, const std::string& message) {
      server_.log("closing connection: " + message);
      send(server_.encode_ack(seq, false, message), true);
    }

    void handle(const std::string& bytes, Clock::time_point arrived) {
      wire::Envelope msg;
      try {
        msg = wire::decode_message(bytes);
      } catch (const Error& e) {
        violation(0, e.what());
        return;
      }
      const std::string_view type = msg.type();
      if (!role_) {
        auto* hello = std::get_if<wire::HelloBody>(&msg.payload);
        if (!hello) {
          violation(msg.seq, "first message must be hello, got " + std::string(type));
          return;
        }
        if (hello->role == wire::Role::hand_source) {
          std::lock_guard lock(server_.conn_mutex);
          if (server_.hand_source != nullptr) {
            violation(msg.seq, "a hand_source is already connected");
            return;
          }
          server_.hand_source = this;
        }
        role_ = hello->role;
        send(server_.encode_ack(msg.seq, true, "hello " + std::string(wire::role_name(*role_))));
        if (*role_ == wire::Role::hand_source) {
          server_.push_control({weak_from_this(), msg.seq, ControlRequest::Kind::new_hand_source, {}});
        } else {
          server_.push_control({weak_from_this(), msg.seq, ControlRequest::Kind::send_state, {}});
        }
        return;
      }
      if (auto* frame = std::get_if<wire::HandFrameBody>(&msg.payload)) {
        if (*role_ != wire::Role::hand_source) {
          violation(msg.seq, "hand_frame from a " + std::string(wire::role_name(*role_)) + " connection");
          return;
        }
        (void)frame;
        server_.push_frame(std::move(msg), arrived);
        return;
      }
      if (auto* control = std::get_if<wire::ControlBody>(&msg.payload)) {
        server_.push_control({weak_from_this(), msg.seq, ControlRequest::Kind::control, std::move(*control)});
        return;
      }
      violation(msg.seq, std::string(type) + " is not accepted from clients");
    }

    void write_next() {
      writing_ = true;
      ws_.async_write(net::buffer(*queue_.front()),
                      [self = shared_from_this()](beast::error_code ec, std::size_t) { self->on_write(ec); });
    }

    void on_write(beast::error_code ec) {
      queue_.pop_front();
      if (ec) {
        writing_ = false;
        disconnect();
        return;
      }
      if (!queue_.empty()) {
        write_next();
        return;
      }
      writing_ = false;
      if (closing_) {
        ws_.async_close(websocket::close_code::policy_error,
                        [self = shared_from_this()](beast::error_code) { self->disconnect(); });
      }
    }

    void disconnect() {
      std::lock_guard lock(server_.conn_mutex);
      if (server_.hand_source == this) server_.hand_source = nullptr;
      server_.connections.erase(shared_from_this());
    }

    Impl& server_;
    websocket::stream<beast::tcp_stream> ws_;
    beast::flat_buffer buffer_;
    http::request<http::string_body> request_;
    std::deque<std::shared_ptr<const std::string>> queue_;
    bool writing_ = false;
    bool closing_ = false;
    std::optional<wire::Role> role_;
  };

  void accept_next() {
    acceptor.async_accept(net::make_strand(ioc), [this](beast::error_code ec, tcp::socket socket) {
      if (ec) {
        if (ec != net::error::operation_aborted) log("accept failed: " + ec.message());
        if (!acceptor.is_open()) return;
      } else {
        std::make_shared<Connection>(*this, std::move(socket))->run();
      }
      accept_next();
    });
  }

  void push_frame(wire::Envelope msg, Clock::time_point arrived) {
    {
      std::lock_guard lock(inbox_mutex);
      pending_frame.emplace(std::move(msg), arrived);
    }
    inbox_cv.notify_one();
  }

  void push_control(ControlRequest request) {
    {
      std::lock_guard lock(inbox_mutex);
      controls.push_back(std::move(request));
    }
    inbox_cv.notify_one();
  }

  void broadcast(const std::shared_ptr<const std::string>& bytes) {
    std::vector<std::shared_ptr<Connection>> targets;
    {
      std::lock_guard lock(conn_mutex);
      for (const auto& c : connections) {
        if (c->helloed()) targets.push_back(c);
      }
    }
    for (const auto& c : targets) c->send(bytes);
  }

  std::shared_ptr<const std::string> encode_state(const Session& session, const std::vector<ArmSample>& arms,
                                                  std::int64_t t_ns) {
    const auto body = wire::make_robot_state(config.setup, arms,
                                             session.recording_state() == RecordingState::recording,
                                             session.feedback_mode());
    return std::make_shared<const std::string>(wire::encode_message({next_seq(), t_ns, body}));
  }

  void save(const Trajectory& trajectory) {
    if (!options.save_recordings) return;
    try {
      const auto path = save_trajectory(trajectory, config.storage_dir);
      log("saved " + path.string() + " (" + std::to_string(trajectory.samples.size()) + " samples)");
      std::lock_guard lock(stats_mutex);
      stats.saved_files.push_back(path);
    } catch (const Error& e) {
      log(std::string("could not save trajectory: ") + e.what());
    }
  }

  void handle_events(const std::vector<RecordingEvent>& events) {
    for (const RecordingEvent& e : events) {
      switch (e.kind) {
        case RecordingEvent::Kind::armed: log("recording armed"); break;
        case RecordingEvent::Kind::started: log("recording started"); break;
        case RecordingEvent::Kind::stopped:
          log("recording stopped");
          if (e.trajectory) save(*e.trajectory);
          break;
      }
    }
  }

  class BroadcastObserver : public ReplayObserver {
   public:
    BroadcastObserver(Impl& server, Session& session) : server_(server), session_(session) {}
    void on_frame(const ReplayFrame& frame) override {
      std::vector<ArmSample> arms = frame.sample->arms;
      for (std::size_t i = 0; i < arms.size() && i < frame.measured_q.size(); ++i) arms[i].q_cmd = frame.measured_q[i];
      server_.broadcast(server_.encode_state(session_, arms, frame.sample->t_ns));
    }

   private:
    Impl& server_;
    Session& session_;
  };

  /// Returns {ok, message}; `state_changed` asks for a robot_state broadcast.
  std::pair<bool, std::string> run_control(Session& session, const wire::ControlBody& c, bool& state_changed) {
    const nlohmann::json& args = c.args;
    if (c.cmd == "get_model") return {true, model_catalog(config.setup, args)};
    if (c.cmd == "replay") {
      if (!args.contains("trajectory") || !args["trajectory"].is_string()) {
        throw Error(ErrorCode::invalid_argument, "trajectory text is required");
      }
      const Trajectory trajectory = parse_trajectory(args["trajectory"].get<std::string>());
      check_against_setup(trajectory, config.setup);
      ReplayOptions ro;
      if (args.contains("speed")) {
        if (!args["speed"].is_number()) throw Error(ErrorCode::invalid_argument, "speed must be a number");
        ro.speed_scale = args["speed"].get<double>();
      }
      KinematicSimSink sink;
      BroadcastObserver observer(*this, session);
      return {true, fidelity_json(replay_in_sim(trajectory, config.setup, sink, &observer, ro))};
    }
    ControlOutcome out = apply_control(session, c.cmd, args);
    handle_events(out.events);
    state_changed = state_changed || out.state_changed;
    return {out.ok, std::move(out.message)};
  }

  void session_loop() {
    Session session(config);
    while (true) {
      std::deque<ControlRequest> batch;
      std::optional<std::pair<wire::Envelope, Clock::time_point>> frame;
      {
        std::unique_lock lock(inbox_mutex);
        inbox_cv.wait(lock, [&] { return stopping || pending_frame || !controls.empty(); });
        if (stopping) return;
        batch.swap(controls);
        frame.swap(pending_frame);
      }
      bool state_changed = false;
      for (ControlRequest& req : batch) {
        auto origin = req.origin.lock();
        if (req.kind == ControlRequest::Kind::new_hand_source) {
          session.reset_stream();
          continue;
        }
        if (req.kind == ControlRequest::Kind::send_state) {
          if (origin) origin->send(encode_state(session, session.current(), now_ns()));
          continue;
        }
        std::pair<bool, std::string> reply;
        try {
          reply = run_control(session, req.body, state_changed);
        } catch (const std::exception& e) {
          reply = {false, e.what()};
        }
        if (origin) origin->send(encode_ack(req.seq, reply.first, std::move(reply.second)));
      }
      if (frame) {
        const auto start = Clock::now();
        const wire::Envelope& env = frame->first;
        const auto& body = std::get<wire::HandFrameBody>(env.payload);
        TickOutput out;
        try {
          out = session.tick(wire::to_hand_frame(body, env.seq, env.t_ns));
        } catch (const std::exception& e) {
          log(std::string("frame rejected: ") + e.what());
          continue;
        }
        if (out.accepted) {
          handle_events(out.events);
          std::vector<ArmSample> arms;
          arms.reserve(out.arms.size());
          for (const ArmTick& a : out.arms) arms.push_back(a.sample);
          auto bytes = encode_state(session, arms, out.t_ns);
          const auto done = Clock::now();
          broadcast(bytes);
          std::lock_guard lock(stats_mutex);
          ++stats.ticks;
          stats.tick_seconds.push_back(std::chrono::duration<double>(done - start).count());
          stats.loop_seconds.push_back(std::chrono::duration<double>(done - frame->second).count());
          state_changed = false;
        }
        std::lock_guard lock(stats_mutex);
        stats.dropped_frames = session.dropped_frames();
      }
      if (state_changed) broadcast(encode_state(session, session.current(), now_ns()));
    }
  }

  void start() {
    if (running) return;
    beast::error_code ec;
    const auto address = net::ip::make_address(options.bind.host, ec);
    if (ec) throw Error(ErrorCode::bind, "invalid bind address '" + options.bind.host + "': " + ec.message());
    const tcp::endpoint endpoint(address, options.bind.port);
    acceptor.open(endpoint.protocol(), ec);
    if (!ec) acceptor.set_option(net::socket_base::reuse_address(true), ec);
    if (!ec) acceptor.bind(endpoint, ec);
    if (!ec) acceptor.listen(net::socket_base::max_listen_connections, ec);
    if (ec) {
      beast::error_code ignored;
      acceptor.close(ignored);
      throw Error(ErrorCode::bind, "cannot bind " + options.bind.host + ":" + std::to_string(options.bind.port) +
                                       ": " + ec.message());
    }
    bound_port = acceptor.local_endpoint().port();
    running = true;
    accept_next();
    io_thread = std::thread([this] { ioc.run(); });
    session_thread = std::thread([this] { session_loop(); });
    log("listening on ws://" + options.bind.host + ":" + std::to_string(bound_port) + "/ws");
  }

  std::mutex wait_mutex;
  std::condition_variable wait_cv;
  bool stop_requested = false;
  std::optional<net::signal_set> signals;

  void request_stop() {
    {
      std::lock_guard lock(wait_mutex);
      stop_requested = true;
    }
    wait_cv.notify_all();
  }

  void stop() {
    request_stop();
    if (!running.exchange(false)) return;
    {
      std::lock_guard lock(inbox_mutex);
      stopping = true;
    }
    inbox_cv.notify_all();
    if (session_thread.joinable()) session_thread.join();
    net::post(ioc, [this] {
      beast::error_code ignored;
      acceptor.close(ignored);
      std::lock_guard lock(conn_mutex);
      for (const auto& c : connections) c->close_now();
    });
    // Let the closes run, then drop whatever is still pending.
    std::this_thread::sleep_for(std::chrono::milliseconds(20));
    ioc.stop();
    if (io_thread.joinable()) io_thread.join();
    std::lock_guard lock(conn_mutex);
    connections.clear();
    hand_source = nullptr;
  }
};

Server::Server(SessionConfig config, ServerOptions options)
    : impl_(std::make_unique<Impl>(std::move(config), std::move(options))) {}

Server::~Server() { impl_->stop(); }

void Server::start() { impl_->start(); }
std::uint16_t Server::port() const { return impl_->bound_port; }
void Server::stop() { impl_->stop(); }

void Server::run() {
  start();
  impl_->signals.emplace(impl_->ioc, SIGINT, SIGTERM);
  impl_->signals->async_wait([impl = impl_.get()](beast::error_code ec, int) {
    if (!ec) impl->request_stop();
  });
  {
    std::unique_lock lock(impl_->wait_mutex);
    impl_->wait_cv.wait(lock, [&] { return impl_->stop_requested; });
  }
  stop();
}

ServerStats Server::stats() const {
  std::lock_guard lock(impl_->stats_mutex);
  return impl_->stats;
}

}  // namespace twinarm
