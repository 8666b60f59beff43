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

#include <condition_variable>
#include <deque>
#include <future>
#include <mutex>
#include <thread>

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/websocket.hpp>

#include "twinarm/error.hpp"
#include "twinarm/net.hpp"

namespace twinarm {

namespace net = boost::asio;
namespace beast = boost::beast;
namespace websocket = beast::websocket;
using tcp = net::ip::tcp;

struct WsClient::Impl {
  net::io_context ioc{1};
  std::optional<websocket::stream<beast::tcp_stream>> ws;
  beast::flat_buffer buffer;
  std::thread io_thread;
  std::deque<std::string> outbox;
  bool writing = false;

  std::mutex mutex;
  std::condition_variable cv;
  std::deque<std::string> inbox;
  bool open = false;
  std::uint64_t seq = 0;

  void read_next() {
    ws->async_read(buffer, [this](beast::error_code ec, std::size_t) {
      if (ec) {
        mark_closed();
        return;
      }
      {
        std::lock_guard lock(mutex);
        inbox.push_back(beast::buffers_to_string(buffer.data()));
      }
      buffer.consume(buffer.size());
      cv.notify_all();
      read_next();
    });
  }

  void mark_closed() {
    {
      std::lock_guard lock(mutex);
      open = false;
    }
    cv.notify_all();
  }

  void write_next() {
    writing = true;
    ws->async_write(net::buffer(outbox.front()), [this](beast::error_code ec, std::size_t) {
      outbox.pop_front();
      if (ec) {
        writing = false;
        outbox.clear();
        mark_closed();
        return;
      }
      if (outbox.empty()) {
        writing = false;
      } else {
        write_next();
      }
    });
  }

  void shutdown() {
    if (io_thread.joinable()) {
      net::post(ioc, [this] {
        if (!ws) return;
        auto& socket = beast::get_lowest_layer(*ws).socket();
        if (socket.is_open() && ws->is_open()) {
          beast::get_lowest_layer(*ws).expires_after(std::chrono::milliseconds(500));
          ws->async_close(websocket::close_code::normal, [this](beast::error_code) {
            beast::error_code ignored;
            beast::get_lowest_layer(*ws).socket().close(ignored);
          });
        } else {
          beast::error_code ignored;
          socket.close(ignored);
        }
      });
      // Drain pending writes and the close handshake; bounded by the expiry above.
      std::promise<void> joined;
      std::thread waiter([this, done = joined.get_future()] {
        if (done.wait_for(std::chrono::milliseconds(600)) == std::future_status::timeout) ioc.stop();
      });
      io_thread.join();
      joined.set_value();
      waiter.join();
    }
    mark_closed();
  }
};

WsClient::WsClient() : impl_(std::make_unique<Impl>()) {}
WsClient::~WsClient() { close(); }

void WsClient::connect(const Endpoint& endpoint, std::string_view target) {
  if (impl_->io_thread.joinable()) throw Error(ErrorCode::invalid_argument, "client is already connected");
  Impl& s = *impl_;
  const std::string where = endpoint.host + ":" + std::to_string(endpoint.port);
  try {
    tcp::resolver resolver(s.ioc);
    const auto results = resolver.resolve(endpoint.host, std::to_string(endpoint.port));
    s.ws.emplace(s.ioc);
    beast::get_lowest_layer(*s.ws).expires_after(std::chrono::seconds(5));
    beast::get_lowest_layer(*s.ws).connect(results);
    s.ws->handshake(endpoint.host, std::string(target));
    beast::get_lowest_layer(*s.ws).expires_never();
    s.ws->text(true);
  } catch (const boost::system::system_error& e) {
    s.ws.reset();
    throw Error(ErrorCode::io, "cannot connect to " + where + ": " + e.code().message());
  }
  s.open = true;
  s.read_next();
  s.io_thread = std::thread([&s] { s.ioc.run(); });
}

void WsClient::close() {
  // Let the io thread exit once everything in flight has finished.
  impl_->shutdown();
}

bool WsClient::is_open() const {
  std::lock_guard lock(impl_->mutex);
  return impl_->open;
}

void WsClient::send_raw(std::string bytes) {
  if (!impl_->io_thread.joinable()) throw Error(ErrorCode::io, "client is not connected");
  net::post(impl_->ioc, [s = impl_.get(), bytes = std::move(bytes)]() mutable {
    s->outbox.push_back(std::move(bytes));
    if (!s->writing) s->write_next();
  });
}

std::uint64_t WsClient::next_seq() {
  std::lock_guard lock(impl_->mutex);
  return ++impl_->seq;
}

std::uint64_t WsClient::send(wire::Payload payload, std::optional<std::int64_t> t_ns, std::uint64_t seq) {
  if (seq == 0) seq = next_seq();
  if (!t_ns) {
    t_ns = std::chrono::duration_cast<std::chrono::nanoseconds>(
               std::chrono::steady_clock::now().time_since_epoch())
               .count();
  }
  send_raw(wire::encode_message({seq, *t_ns, std::move(payload)}));
  return seq;
}

std::optional<std::string> WsClient::receive_raw(std::chrono::milliseconds timeout) {
  std::unique_lock lock(impl_->mutex);
  impl_->cv.wait_for(lock, timeout, [&] { return !impl_->inbox.empty() || !impl_->open; });
  if (impl_->inbox.empty()) return std::nullopt;
  std::string bytes = std::move(impl_->inbox.front());
  impl_->inbox.pop_front();
  return bytes;
}

std::optional<wire::Envelope> WsClient::receive(std::chrono::milliseconds timeout) {
  auto bytes = receive_raw(timeout);
  if (!bytes) return std::nullopt;
  return wire::decode_message(*bytes);
}

std::optional<wire::AckBody> WsClient::wait_ack(std::uint64_t for_seq, std::chrono::milliseconds timeout) {
  const auto deadline = std::chrono::steady_clock::now() + timeout;
  std::unique_lock lock(impl_->mutex);
  std::size_t scanned = 0;
  while (true) {
    auto& inbox = impl_->inbox;
    for (; scanned < inbox.size(); ++scanned) {
      // Cheap prefilter; robot_state dominates the stream.
      if (inbox[scanned].compare(0, 13, "{\"type\":\"ack\"") != 0) continue;
      wire::Envelope env = wire::decode_message(inbox[scanned]);
      const auto& ack = std::get<wire::AckBody>(env.payload);
      if (ack.for_seq != for_seq) continue;
      wire::AckBody out = ack;
      inbox.erase(inbox.begin() + static_cast<std::ptrdiff_t>(scanned));
      return out;
    }
    if (!impl_->open) return std::nullopt;
    if (impl_->cv.wait_until(lock, deadline) == std::cv_status::timeout && scanned == inbox.size()) {
      return std::nullopt;
    }
  }
}

wire::AckBody WsClient::hello(wire::Role role, std::chrono::milliseconds timeout) {
  const auto seq = send(wire::HelloBody{role, wire::kProtocolVersion});
  auto ack = wait_ack(seq, timeout);
  if (!ack) throw Error(ErrorCode::io, "no reply to hello");
  return *ack;
}

wire::AckBody WsClient::request(std::string cmd, nlohmann::json args, std::chrono::milliseconds timeout) {
  const auto seq = send(wire::ControlBody{std::move(cmd), std::move(args)});
  auto ack = wait_ack(seq, timeout);
  if (!ack) throw Error(ErrorCode::io, "no reply to control request");
  return *ack;
}

}  // namespace twinarm
