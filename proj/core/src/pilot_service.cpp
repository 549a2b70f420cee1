#include "exogait/pilot_service.hpp"

#include <arpa/inet.h>
#include <fcntl.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <cmath>
#include <cstring>
#include <stdexcept>

#include "exogait/errors.hpp"

namespace exogait {

namespace {

constexpr int kPollMs = 5;
constexpr std::size_t kMaxLine = 64 * 1024;

void set_nonblocking(int fd) {
  const int flags = ::fcntl(fd, F_GETFL, 0);
  ::fcntl(fd, F_SETFL, flags | O_NONBLOCK);
}

std::string errno_text() { return std::strerror(errno); }

}  // namespace

struct PilotService::Session {
  std::uint64_t id = 0;
  int fd = -1;
  Role role = Role::Observer;
  std::thread thread;
  std::atomic<bool> done{false};

  std::mutex out_mutex;
  std::deque<std::string> out;  // complete lines, newline included
  std::size_t queued_frames = 0;
};

std::pair<std::string, std::uint16_t> split_address(const std::string& address) {
  const auto colon = address.rfind(':');
  if (colon == std::string::npos) throw BindFailure("address '" + address + "' lacks a port");
  std::string host = address.substr(0, colon);
  const std::string port_text = address.substr(colon + 1);
  if (host.size() >= 2 && host.front() == '[' && host.back() == ']') {
    host = host.substr(1, host.size() - 2);
  }
  if (host.empty()) host = "0.0.0.0";
  char* end = nullptr;
  const long port = std::strtol(port_text.c_str(), &end, 10);
  if (port_text.empty() || *end != '\0' || port < 0 || port > 65535) {
    throw BindFailure("bad port in '" + address + "'");
  }
  return {host, static_cast<std::uint16_t>(port)};
}

PilotService::PilotService(StepEngine engine, ServiceConfig config)
    : engine_(std::move(engine)), config_(std::move(config)) {
  if (!(config_.rate_hz > 0.0)) throw std::invalid_argument("stream rate must be positive");
  if (!(config_.time_scale > 0.0)) throw std::invalid_argument("time scale must be positive");
  latest_ = engine_.state();
}

PilotService::~PilotService() { stop(); }

void PilotService::start() {
  if (running_) return;
  const auto [host, port] = split_address(config_.bind);

  addrinfo hints{};
  hints.ai_family = AF_UNSPEC;
  hints.ai_socktype = SOCK_STREAM;
  hints.ai_flags = AI_PASSIVE | AI_NUMERICSERV;
  addrinfo* found = nullptr;
  const std::string service = std::to_string(port);
  if (const int rc = ::getaddrinfo(host.c_str(), service.c_str(), &hints, &found); rc != 0) {
    throw BindFailure("cannot resolve '" + host + "': " + ::gai_strerror(rc));
  }
  std::string last_error = "no usable address";
  for (addrinfo* ai = found; ai; ai = ai->ai_next) {
    const int fd = ::socket(ai->ai_family, ai->ai_socktype, ai->ai_protocol);
    if (fd < 0) {
      last_error = errno_text();
      continue;
    }
    const int one = 1;
    ::setsockopt(fd, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
    if (::bind(fd, ai->ai_addr, ai->ai_addrlen) == 0 && ::listen(fd, 8) == 0) {
      listen_fd_ = fd;
      break;
    }
    last_error = errno_text();
    ::close(fd);
  }
  ::freeaddrinfo(found);
  if (listen_fd_ < 0) throw BindFailure("cannot bind " + config_.bind + ": " + last_error);

  sockaddr_storage addr{};
  socklen_t len = sizeof addr;
  ::getsockname(listen_fd_, reinterpret_cast<sockaddr*>(&addr), &len);
  port_ = addr.ss_family == AF_INET6
              ? ntohs(reinterpret_cast<sockaddr_in6*>(&addr)->sin6_port)
              : ntohs(reinterpret_cast<sockaddr_in*>(&addr)->sin_port);
  set_nonblocking(listen_fd_);

  running_ = true;
  engine_thread_ = std::thread([this] { engine_loop(); });
  accept_thread_ = std::thread([this] { accept_loop(); });
}

void PilotService::stop() {
  if (!running_.exchange(false)) return;
  if (accept_thread_.joinable()) accept_thread_.join();
  if (engine_thread_.joinable()) engine_thread_.join();
  std::map<std::uint64_t, std::shared_ptr<Session>> sessions;
  {
    std::lock_guard lock(sessions_mutex_);
    sessions.swap(sessions_);
    controller_.reset();
  }
  for (auto& [id, s] : sessions) {
    if (s->thread.joinable()) s->thread.join();
  }
  if (listen_fd_ >= 0) ::close(listen_fd_);
  listen_fd_ = -1;
}

EngineState PilotService::snapshot() const {
  std::lock_guard lock(sessions_mutex_);
  return latest_;
}

ServiceStats PilotService::stats() const {
  std::lock_guard lock(sessions_mutex_);
  return stats_;
}

void PilotService::engine_loop() {
  using clock = std::chrono::steady_clock;
  const double dt = engine_.dt();
  const auto period = std::chrono::duration_cast<clock::duration>(
      std::chrono::duration<double>(dt / config_.time_scale));
  const auto decimation = std::max<std::uint64_t>(
      1, static_cast<std::uint64_t>(std::llround(1.0 / (config_.rate_hz * dt))));
  auto next = clock::now();

  while (running_) {
    std::deque<QueuedCommand> batch;
    {
      std::lock_guard lock(command_mutex_);
      batch.swap(commands_);
    }
    for (const auto& qc : batch) apply(qc);

    std::string frame;
    try {
      const EngineState& s = engine_.tick();
      if (s.tick % decimation == 0) frame = encode_state(s);
      std::lock_guard lock(sessions_mutex_);
      latest_ = s;
    } catch (const Error& e) {
      broadcast(encode_error("planning_failed", e.what()));
      std::lock_guard lock(sessions_mutex_);
      latest_ = engine_.state();
    }
    if (!frame.empty()) broadcast(frame);

    next += period;
    const auto now = clock::now();
    if (next < now) {
      next = now;  // fell behind; do not try to catch up in a burst
    } else {
      std::this_thread::sleep_until(next);
    }
  }
}

void PilotService::apply(const QueuedCommand& qc) {
  {
    std::lock_guard lock(sessions_mutex_);
    ++stats_.commands_applied;
  }
  if (const auto* t = std::get_if<TriggerCommand>(&qc.command)) {
    const EngineState& s = engine_.state();
    TriggerAck ack;
    ack.accepted = engine_.trigger();
    ack.id = t->id;
    ack.phase = s.phase;
    ack.remaining = s.step_duration - s.step_elapsed;
    send(qc.session, encode_trigger_ack(ack), false);
    return;
  }
  try {
    if (const auto* b = std::get_if<BehaviorCommand>(&qc.command)) {
      if (b->reorient) engine_.reorient_for_descent();
      engine_.select_behavior(b->behavior);
    } else if (const auto* p = std::get_if<ParamsCommand>(&qc.command)) {
      engine_.use_parameters(p->name);
    }
    send(qc.session, encode_state(engine_.state()), false);
  } catch (const BehaviorChangeWhileMoving& e) {
    send(qc.session, encode_error("behavior_change_while_moving", e.what()), false);
  } catch (const IncompatibleBehaviorTransition& e) {
    send(qc.session, encode_error("incompatible_behavior", e.what()), false);
  } catch (const std::out_of_range& e) {
    send(qc.session, encode_error("unknown_params", e.what()), false);
  } catch (const Error& e) {
    send(qc.session, encode_error("planning_failed", e.what()), false);
  }
}

void PilotService::send(std::uint64_t id, std::string message, bool droppable) {
  std::shared_ptr<Session> s;
  {
    std::lock_guard lock(sessions_mutex_);
    const auto it = sessions_.find(id);
    if (it == sessions_.end()) return;
    s = it->second;
  }
  message.push_back('\n');
  std::lock_guard lock(s->out_mutex);
  if (droppable) {
    if (s->queued_frames >= config_.max_queued_frames) {
      std::lock_guard stats_lock(sessions_mutex_);
      ++stats_.frames_dropped;
      return;
    }
    ++s->queued_frames;
  }
  s->out.push_back(std::move(message));
}

void PilotService::broadcast(const std::string& message) {
  std::vector<std::uint64_t> ids;
  {
    std::lock_guard lock(sessions_mutex_);
    for (const auto& [id, s] : sessions_) ids.push_back(id);
  }
  for (auto id : ids) send(id, message, true);
}

void PilotService::accept_loop() {
  while (running_) {
    pollfd pfd{listen_fd_, POLLIN, 0};
    if (::poll(&pfd, 1, 20) <= 0) {
      reap_finished();
      continue;
    }
    const int fd = ::accept(listen_fd_, nullptr, nullptr);
    if (fd < 0) continue;
    set_nonblocking(fd);
    const int one = 1;
    ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);

    auto session = std::make_shared<Session>();
    session->fd = fd;
    {
      // Registering and queueing the snapshot under one lock keeps the
      // snapshot ahead of every broadcast frame.
      std::lock_guard lock(sessions_mutex_);
      session->id = next_session_++;
      session->out.push_back(encode_state(latest_) + "\n");
      sessions_[session->id] = session;
    }
    session->thread = std::thread([this, session] { session_loop(session); });
  }
}

void PilotService::reap_finished() {
  std::vector<std::shared_ptr<Session>> finished;
  {
    std::lock_guard lock(sessions_mutex_);
    for (auto it = sessions_.begin(); it != sessions_.end();) {
      if (it->second->done) {
        finished.push_back(it->second);
        it = sessions_.erase(it);
      } else {
        ++it;
      }
    }
  }
  for (auto& s : finished) {
    if (s->thread.joinable()) s->thread.join();
  }
}

void PilotService::release(const std::shared_ptr<Session>& session) {
  std::lock_guard lock(sessions_mutex_);
  if (controller_ == session->id) controller_.reset();
}

void PilotService::session_loop(std::shared_ptr<Session> session) {
  std::string inbox;
  std::string outbox;
  char buf[4096];
  bool open = true;

  while (running_ && open) {
    if (outbox.empty()) {
      // Refill only once the previous batch is on the wire, so a slow reader
      // backs up the bounded queue instead of this buffer.
      std::lock_guard lock(session->out_mutex);
      while (!session->out.empty()) {
        outbox += session->out.front();
        session->out.pop_front();
      }
      session->queued_frames = 0;
    }
    pollfd pfd{session->fd, static_cast<short>(POLLIN | (outbox.empty() ? 0 : POLLOUT)), 0};
    if (::poll(&pfd, 1, kPollMs) < 0 && errno != EINTR) break;

    if (pfd.revents & (POLLERR | POLLNVAL)) break;
    if (!outbox.empty() && (pfd.revents & POLLOUT)) {
      const ssize_t n = ::send(session->fd, outbox.data(), outbox.size(), MSG_NOSIGNAL);
      if (n > 0) {
        {
          std::lock_guard lock(sessions_mutex_);
          for (ssize_t i = 0; i < n; ++i) {
            if (outbox[static_cast<std::size_t>(i)] == '\n') ++stats_.frames_sent;
          }
        }
        outbox.erase(0, static_cast<std::size_t>(n));
      } else if (n < 0 && errno != EAGAIN && errno != EWOULDBLOCK) {
        break;
      }
    }
    if (pfd.revents & (POLLIN | POLLHUP)) {
      const ssize_t n = ::recv(session->fd, buf, sizeof buf, 0);
      if (n == 0) {
        open = false;
      } else if (n < 0) {
        if (errno != EAGAIN && errno != EWOULDBLOCK) open = false;
      } else {
        inbox.append(buf, static_cast<std::size_t>(n));
        std::size_t nl;
        while ((nl = inbox.find('\n')) != std::string::npos) {
          std::string line = inbox.substr(0, nl);
          inbox.erase(0, nl + 1);
          if (!line.empty() && line.back() == '\r') line.pop_back();
          if (!line.empty()) handle_line(session, line);
        }
        if (inbox.size() > kMaxLine) {
          inbox.clear();
          send(session->id, encode_error("malformed_message", "line too long"), false);
        }
      }
    }
  }
  release(session);
  ::close(session->fd);
  session->done = true;
}

void PilotService::handle_line(const std::shared_ptr<Session>& session, std::string_view line) {
  Command cmd;
  try {
    cmd = decode_command(line);
  } catch (const MalformedMessage& e) {
    send(session->id, encode_error(e.code(), e.what(), message_type(line)), false);
    return;
  }

  if (const auto* hello = std::get_if<HelloCommand>(&cmd)) {
    HelloReply reply;
    reply.session = session->id;
    reply.rate_hz = config_.rate_hz;
    reply.dt = engine_.dt();
    {
      std::lock_guard lock(sessions_mutex_);
      if (hello->role == Role::Controller) {
        if (!controller_ || *controller_ == session->id) {
          controller_ = session->id;
          session->role = Role::Controller;
        } else {
          session->role = Role::Observer;
          reply.granted = false;
          reply.reason = "another session holds the controller role";
        }
      } else {
        if (controller_ == session->id) controller_.reset();
        session->role = Role::Observer;
      }
      reply.role = session->role;
    }
    send(session->id, encode_hello_reply(reply), false);
    return;
  }

  if (session->role != Role::Controller) {
    send(session->id,
         encode_error("not_controller", "only the controlling session may send commands",
                      message_type(line)),
         false);
    return;
  }
  std::lock_guard lock(command_mutex_);
  commands_.push_back({session->id, std::move(cmd)});
}

}  // namespace exogait
