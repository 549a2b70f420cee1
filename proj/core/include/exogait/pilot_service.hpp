#pragma once

#include <atomic>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "exogait/pilot_protocol.hpp"
#include "exogait/step_engine.hpp"

namespace exogait {

struct ServiceConfig {
  std::string bind = "127.0.0.1:7878";  // host:port, port 0 picks a free one
  double rate_hz = 50.0;                // state stream rate
  double time_scale = 1.0;              // engine seconds per wall-clock second
  std::size_t max_queued_frames = 32;   // per session; extra state frames are dropped
};

struct ServiceStats {
  std::uint64_t frames_sent = 0;
  std::uint64_t frames_dropped = 0;
  std::uint64_t commands_applied = 0;
};

// TCP endpoint around one engine. The engine runs on its own thread at the
// control rate and never waits on a socket. One client may control; any
// number may observe.
class PilotService {
 public:
  PilotService(StepEngine engine, ServiceConfig config);
  ~PilotService();
  PilotService(const PilotService&) = delete;
  PilotService& operator=(const PilotService&) = delete;

  // Binds and starts the threads. Throws BindFailure.
  void start();
  void stop();
  bool running() const { return running_; }

  std::uint16_t port() const { return port_; }
  EngineState snapshot() const;
  ServiceStats stats() const;

 private:
  struct Session;
  struct QueuedCommand {
    std::uint64_t session;
    Command command;
  };

  void engine_loop();
  void accept_loop();
  void session_loop(std::shared_ptr<Session> session);
  void handle_line(const std::shared_ptr<Session>& session, std::string_view line);
  void apply(const QueuedCommand& qc);
  void send(std::uint64_t session, std::string message, bool droppable);
  void broadcast(const std::string& message);
  void release(const std::shared_ptr<Session>& session);
  void reap_finished();

  StepEngine engine_;
  ServiceConfig config_;
  int listen_fd_ = -1;
  std::uint16_t port_ = 0;
  std::atomic<bool> running_{false};

  std::thread engine_thread_;
  std::thread accept_thread_;

  std::mutex command_mutex_;
  std::deque<QueuedCommand> commands_;

  mutable std::mutex sessions_mutex_;
  std::map<std::uint64_t, std::shared_ptr<Session>> sessions_;
  std::optional<std::uint64_t> controller_;
  std::uint64_t next_session_ = 1;
  EngineState latest_;
  ServiceStats stats_;
};

// Splits "host:port" or "[v6]:port". Throws BindFailure on bad input.
std::pair<std::string, std::uint16_t> split_address(const std::string& address);

}  // namespace exogait
