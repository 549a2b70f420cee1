#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>

#include "exogait/gait_planner.hpp"
#include "exogait/step_engine.hpp"

namespace exogait {

// Newline-delimited JSON objects. Every message carries "type" and the schema
// version "v"; unknown fields are ignored.
inline constexpr int kProtocolVersion = 1;

enum class Role { Controller, Observer };
std::string_view role_name(Role role);

// Client -> service.
struct HelloCommand {
  Role role = Role::Observer;
  std::string client;  // free-form label, may be empty
  friend bool operator==(const HelloCommand&, const HelloCommand&) = default;
};
struct TriggerCommand {
  std::optional<std::int64_t> id;  // echoed in the ack
  friend bool operator==(const TriggerCommand&, const TriggerCommand&) = default;
};
struct BehaviorCommand {
  Behavior behavior;
  bool reorient = false;  // acknowledge the turn-around before selecting
  friend bool operator==(const BehaviorCommand&, const BehaviorCommand&) = default;
};
struct ParamsCommand {
  std::string name;
  friend bool operator==(const ParamsCommand&, const ParamsCommand&) = default;
};

using Command = std::variant<HelloCommand, TriggerCommand, BehaviorCommand, ParamsCommand>;

// Throws MalformedMessage (with code()) for anything that is not a valid
// client message.
Command decode_command(std::string_view line);
std::string encode_command(const Command& command);

// Service -> client. None of the encoders append the newline.
std::string encode_state(const EngineState& state);
EngineState decode_state(std::string_view line);

struct HelloReply {
  Role role = Role::Observer;
  bool granted = true;  // false when a controller was asked for but not given
  std::string reason;
  std::uint64_t session = 0;
  double rate_hz = 0.0;
  double dt = 0.0;
};
std::string encode_hello_reply(const HelloReply& reply);

struct TriggerAck {
  bool accepted = false;
  std::optional<std::int64_t> id;
  Phase phase = Phase::Standing;
  double remaining = 0.0;  // s left in the step when the trigger was judged
};
std::string encode_trigger_ack(const TriggerAck& ack);

// Codes: malformed_message, unsupported_version, unknown_type, not_controller,
// behavior_change_while_moving, incompatible_behavior, unknown_params,
// planning_failed.
std::string encode_error(std::string_view code, std::string_view message,
                         std::string_view ref = {});

// Type field of any message; empty when absent or not parseable.
std::string message_type(std::string_view line);

}  // namespace exogait
