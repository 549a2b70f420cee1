#include "exogait/pilot_protocol.hpp"

#include <nlohmann/json.hpp>

#include <stdexcept>

#include "exogait/errors.hpp"

namespace exogait {
namespace {

using nlohmann::json;

json header(std::string_view type) { return {{"type", type}, {"v", kProtocolVersion}}; }

json parse_object(std::string_view line) {
  json j = json::parse(line.begin(), line.end(), nullptr, false);
  if (j.is_discarded()) throw MalformedMessage("message is not valid JSON");
  if (!j.is_object()) throw MalformedMessage("message must be a JSON object");
  const auto v = j.find("v");
  if (v == j.end()) throw MalformedMessage("missing schema version field 'v'");
  if (!v->is_number_integer()) throw MalformedMessage("schema version must be an integer");
  if (v->get<std::int64_t>() != kProtocolVersion) {
    throw MalformedMessage("unsupported schema version " + v->dump(), "unsupported_version");
  }
  const auto t = j.find("type");
  if (t == j.end() || !t->is_string()) throw MalformedMessage("missing string field 'type'");
  return j;
}

template <typename T>
T required(const json& j, const char* key) {
  const auto it = j.find(key);
  if (it == j.end()) throw MalformedMessage(std::string("missing field '") + key + "'");
  try {
    return it->get<T>();
  } catch (const json::exception&) {
    throw MalformedMessage(std::string("field '") + key + "' has the wrong type");
  }
}

const json* optional_field(const json& j, const char* key) {
  const auto it = j.find(key);
  if (it == j.end() || it->is_null()) return nullptr;
  return &*it;
}

Phase parse_phase(const std::string& s) {
  if (s == "standing") return Phase::Standing;
  if (s == "transfer") return Phase::Transfer;
  if (s == "swing") return Phase::Swing;
  throw MalformedMessage("unknown phase '" + s + "'");
}

SupportSide parse_support(const std::string& s) {
  if (s == "left") return SupportSide::Left;
  if (s == "right") return SupportSide::Right;
  if (s == "double") return SupportSide::Double;
  throw MalformedMessage("unknown support side '" + s + "'");
}

Side parse_side(const std::string& s) {
  if (s == "left") return Side::Left;
  if (s == "right") return Side::Right;
  throw MalformedMessage("unknown side '" + s + "'");
}

void put_leg(json& j, const char* prefix, const JointState& s, const PlanarPoint& ankle) {
  const std::string p = prefix;
  j[p + "_hip"] = s.angles.hip;
  j[p + "_knee"] = s.angles.knee;
  j[p + "_ankle"] = s.angles.ankle;
  j[p + "_hip_vel"] = s.velocities.hip;
  j[p + "_knee_vel"] = s.velocities.knee;
  j[p + "_ankle_vel"] = s.velocities.ankle;
  j[p + "_foot_x"] = ankle.x;
  j[p + "_foot_z"] = ankle.z;
}

void get_leg(const json& j, const char* prefix, JointState& s, PlanarPoint& ankle) {
  const std::string p = prefix;
  s.angles.hip = required<double>(j, (p + "_hip").c_str());
  s.angles.knee = required<double>(j, (p + "_knee").c_str());
  s.angles.ankle = required<double>(j, (p + "_ankle").c_str());
  s.velocities.hip = required<double>(j, (p + "_hip_vel").c_str());
  s.velocities.knee = required<double>(j, (p + "_knee_vel").c_str());
  s.velocities.ankle = required<double>(j, (p + "_ankle_vel").c_str());
  ankle.x = required<double>(j, (p + "_foot_x").c_str());
  ankle.z = required<double>(j, (p + "_foot_z").c_str());
}

}  // namespace

std::string_view role_name(Role role) {
  return role == Role::Controller ? "controller" : "observer";
}

Command decode_command(std::string_view line) {
  const json j = parse_object(line);
  const auto type = j["type"].get<std::string>();
  if (type == "hello") {
    HelloCommand c;
    const auto role = required<std::string>(j, "role");
    if (role == "controller") {
      c.role = Role::Controller;
    } else if (role == "observer") {
      c.role = Role::Observer;
    } else {
      throw MalformedMessage("unknown role '" + role + "'");
    }
    if (optional_field(j, "client")) c.client = required<std::string>(j, "client");
    return c;
  }
  if (type == "trigger") {
    TriggerCommand c;
    if (const json* id = optional_field(j, "id")) {
      if (!id->is_number_integer()) throw MalformedMessage("trigger id must be an integer");
      c.id = id->get<std::int64_t>();
    }
    return c;
  }
  if (type == "behavior") {
    BehaviorCommand c;
    const auto name = required<std::string>(j, "behavior");
    try {
      c.behavior = Behavior::parse(name);
    } catch (const std::invalid_argument& e) {
      throw MalformedMessage(e.what());
    }
    if (optional_field(j, "reorient")) c.reorient = required<bool>(j, "reorient");
    return c;
  }
  if (type == "params") {
    return ParamsCommand{required<std::string>(j, "name")};
  }
  throw MalformedMessage("'" + type + "' is not a client message type", "unknown_type");
}

std::string encode_command(const Command& command) {
  json j;
  if (const auto* h = std::get_if<HelloCommand>(&command)) {
    j = header("hello");
    j["role"] = role_name(h->role);
    if (!h->client.empty()) j["client"] = h->client;
  } else if (const auto* t = std::get_if<TriggerCommand>(&command)) {
    j = header("trigger");
    if (t->id) j["id"] = *t->id;
  } else if (const auto* b = std::get_if<BehaviorCommand>(&command)) {
    j = header("behavior");
    j["behavior"] = b->behavior.name();
    if (b->reorient) j["reorient"] = true;
  } else {
    j = header("params");
    j["name"] = std::get<ParamsCommand>(command).name;
  }
  return j.dump();
}

std::string encode_state(const EngineState& s) {
  json j = header("state");
  j["tick"] = s.tick;
  j["t"] = s.time;
  j["phase"] = phase_name(s.phase);
  j["phase_elapsed"] = s.phase_elapsed;
  j["phase_duration"] = s.phase_duration;
  j["step_elapsed"] = s.step_elapsed;
  j["step_duration"] = s.step_duration;
  j["remaining"] = s.step_duration - s.step_elapsed;
  j["trigger_window_in"] = s.trigger_window_in;
  j["trigger_armed"] = s.trigger_armed;
  j["pending_trigger"] = s.pending_trigger;
  j["behavior"] = s.active_behavior.name();
  j["descent_ready"] = s.descent_ready;
  j["support"] = support_name(s.support_side);
  j["moving"] = s.moving_side ? json(side_name(*s.moving_side)) : json(nullptr);
  j["step_count"] = s.step_count;
  j["hip_x"] = s.hip.x;
  j["hip_z"] = s.hip.z;
  j["hip_vx"] = s.hip.vx;
  j["hip_vz"] = s.hip.vz;
  put_leg(j, "left", s.left, s.left_ankle);
  put_leg(j, "right", s.right, s.right_ankle);
  return j.dump();
}

EngineState decode_state(std::string_view line) {
  const json j = parse_object(line);
  if (j["type"] != "state") throw MalformedMessage("not a state message", "unknown_type");
  EngineState s;
  s.tick = required<std::uint64_t>(j, "tick");
  s.time = required<double>(j, "t");
  s.phase = parse_phase(required<std::string>(j, "phase"));
  s.phase_elapsed = required<double>(j, "phase_elapsed");
  s.phase_duration = required<double>(j, "phase_duration");
  s.step_elapsed = required<double>(j, "step_elapsed");
  s.step_duration = required<double>(j, "step_duration");
  s.trigger_window_in = required<double>(j, "trigger_window_in");
  s.trigger_armed = required<bool>(j, "trigger_armed");
  s.pending_trigger = required<bool>(j, "pending_trigger");
  try {
    s.active_behavior = Behavior::parse(required<std::string>(j, "behavior"));
  } catch (const std::invalid_argument& e) {
    throw MalformedMessage(e.what());
  }
  s.descent_ready = required<bool>(j, "descent_ready");
  s.support_side = parse_support(required<std::string>(j, "support"));
  if (optional_field(j, "moving")) s.moving_side = parse_side(required<std::string>(j, "moving"));
  s.step_count = required<int>(j, "step_count");
  s.hip.x = required<double>(j, "hip_x");
  s.hip.z = required<double>(j, "hip_z");
  s.hip.vx = required<double>(j, "hip_vx");
  s.hip.vz = required<double>(j, "hip_vz");
  get_leg(j, "left", s.left, s.left_ankle);
  get_leg(j, "right", s.right, s.right_ankle);
  return s;
}

std::string encode_hello_reply(const HelloReply& r) {
  json j = header("hello");
  j["role"] = role_name(r.role);
  j["granted"] = r.granted;
  if (!r.reason.empty()) j["reason"] = r.reason;
  j["session"] = r.session;
  j["rate_hz"] = r.rate_hz;
  j["dt"] = r.dt;
  return j.dump();
}

std::string encode_trigger_ack(const TriggerAck& a) {
  json j = header("trigger_ack");
  j["accepted"] = a.accepted;
  j["id"] = a.id ? json(*a.id) : json(nullptr);
  j["phase"] = phase_name(a.phase);
  j["remaining"] = a.remaining;
  return j.dump();
}

std::string encode_error(std::string_view code, std::string_view message,
                         std::string_view ref) {
  json j = header("error");
  j["code"] = code;
  j["message"] = message;
  if (!ref.empty()) j["ref"] = ref;
  // Replacement instead of an exception if the message carries invalid UTF-8.
  return j.dump(-1, ' ', false, json::error_handler_t::replace);
}

std::string message_type(std::string_view line) {
  const json j = json::parse(line.begin(), line.end(), nullptr, false);
  if (j.is_discarded() || !j.is_object()) return {};
  const auto t = j.find("type");
  return t != j.end() && t->is_string() ? t->get<std::string>() : std::string();
}

}  // namespace exogait
