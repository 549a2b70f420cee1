#include "exogait/step_engine.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "exogait/errors.hpp"

namespace exogait {
namespace {

constexpr double kTimeSlack = 1e-9;

JointState at_rest(const JointAngles& q) { return {q, {}}; }

}  // namespace

std::string_view side_name(Side side) { return side == Side::Left ? "left" : "right"; }

std::string_view support_name(SupportSide side) {
  switch (side) {
    case SupportSide::Left: return "left";
    case SupportSide::Right: return "right";
    case SupportSide::Double: return "double";
  }
  return "double";
}

bool trigger_window_open(Phase phase, bool final_phase, double remaining) {
  if (phase == Phase::Standing) return true;
  return final_phase && remaining <= kTriggerWindow + kTimeSlack;
}

StepEngine::StepEngine(EngineConfig config) : config_(std::move(config)) {
  if (!(config_.dt > 0.0) || !std::isfinite(config_.dt)) {
    throw std::invalid_argument("control period must be positive");
  }
  config_.geometry.validate();
  const auto& flat = config_.parameters.active(GaitProfile::Flat).params;
  const auto& geom = config_.geometry;
  const double hip_x = periodic_pose(Behavior::flat(), flat, geom).hip.x;
  pose_ = periodic_pose(Behavior::flat(), flat, geom, -hip_x, 0.0);
  if (config_.behavior.kind == BehaviorKind::StairsDown) reorient_for_descent();
  state_.active_behavior = config_.behavior;
  refresh();
}

const GaitParameters& StepEngine::params_for(const Behavior& behavior) const {
  return config_.parameters.active(behavior.profile()).params;
}

bool StepEngine::trigger() {
  if (!state_.trigger_armed) return false;
  state_.pending_trigger = true;
  return true;
}

void StepEngine::select_behavior(const Behavior& behavior) {
  if (plan_) {
    throw BehaviorChangeWhileMoving("behavior changes are only accepted while standing (now " +
                                    std::string(phase_name(state_.phase)) + ")");
  }
  if (behavior.kind == BehaviorKind::StairsDown && !state_.descent_ready) {
    throw IncompatibleBehaviorTransition(
        "stairs descent needs the turn-around acknowledged first");
  }
  state_.active_behavior = behavior;
  refresh();
}

void StepEngine::reorient_for_descent() {
  if (plan_) throw BehaviorChangeWhileMoving("turn-around is only possible while standing");
  const Behavior up = Behavior::stairs_up();
  const auto& p = params_for(up);
  const auto& geom = config_.geometry;
  const double rise = resolve_targets(up, p).rise;
  const double top = std::max(pose_.trailing_ankle(geom).z, pose_.leading_ankle(geom).z) -
                     geom.ankle_height;
  const double ref_x = periodic_pose(up, p, geom, 0.0, top - rise).hip.x;
  pose_ = periodic_pose(up, p, geom, pose_.hip.x - ref_x, top - rise);
  state_.descent_ready = true;
  refresh();
}

GaitProfile StepEngine::use_parameters(std::string_view name) {
  if (plan_) throw BehaviorChangeWhileMoving("parameter changes are only accepted while standing");
  return config_.parameters.activate(name);
}

const EngineState& StepEngine::tick() {
  ++state_.tick;
  state_.time = static_cast<double>(state_.tick) * config_.dt;

  if (!plan_) {
    if (state_.pending_trigger) {
      state_.pending_trigger = false;
      try {
        start_step();
      } catch (...) {
        refresh();
        throw;
      }
    }
    refresh();
    return state_;
  }

  ++step_ticks_;
  const double elapsed = step_offset_ + static_cast<double>(step_ticks_) * config_.dt;
  const double total = plan_->duration();
  if (elapsed >= total - kTimeSlack) {
    const double overshoot = elapsed - total > kTimeSlack ? elapsed - total : 0.0;
    finish_step();
    if (state_.pending_trigger) {
      state_.pending_trigger = false;
      try {
        start_step();
      } catch (...) {
        refresh();
        throw;
      }
      step_offset_ = overshoot;
    }
  }
  refresh();
  return state_;
}

void StepEngine::start_step() {
  const Behavior& b = state_.active_behavior;
  const bool reversed = b.kind == BehaviorKind::StairsDown;
  PlanningContext ctx{pose_, state_.descent_ready};
  plan_ = plan_step(b, params_for(b), config_.geometry, ctx);
  // Forward steps move the trailing leg, reversed ones the leading leg.
  moving_side_ = reversed ? other(trailing_side_) : trailing_side_;
  step_ticks_ = 0;
  step_offset_ = 0.0;
}

void StepEngine::finish_step() {
  pose_ = plan_->end_pose;
  trailing_side_ = plan_->reversed ? moving_side_ : other(moving_side_);
  const auto kind = plan_->behavior.kind;
  state_.descent_ready = kind == BehaviorKind::StairsUp || kind == BehaviorKind::StairsDown;
  ++state_.step_count;
  plan_.reset();
}

void StepEngine::set_leg(Side side, const JointState& s, const PlanarPoint& ankle) {
  if (side == Side::Left) {
    state_.left = s;
    state_.left_ankle = ankle;
  } else {
    state_.right = s;
    state_.right_ankle = ankle;
  }
}

void StepEngine::refresh_standing() {
  const auto& geom = config_.geometry;
  state_.phase = Phase::Standing;
  state_.phase_elapsed = 0.0;
  state_.phase_duration = 0.0;
  state_.step_elapsed = 0.0;
  state_.step_duration = 0.0;
  state_.support_side = SupportSide::Double;
  state_.moving_side.reset();
  state_.hip = pose_.hip;
  state_.hip.vx = state_.hip.vz = 0.0;
  PlanarPoint trailing = pose_.trailing_ankle(geom);
  PlanarPoint leading = pose_.leading_ankle(geom);
  set_leg(trailing_side_, at_rest(pose_.trailing), trailing);
  set_leg(other(trailing_side_), at_rest(pose_.leading), leading);
}

void StepEngine::refresh() {
  if (!plan_) {
    refresh_standing();
  } else {
    const auto& geom = config_.geometry;
    const double t = std::min(step_offset_ + static_cast<double>(step_ticks_) * config_.dt,
                              plan_->duration());
    const PhaseSpan& span = plan_->phase_at(t);
    state_.phase = span.phase;
    state_.phase_elapsed = std::clamp(t - span.start, 0.0, span.duration);
    state_.phase_duration = span.duration;
    state_.step_elapsed = t;
    state_.step_duration = plan_->duration();
    const Side support = other(moving_side_);
    state_.support_side = span.phase == Phase::Swing
                              ? (support == Side::Left ? SupportSide::Left : SupportSide::Right)
                              : SupportSide::Double;
    state_.moving_side = moving_side_;
    state_.hip = plan_->hip_at(geom, t);
    set_leg(moving_side_, plan_->moving_at(t), plan_->moving_ankle_at(geom, t));
    set_leg(support, plan_->support_at(t), plan_->stance_ankle);
  }
  refresh_trigger_window();
}

void StepEngine::refresh_trigger_window() {
  if (!plan_) {
    const bool can_step = state_.active_behavior.kind != BehaviorKind::Stand;
    state_.trigger_armed = can_step;
    state_.trigger_window_in = 0.0;
    return;
  }
  const bool final_phase = &plan_->phase_at(state_.step_elapsed) == &plan_->phases.back();
  const double remaining = state_.phase_duration - state_.phase_elapsed;
  state_.trigger_armed = trigger_window_open(state_.phase, final_phase, remaining);
  const double to_end = state_.step_duration - state_.step_elapsed;
  state_.trigger_window_in =
      state_.trigger_armed ? 0.0 : std::max(0.0, to_end - kTriggerWindow);
}

}  // namespace exogait
