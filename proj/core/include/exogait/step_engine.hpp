#pragma once

#include <cstdint>
#include <optional>
#include <string_view>

#include "exogait/gait_planner.hpp"
#include "exogait/kinematics.hpp"
#include "exogait/parameter_store.hpp"

namespace exogait {

inline constexpr double kTriggerWindow = 0.25;  // s before the end of a step
inline constexpr double kDefaultDt = 0.002;     // s

enum class Side { Left, Right };
enum class SupportSide { Left, Right, Double };

std::string_view side_name(Side side);
std::string_view support_name(SupportSide side);
inline Side other(Side s) { return s == Side::Left ? Side::Right : Side::Left; }

// Trigger acceptance. `remaining` is the time left in the current phase;
// `final_phase` says whether the step ends with it.
bool trigger_window_open(Phase phase, bool final_phase, double remaining);

struct EngineState {
  std::uint64_t tick = 0;
  double time = 0.0;  // s since construction
  JointState left;
  JointState right;
  SupportSide support_side = SupportSide::Double;
  Phase phase = Phase::Standing;
  double phase_elapsed = 0.0;
  double phase_duration = 0.0;  // 0 while standing
  double step_elapsed = 0.0;
  double step_duration = 0.0;
  Behavior active_behavior = Behavior::flat();
  bool pending_trigger = false;
  bool trigger_armed = true;       // a trigger now would be accepted
  double trigger_window_in = 0.0;  // s until the window opens; 0 when armed
  bool descent_ready = false;
  int step_count = 0;  // completed steps
  std::optional<Side> moving_side;
  PlanarPoint hip;  // world, with velocity
  PlanarPoint left_ankle;
  PlanarPoint right_ankle;

  double hip_frame_x() const { return hip.x; }
};

struct EngineConfig {
  LegGeometry geometry{};
  double dt = kDefaultDt;
  Behavior behavior = Behavior::flat();
  ParameterStore parameters{};
};

// Single-owner gait state machine. Not thread safe; callers serialize access.
class StepEngine {
 public:
  // Starts standing in the flat periodic pose with the hip at x = 0.
  explicit StepEngine(EngineConfig config = {});

  // True when the trigger is accepted and latched.
  bool trigger();
  // Standing only, else BehaviorChangeWhileMoving. Stairs descent also needs
  // reorient_for_descent() first, else IncompatibleBehaviorTransition.
  void select_behavior(const Behavior& behavior);
  // Pilot turned around at the top of a flight: snaps to the stairs standing
  // pose with the upper foot on the current ground. Standing only.
  void reorient_for_descent();
  // Makes a named parameter set active for its profile. Standing only.
  GaitProfile use_parameters(std::string_view name);

  // Advances one control period and returns the new state. Planning errors
  // propagate; the engine is then left standing in its last pose.
  const EngineState& tick();

  const EngineState& state() const { return state_; }
  const StepPlan* current_plan() const { return plan_ ? &*plan_ : nullptr; }
  double dt() const { return config_.dt; }
  const LegGeometry& geometry() const { return config_.geometry; }
  const ParameterStore& parameters() const { return config_.parameters; }
  const GaitParameters& params_for(const Behavior& behavior) const;

 private:
  void start_step();
  void finish_step();
  void refresh();
  void refresh_standing();
  void refresh_trigger_window();
  void set_leg(Side side, const JointState& s, const PlanarPoint& ankle);

  EngineConfig config_;
  EngineState state_;
  DoubleSupportPose pose_;
  Side trailing_side_ = Side::Left;  // owner of pose_.trailing
  std::optional<StepPlan> plan_;
  Side moving_side_ = Side::Left;
  std::uint64_t step_ticks_ = 0;
  double step_offset_ = 0.0;  // overshoot carried over from the previous step
};

}  // namespace exogait
