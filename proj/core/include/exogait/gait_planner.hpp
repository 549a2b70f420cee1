#pragma once

#include <array>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "exogait/kinematics.hpp"
#include "exogait/minjerk.hpp"

namespace exogait {

inline constexpr double kStonesMinStep = 0.35;  // m
inline constexpr double kStonesMaxStep = 0.69;  // m

enum class BehaviorKind { FlatWalk, StairsUp, StairsDown, RampUp, RampDown, SteppingStones, Stand };

// Which parameter column a behavior draws from.
enum class GaitProfile { Flat, Stairs, Slopes, Stones };

struct Behavior {
  BehaviorKind kind = BehaviorKind::Stand;
  double step_length = 0.0;  // only meaningful for SteppingStones

  static Behavior flat() { return {BehaviorKind::FlatWalk}; }
  static Behavior stairs_up() { return {BehaviorKind::StairsUp}; }
  static Behavior stairs_down() { return {BehaviorKind::StairsDown}; }
  static Behavior ramp_up() { return {BehaviorKind::RampUp}; }
  static Behavior ramp_down() { return {BehaviorKind::RampDown}; }
  static Behavior stand() { return {BehaviorKind::Stand}; }
  // Throws std::invalid_argument outside [0.35, 0.69] m.
  static Behavior stepping_stones(double step_length);

  // "flat", "stairs_up", "stairs_down", "ramp_up", "ramp_down", "stand",
  // "stones:<length>".
  std::string name() const;
  static Behavior parse(std::string_view text);

  GaitProfile profile() const;
  bool moves_forward() const;

  friend bool operator==(const Behavior&, const Behavior&) = default;
};

std::string_view profile_name(GaitProfile profile);

// One parameter column plus the toe-off and posture tunables.
struct GaitParameters {
  double step_length = 0.4;       // m
  double swing_height = 0.1;      // m
  double pct_back = 15.0;         // percent of the swing displacement
  double pct_front = 15.0;        // percent of the swing displacement
  double swing_time = 1.0;        // s
  double transfer_time = 0.4;     // s
  double toe_off_angle = deg2rad(20.0);      // rad, plantar flexion target; 0 disables
  double fast_toeoff_extra = deg2rad(10.0);  // rad
  double fast_toeoff_duration = 0.15;        // s
  double step_rise = 0.0;                    // m, magnitude per step (stairs/ramp)
  double stance_lead_fraction = 0.4;   // standing hip-to-leading-ankle distance / step length
  double transfer_hip_fraction = 0.3;  // share of that distance the hip covers in transfer
  double ramp_hip_offset = 0.05;       // m, standing hip ahead of trailing ankle on ramps
  double swing_dorsiflexion = deg2rad(10.0);  // rad, ankle at mid-swing
  double stone_pad = 0.15;                    // m

  friend bool operator==(const GaitParameters&, const GaitParameters&) = default;
};

enum class Phase { Standing, Transfer, Swing };
std::string_view phase_name(Phase phase);

// Both feet down. Joint angles of each leg plus the hip position in the world.
struct DoubleSupportPose {
  PlanarPoint hip;
  JointAngles trailing;
  JointAngles leading;

  PlanarPoint trailing_ankle(const LegGeometry& geom) const;
  PlanarPoint leading_ankle(const LegGeometry& geom) const;
};

// Sole-level ground profile around one step, in world coordinates.
struct Terrain {
  enum class Kind { Flat, Stairs, Ramp, Stones } kind = Kind::Flat;
  double origin_x = 0.0;  // stance ankle x
  double origin_z = 0.0;  // ground height under the stance foot
  double run = 0.4;       // tread depth / step length
  double rise = 0.0;      // signed height change per run
  double pad = 0.15;      // stepping-stone pad length

  double height(double x) const;
  double pitch() const;  // ground slope angle, nonzero only on ramps
};

// Resolved per-step quantities derived from a behavior and its parameters.
struct StepTargets {
  double step_length;
  double rise;            // signed
  double lead_offset;     // standing hip-to-leading-ankle horizontal distance
  double transfer_share;  // fraction of lead_offset covered during transfer
  bool fast_toe_off;
  Terrain::Kind terrain;
};

StepTargets resolve_targets(const Behavior& behavior, const GaitParameters& params);

// Standing pose of a periodic gait whose trailing ankle sits on the ground at
// `trailing_ground` (sole level).
DoubleSupportPose periodic_pose(const Behavior& behavior, const GaitParameters& params,
                                const LegGeometry& geom, double trailing_ground_x = 0.0,
                                double trailing_ground_z = 0.0);

// Waypoints 1..4 of the swing foot: start, two apex points, goal.
std::array<PlanarPoint, 4> compute_waypoints(const GaitParameters& params,
                                             const PlanarPoint& start,
                                             const PlanarPoint& goal);

// Hip position (and velocity) in the world as a function of time since the
// start of swing. The default keeps the hip fixed at the origin, so waypoints
// are read in the hip frame.
using HipMotion = std::function<PlanarPoint(double)>;

struct SwingAnkleProfile {
  double start = 0.0;    // rad at swing start
  double landing = 0.0;  // rad at touchdown
  bool fast_toe_off = true;
};

struct SwingPlan {
  JointTrajectory joints;                 // hip, knee, ankle over swing_time
  std::array<PlanarPoint, 4> waypoints;   // as given (world or hip frame)
  std::array<double, 4> times;            // from swing start
  std::array<JointState, 4> waypoint_joints;
};

SwingPlan plan_swing(const GaitParameters& params, const PlanarPoint& start,
                     const PlanarPoint& goal, const LegGeometry& geom,
                     const HipMotion& hip = {}, const SwingAnkleProfile& ankle = {});

struct StanceInputs {
  JointAngles start;        // support leg at step start
  JointAngles end;          // support leg at step end
  double ground_pitch = 0.0;
  double transfer_advance = 0.0;  // m the hip moves forward during transfer
};

// Support leg over the whole step (transfer + swing).
JointTrajectory plan_stance(const GaitParameters& params, const LegGeometry& geom,
                            const StanceInputs& in);

struct TransferPlan {
  PiecewiseQuintic trailing_ankle;  // over transfer_time
  PiecewiseQuintic leading_hip;     // over transfer_time
  PiecewiseQuintic fast_toe_off;    // over fast_toeoff_duration; empty when disabled
};

struct TransferInputs {
  double trailing_ankle_start = 0.0;
  JointAngles leading{};
  double hip_advance = 0.0;  // m
  bool fast_toe_off = true;
};

TransferPlan plan_transfer(const GaitParameters& params, const LegGeometry& geom,
                           const TransferInputs& in);

struct PhaseSpan {
  Phase phase;
  double start;
  double duration;
};

struct StepPlan {
  Behavior behavior;
  std::vector<PhaseSpan> phases;  // in execution order
  JointTrajectory transfer;  // moving leg during the double-support phase
  JointTrajectory swing;     // moving leg during the single-support phase
  JointTrajectory stance;    // support leg over the whole step
  JointTrajectory moving;    // moving leg over the whole step, execution order
  std::array<PlanarPoint, 4> waypoints;  // world frame
  std::array<double, 4> waypoint_times;  // from step start
  PlanarPoint stance_ankle;              // world, fixed over the step
  DoubleSupportPose start_pose;
  DoubleSupportPose end_pose;  // legs named by their role in the next step
  Terrain terrain;
  bool reversed = false;

  double duration() const;
  double phase_duration(Phase p) const;
  // Phase active at time t; the boundary instant belongs to the later phase.
  const PhaseSpan& phase_at(double t) const;
  JointState moving_at(double t) const;
  JointState support_at(double t) const;
  PlanarPoint hip_at(const LegGeometry& geom, double t) const;  // with velocity
  PlanarPoint moving_ankle_at(const LegGeometry& geom, double t) const;
};

struct PlanningContext {
  DoubleSupportPose pose;
  bool descent_ready = false;  // pilot faces up the stairs
};

StepPlan plan_step(const Behavior& behavior, const GaitParameters& params,
                   const LegGeometry& geom, const PlanningContext& current);

// Same step with the toe-off ramp and the fast toe-off impulse replaced by an
// ankle hold; hip and knee are unchanged.
StepPlan without_toe_off(const StepPlan& plan, const GaitParameters& params);

// Throws JointLimitExceeded if any sample at `dt` leaves the joint windows or
// exceeds the speed cap.
void check_joint_limits(const StepPlan& plan, const LegGeometry& geom, double dt = 0.002);

}  // namespace exogait
