#include "exogait/gait_planner.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numbers>
#include <optional>
#include <sstream>
#include <stdexcept>

#include "exogait/errors.hpp"
#include "exogait/number_text.hpp"

namespace exogait {
namespace {

// The leading leg is never planned closer than this to full extension.
constexpr double kLeadReachMargin = 0.005;  // m
constexpr double kPoseMatchTolerance = 1e-6;

PlanarPoint rotate(double angle, double x, double z) {
  const double c = std::cos(angle), s = std::sin(angle);
  return {x * c - z * s, x * s + z * c, 0.0, 0.0};
}

PlanarPoint add(const PlanarPoint& a, const PlanarPoint& b) {
  return {a.x + b.x, a.z + b.z, a.vx + b.vx, a.vz + b.vz};
}

PiecewiseQuintic rest_to_rest(double from, double to, double duration) {
  return PiecewiseQuintic({QuinticSegment::fit(from, 0.0, to, 0.0, duration)});
}

std::vector<QuinticSegment> fast_toe_off_segments(double angle, double extra,
                                                  double duration) {
  return {QuinticSegment::fit(angle, 0.0, angle - extra, 0.0, 0.5 * duration),
          QuinticSegment::fit(angle - extra, 0.0, angle, 0.0, 0.5 * duration)};
}

// Ankle over the swing: optional fast toe-off impulse, dorsiflexion for
// clearance at mid-swing, then the touchdown angle.
PiecewiseQuintic swing_ankle(const GaitParameters& params, const SwingAnkleProfile& p) {
  const double total = params.swing_time;
  const double peak_time = 0.5 * total;
  const double peak = params.swing_dorsiflexion;
  PiecewiseQuintic out;
  double t = 0.0;
  const bool fast = p.fast_toe_off && params.fast_toeoff_extra > 0.0 &&
                    params.fast_toeoff_duration > 0.0;
  if (fast) {
    for (const auto& s : fast_toe_off_segments(p.start, params.fast_toeoff_extra,
                                               params.fast_toeoff_duration)) {
      out.append(s);
    }
    t = params.fast_toeoff_duration;
  }
  out.append(QuinticSegment::fit(p.start, 0.0, peak, 0.0, peak_time - t));
  out.append(QuinticSegment::fit(peak, 0.0, p.landing, 0.0, total - peak_time));
  return out;
}

// Hip angle after rotating a rigid leg (knee fixed) about its ankle so that
// the ankle ends up `ankle_x` ahead of the hip.
double rigid_hip_angle(const LegGeometry& geom, const JointAngles& q, double ankle_x) {
  const auto p = forward_kinematics(geom, q);
  const double r = std::hypot(p.x, p.z);
  const double offset = std::atan2(geom.shank_length * std::sin(q.knee),
                                   geom.thigh_length + geom.shank_length * std::cos(q.knee));
  return offset + std::asin(std::clamp(ankle_x / r, -1.0, 1.0));
}

double transfer_hip_target(const GaitParameters& params, const LegGeometry& geom,
                           const JointAngles& leading, double hip_advance) {
  (void)params;
  const auto p = forward_kinematics(geom, leading);
  return rigid_hip_angle(geom, leading, p.x - hip_advance);
}

double terrain_pitch(const StepTargets& t) {
  return t.terrain == Terrain::Kind::Ramp ? std::atan2(t.rise, t.step_length) : 0.0;
}

PlanarPoint stance_hip(const LegGeometry& geom, const PlanarPoint& ankle,
                       const JointState& s) {
  const auto rel = forward_kinematics(geom, s.angles);
  const auto v = cartesian_velocity(geom, s.angles, s.velocities);
  return {ankle.x - rel.x, ankle.z - rel.z, -v.vx, -v.vz};
}

// Ankle position when the foot pivots about `toe` with the ankle held at
// `ankle_angle` and the leg still attached to the hip. Shank and foot then
// form one rigid body, so the knee lies on a circle about the toe; it must
// also lie on the thigh circle about the hip. Of the two intersections the
// one on the knee >= 0 branch closest to `shank_hint` is taken.
PlanarPoint toe_pivot_ankle(const LegGeometry& geom, const PlanarPoint& toe,
                            const PlanarPoint& hip, double ankle_angle, double shank_hint) {
  // Knee and ankle relative to the toe at zero shank angle.
  const PlanarPoint ankle0 =
      rotate(ankle_angle, -geom.foot_forward_length, geom.ankle_height);
  const PlanarPoint knee0{ankle0.x, ankle0.z + geom.shank_length};
  const double rho = std::hypot(knee0.x, knee0.z);
  const double dx = hip.x - toe.x, dz = hip.z - toe.z;
  const double d = std::hypot(dx, dz);
  const double c = (d * d + rho * rho - geom.thigh_length * geom.thigh_length) / (2 * d * rho);
  if (!(std::abs(c) <= 1.0)) {
    std::ostringstream os;
    os << "swing waypoint 0: no lift-off posture pivots about the toe (hip " << d
       << " m from the toe)";
    throw UnreachableTarget(os.str(), 0);
  }
  const double base = std::atan2(dz, dx) - std::atan2(knee0.z, knee0.x);
  const double spread = std::acos(c);
  std::optional<PlanarPoint> best;
  double best_gap = 0.0;
  for (double sign : {1.0, -1.0}) {
    const double shank = base + sign * spread;
    const PlanarPoint ankle = add(toe, rotate(shank, ankle0.x, ankle0.z));
    const PlanarPoint knee = add(toe, rotate(shank, knee0.x, knee0.z));
    // Knee flexion >= 0 puts the knee ahead of the hip-to-ankle line.
    const double side = (ankle.x - hip.x) * (knee.z - hip.z) - (ankle.z - hip.z) * (knee.x - hip.x);
    if (side < -1e-12) continue;
    const double gap = std::abs(std::remainder(shank - shank_hint, 2 * std::numbers::pi));
    if (!best || gap < best_gap) {
      best = ankle;
      best_gap = gap;
    }
  }
  if (!best) throw UnreachableTarget("swing waypoint 0: lift-off needs a hyperextended knee", 0);
  return *best;
}

bool same_angles(const JointAngles& a, const JointAngles& b, double tol) {
  return std::abs(a.hip - b.hip) <= tol && std::abs(a.knee - b.knee) <= tol &&
         std::abs(a.ankle - b.ankle) <= tol;
}

StepPlan reverse_plan(const StepPlan& p) {
  StepPlan r;
  r.behavior = p.behavior;
  r.reversed = !p.reversed;
  r.transfer = time_reverse(p.transfer);
  r.swing = time_reverse(p.swing);
  r.stance = time_reverse(p.stance);
  r.moving = time_reverse(p.moving);
  const double total = p.duration();
  double t = 0.0;
  for (auto it = p.phases.rbegin(); it != p.phases.rend(); ++it) {
    r.phases.push_back({it->phase, t, it->duration});
    t += it->duration;
  }
  for (int i = 0; i < 4; ++i) {
    r.waypoints[i] = p.waypoints[3 - i];
    r.waypoints[i].vx = -r.waypoints[i].vx;
    r.waypoints[i].vz = -r.waypoints[i].vz;
    r.waypoint_times[i] = total - p.waypoint_times[3 - i];
  }
  r.stance_ankle = p.stance_ankle;
  r.terrain = p.terrain;
  // Roles flip: the support leg is the trailing (lower) leg at the start of a
  // reversed step and the leading one at its end.
  r.start_pose = {p.end_pose.hip, p.end_pose.trailing, p.end_pose.leading};
  r.end_pose = {p.start_pose.hip, p.start_pose.trailing, p.start_pose.leading};
  return r;
}

StepPlan plan_forward(const Behavior& behavior, const GaitParameters& params,
                      const LegGeometry& geom, const DoubleSupportPose& start) {
  const StepTargets tg = resolve_targets(behavior, params);
  const double pitch = terrain_pitch(tg);
  const double t_tr = params.transfer_time;
  const double t_sw = params.swing_time;

  const PlanarPoint stance_ankle = start.leading_ankle(geom);
  const PlanarPoint trailing_ankle = start.trailing_ankle(geom);
  const double stance_ground = stance_ankle.z - geom.ankle_height;

  const DoubleSupportPose target =
      periodic_pose(behavior, params, geom, stance_ankle.x, stance_ground);

  const double lead_x = forward_kinematics(geom, start.leading).x;
  const double hip_advance = tg.transfer_share * std::max(lead_x, 0.0);

  StepPlan plan;
  plan.behavior = behavior;
  plan.stance_ankle = stance_ankle;
  plan.start_pose = start;
  plan.terrain = {tg.terrain, stance_ankle.x, stance_ground, tg.step_length, tg.rise,
                  params.stone_pad};
  plan.phases = {{Phase::Transfer, 0.0, t_tr}, {Phase::Swing, t_tr, t_sw}};

  plan.stance = plan_stance(params, geom,
                            {start.leading, target.trailing, pitch, hip_advance});

  auto hip_at = [&](double t) {
    return stance_hip(geom, stance_ankle, plan.stance.evaluate(t));
  };
  const PlanarPoint hip_swing_start = hip_at(t_tr);

  // Toe-off: the trailing foot pivots about its toe while the ankle goes to
  // its target angle.
  const double toe_target =
      params.toe_off_angle > 0.0 ? -params.toe_off_angle : start.trailing.ankle;
  const double foot_pitch0 = shank_angle(start.trailing) + start.trailing.ankle;
  const PlanarPoint toe =
      add(trailing_ankle, rotate(foot_pitch0, geom.foot_forward_length, -geom.ankle_height));
  const PlanarPoint lift_off = toe_pivot_ankle(geom, toe, hip_swing_start, toe_target,
                                               shank_angle(start.trailing));

  const PlanarPoint goal = target.leading_ankle(geom);
  GaitParameters swing_params = params;
  swing_params.step_length = tg.step_length;
  SwingPlan swing =
      plan_swing(swing_params, lift_off, goal, geom,
                 [&](double tau) { return hip_at(t_tr + std::min(tau, t_sw)); },
                 {toe_target, target.leading.ankle, tg.fast_toe_off});

  const TransferPlan transfer = plan_transfer(
      params, geom, {start.trailing.ankle, start.leading, hip_advance, tg.fast_toe_off});
  const JointAngles lift_joints = swing.waypoint_joints[0].angles;
  plan.transfer.hip = rest_to_rest(start.trailing.hip, lift_joints.hip, t_tr);
  plan.transfer.knee = rest_to_rest(start.trailing.knee, lift_joints.knee, t_tr);
  plan.transfer.ankle = transfer.trailing_ankle;
  plan.swing = swing.joints;

  plan.moving = plan.transfer;
  plan.moving.append(plan.swing);

  for (int i = 0; i < 4; ++i) {
    plan.waypoints[i] = swing.waypoints[i];
    plan.waypoint_times[i] = t_tr + swing.times[i];
  }
  const double total = plan.duration();
  plan.end_pose = {hip_at(total), plan.stance.evaluate(total).angles,
                   plan.moving.evaluate(total).angles};
  return plan;
}

}  // namespace

Behavior Behavior::stepping_stones(double step_length) {
  if (!(step_length >= kStonesMinStep && step_length <= kStonesMaxStep)) {
    std::ostringstream os;
    os << "stepping-stone step length " << step_length << " m outside [" << kStonesMinStep
       << ", " << kStonesMaxStep << "] m";
    throw std::invalid_argument(os.str());
  }
  return {BehaviorKind::SteppingStones, step_length};
}

std::string Behavior::name() const {
  switch (kind) {
    case BehaviorKind::FlatWalk: return "flat";
    case BehaviorKind::StairsUp: return "stairs_up";
    case BehaviorKind::StairsDown: return "stairs_down";
    case BehaviorKind::RampUp: return "ramp_up";
    case BehaviorKind::RampDown: return "ramp_down";
    case BehaviorKind::Stand: return "stand";
    case BehaviorKind::SteppingStones: return "stones:" + format_number(step_length);
  }
  return "unknown";
}

Behavior Behavior::parse(std::string_view text) {
  if (text == "flat") return flat();
  if (text == "stairs_up") return stairs_up();
  if (text == "stairs_down") return stairs_down();
  if (text == "ramp_up") return ramp_up();
  if (text == "ramp_down") return ramp_down();
  if (text == "stand") return stand();
  if (text.starts_with("stones:")) {
    const auto num = text.substr(7);
    double len = 0.0;
    auto [ptr, ec] = std::from_chars(num.data(), num.data() + num.size(), len);
    if (ec != std::errc() || ptr != num.data() + num.size()) {
      throw std::invalid_argument("bad stepping-stone length in '" + std::string(text) + "'");
    }
    return stepping_stones(len);
  }
  throw std::invalid_argument("unknown behavior '" + std::string(text) + "'");
}

GaitProfile Behavior::profile() const {
  switch (kind) {
    case BehaviorKind::StairsUp:
    case BehaviorKind::StairsDown: return GaitProfile::Stairs;
    case BehaviorKind::RampUp:
    case BehaviorKind::RampDown: return GaitProfile::Slopes;
    case BehaviorKind::SteppingStones: return GaitProfile::Stones;
    default: return GaitProfile::Flat;
  }
}

bool Behavior::moves_forward() const {
  return kind != BehaviorKind::StairsDown && kind != BehaviorKind::Stand;
}

std::string_view profile_name(GaitProfile profile) {
  switch (profile) {
    case GaitProfile::Flat: return "flat";
    case GaitProfile::Stairs: return "stairs";
    case GaitProfile::Slopes: return "slopes";
    case GaitProfile::Stones: return "stones";
  }
  return "flat";
}

std::string_view phase_name(Phase phase) {
  switch (phase) {
    case Phase::Standing: return "standing";
    case Phase::Transfer: return "transfer";
    case Phase::Swing: return "swing";
  }
  return "standing";
}

PlanarPoint DoubleSupportPose::trailing_ankle(const LegGeometry& geom) const {
  return add(hip, forward_kinematics(geom, trailing));
}

PlanarPoint DoubleSupportPose::leading_ankle(const LegGeometry& geom) const {
  return add(hip, forward_kinematics(geom, leading));
}

double Terrain::height(double x) const {
  switch (kind) {
    case Kind::Ramp: return origin_z + (x - origin_x) * rise / run;
    case Kind::Stairs: return origin_z + rise * std::round((x - origin_x) / run);
    default: return origin_z;
  }
}

double Terrain::pitch() const { return kind == Kind::Ramp ? std::atan2(rise, run) : 0.0; }

StepTargets resolve_targets(const Behavior& behavior, const GaitParameters& params) {
  const double l = params.step_length;
  const double rise = std::abs(params.step_rise);
  const double lead = params.stance_lead_fraction * l;
  switch (behavior.kind) {
    case BehaviorKind::FlatWalk:
      return {l, 0.0, lead, params.transfer_hip_fraction, true, Terrain::Kind::Flat};
    case BehaviorKind::StairsUp:
    case BehaviorKind::StairsDown:
      return {l, rise, lead, params.transfer_hip_fraction, true, Terrain::Kind::Stairs};
    case BehaviorKind::RampUp:
      return {l, rise, l - params.ramp_hip_offset, params.transfer_hip_fraction, true,
              Terrain::Kind::Ramp};
    case BehaviorKind::RampDown:
      return {l, -rise, l - params.ramp_hip_offset, params.transfer_hip_fraction, false,
              Terrain::Kind::Ramp};
    case BehaviorKind::SteppingStones: {
      const double sl = Behavior::stepping_stones(behavior.step_length).step_length;
      return {sl, 0.0, params.stance_lead_fraction * sl, params.transfer_hip_fraction, true,
              Terrain::Kind::Stones};
    }
    case BehaviorKind::Stand: break;
  }
  throw IncompatibleBehaviorTransition("the stand behavior has no step targets");
}

DoubleSupportPose periodic_pose(const Behavior& behavior, const GaitParameters& params,
                                const LegGeometry& geom, double trailing_ground_x,
                                double trailing_ground_z) {
  const StepTargets tg = resolve_targets(behavior, params);
  const double reach = geom.max_reach();
  const double trail_dx = tg.step_length - tg.lead_offset;
  const double lead_reach = reach - kLeadReachMargin;
  if (std::abs(trail_dx) > reach || std::abs(tg.lead_offset) > lead_reach) {
    throw UnreachableTarget("standing pose does not fit the leg: step too long");
  }
  // The trailing leg is straight unless that would overstretch the leading one.
  const double height = std::min(std::sqrt(reach * reach - trail_dx * trail_dx),
                                 tg.rise + std::sqrt(lead_reach * lead_reach -
                                                     tg.lead_offset * tg.lead_offset));
  const double pitch = terrain_pitch(tg);

  DoubleSupportPose pose;
  pose.hip = {trailing_ground_x + trail_dx, trailing_ground_z + geom.ankle_height + height};
  pose.trailing = inverse_kinematics(geom, {-trail_dx, -height}).angles;
  pose.leading = inverse_kinematics(geom, {tg.lead_offset, tg.rise - height}).angles;
  pose.trailing.ankle = pitch - shank_angle(pose.trailing);
  pose.leading.ankle = pitch - shank_angle(pose.leading);
  return pose;
}

std::array<PlanarPoint, 4> compute_waypoints(const GaitParameters& params,
                                             const PlanarPoint& start,
                                             const PlanarPoint& goal) {
  const double dx = goal.x - start.x;
  const double dz = goal.z - start.z;
  if (std::hypot(dx, dz) < 1e-12) {
    throw DegenerateStep("swing start and goal coincide");
  }
  const double apex = std::max(start.z, goal.z) + params.swing_height;
  const double vx = params.step_length / params.swing_time;
  return {PlanarPoint{start.x, start.z, 0.0, 0.0},
          PlanarPoint{start.x + params.pct_back / 100.0 * dx, apex, vx, 0.0},
          PlanarPoint{start.x + (100.0 - params.pct_front) / 100.0 * dx, apex, vx, 0.0},
          PlanarPoint{goal.x, goal.z, 0.0, 0.0}};
}

SwingPlan plan_swing(const GaitParameters& params, const PlanarPoint& start,
                     const PlanarPoint& goal, const LegGeometry& geom, const HipMotion& hip,
                     const SwingAnkleProfile& ankle) {
  SwingPlan out;
  out.waypoints = compute_waypoints(params, start, goal);
  const auto& wp = out.waypoints;

  // Sub-durations proportional to straight-line waypoint spacing.
  std::array<double, 3> dist{};
  double total_dist = 0.0;
  for (int i = 0; i < 3; ++i) {
    dist[i] = std::hypot(wp[i + 1].x - wp[i].x, wp[i + 1].z - wp[i].z);
    total_dist += dist[i];
  }
  std::array<double, 3> dur{};
  dur[0] = params.swing_time * dist[0] / total_dist;
  dur[1] = params.swing_time * dist[1] / total_dist;
  dur[2] = params.swing_time - dur[0] - dur[1];
  out.times = {0.0, dur[0], dur[0] + dur[1], params.swing_time};

  for (int i = 0; i < 4; ++i) {
    const PlanarPoint h = hip ? hip(out.times[i]) : PlanarPoint{};
    const PlanarPoint rel{wp[i].x - h.x, wp[i].z - h.z, wp[i].vx - h.vx, wp[i].vz - h.vz};
    IkSolution ik;
    try {
      ik = inverse_kinematics(geom, rel);
    } catch (const UnreachableTarget& e) {
      throw UnreachableTarget("swing waypoint " + std::to_string(i) + ": " + e.what(), i);
    }
    JointVelocities qd;
    if (rel.vx != 0.0 || rel.vz != 0.0) {
      qd = joint_velocities_from_cartesian(geom, ik.angles, rel);
    }
    out.waypoint_joints[i] = {ik.angles, qd};
  }

  for (int i = 0; i < 3; ++i) {
    const auto& a = out.waypoint_joints[i];
    const auto& b = out.waypoint_joints[i + 1];
    out.joints.hip.append(QuinticSegment::fit(a.angles.hip, a.velocities.hip, b.angles.hip,
                                              b.velocities.hip, dur[i]));
    out.joints.knee.append(QuinticSegment::fit(a.angles.knee, a.velocities.knee,
                                               b.angles.knee, b.velocities.knee, dur[i]));
  }
  out.joints.ankle = swing_ankle(params, ankle);
  for (auto& s : out.waypoint_joints) s.angles.ankle = 0.0;
  out.waypoint_joints[0].angles.ankle = ankle.start;
  out.waypoint_joints[3].angles.ankle = ankle.landing;
  return out;
}

JointTrajectory plan_stance(const GaitParameters& params, const LegGeometry& geom,
                            const StanceInputs& in) {
  const double t_tr = params.transfer_time;
  const double t_sw = params.swing_time;
  const double hip_mid = transfer_hip_target(params, geom, in.start, in.transfer_advance);

  JointTrajectory out;
  out.hip.append(QuinticSegment::fit(in.start.hip, 0.0, hip_mid, 0.0, t_tr));
  out.hip.append(QuinticSegment::fit(hip_mid, 0.0, in.end.hip, 0.0, t_sw));
  out.knee.append(QuinticSegment::hold(in.start.knee, t_tr));
  out.knee.append(QuinticSegment::fit(in.start.knee, 0.0, in.end.knee, 0.0, t_sw));
  // Foot stays flat on the ground: ankle = ground pitch - (hip - knee).
  PiecewiseQuintic flat({QuinticSegment::hold(in.ground_pitch, t_tr),
                         QuinticSegment::hold(in.ground_pitch, t_sw)});
  out.ankle = flat.plus(out.hip, -1.0).plus(out.knee, 1.0);
  return out;
}

TransferPlan plan_transfer(const GaitParameters& params, const LegGeometry& geom,
                           const TransferInputs& in) {
  const double t_tr = params.transfer_time;
  const bool toe_off = params.toe_off_angle > 0.0;
  const double target = toe_off ? -params.toe_off_angle : in.trailing_ankle_start;
  const double deepest = in.fast_toe_off ? target - params.fast_toeoff_extra : target;
  if (!geom.limits.ankle.contains(target) || !geom.limits.ankle.contains(deepest)) {
    std::ostringstream os;
    os << "toe-off ankle angle " << rad2deg(deepest) << " deg outside ["
       << rad2deg(geom.limits.ankle.min) << ", " << rad2deg(geom.limits.ankle.max) << "]";
    throw JointLimitExceeded(os.str());
  }

  TransferPlan out;
  out.trailing_ankle =
      toe_off ? rest_to_rest(in.trailing_ankle_start, target, t_tr)
              : PiecewiseQuintic({QuinticSegment::hold(in.trailing_ankle_start, t_tr)});
  out.leading_hip = rest_to_rest(
      in.leading.hip, transfer_hip_target(params, geom, in.leading, in.hip_advance), t_tr);
  if (in.fast_toe_off && params.fast_toeoff_extra > 0.0 && params.fast_toeoff_duration > 0.0) {
    out.fast_toe_off = PiecewiseQuintic(
        fast_toe_off_segments(target, params.fast_toeoff_extra, params.fast_toeoff_duration));
  }
  return out;
}

double StepPlan::duration() const {
  double d = 0.0;
  for (const auto& p : phases) d += p.duration;
  return d;
}

double StepPlan::phase_duration(Phase p) const {
  for (const auto& span : phases) {
    if (span.phase == p) return span.duration;
  }
  return 0.0;
}

const PhaseSpan& StepPlan::phase_at(double t) const {
  const PhaseSpan* current = &phases.front();
  for (const auto& span : phases) {
    if (t >= span.start - 1e-12) current = &span;
  }
  return *current;
}

JointState StepPlan::moving_at(double t) const { return moving.evaluate(t); }
JointState StepPlan::support_at(double t) const { return stance.evaluate(t); }

PlanarPoint StepPlan::hip_at(const LegGeometry& geom, double t) const {
  return stance_hip(geom, stance_ankle, stance.evaluate(t));
}

PlanarPoint StepPlan::moving_ankle_at(const LegGeometry& geom, double t) const {
  const PlanarPoint h = hip_at(geom, t);
  const JointState q = moving.evaluate(t);
  const PlanarPoint rel = forward_kinematics(geom, q.angles);
  const PlanarPoint v = cartesian_velocity(geom, q.angles, q.velocities);
  return {h.x + rel.x, h.z + rel.z, h.vx + v.vx, h.vz + v.vz};
}

StepPlan without_toe_off(const StepPlan& plan, const GaitParameters& params) {
  if (plan.reversed) throw std::invalid_argument("toe-off removal expects a forward plan");
  StepPlan out = plan;
  const double start = plan.transfer.ankle.evaluate(0.0).position;
  const double landing = plan.swing.ankle.evaluate(plan.swing.ankle.duration()).position;
  out.transfer.ankle = PiecewiseQuintic({QuinticSegment::hold(start, params.transfer_time)});
  out.swing.ankle = swing_ankle(params, {start, landing, false});
  out.moving = out.transfer;
  out.moving.append(out.swing);
  return out;
}

StepPlan plan_step(const Behavior& behavior, const GaitParameters& params,
                   const LegGeometry& geom, const PlanningContext& current) {
  StepPlan plan;
  if (behavior.kind == BehaviorKind::Stand) {
    throw IncompatibleBehaviorTransition("the stand behavior does not take steps");
  }
  if (behavior.kind == BehaviorKind::StairsDown) {
    if (!current.descent_ready) {
      throw IncompatibleBehaviorTransition(
          "stairs descent requires facing up the stairs; acknowledge the turn-around first");
    }
    // Descent replays the ascent step that would have arrived at the current
    // pose, backwards and without toe-off.
    const StepTargets tg = resolve_targets(Behavior::stairs_up(), params);
    const PlanarPoint lower = current.pose.trailing_ankle(geom);
    const DoubleSupportPose below =
        periodic_pose(Behavior::stairs_up(), params, geom, lower.x - tg.step_length,
                      lower.z - geom.ankle_height - tg.rise);
    const StepPlan up = plan_forward(Behavior::stairs_up(), params, geom, below);
    plan = reverse_plan(without_toe_off(up, params));
    plan.behavior = behavior;
    const auto& s = plan.start_pose;
    const auto& c = current.pose;
    if (!same_angles(s.trailing, c.trailing, kPoseMatchTolerance) ||
        !same_angles(s.leading, c.leading, kPoseMatchTolerance) ||
        std::abs(s.hip.x - c.hip.x) > kPoseMatchTolerance ||
        std::abs(s.hip.z - c.hip.z) > kPoseMatchTolerance) {
      throw IncompatibleBehaviorTransition(
          "current stance is not a stairs pose; descent must start from one");
    }
  } else {
    plan = plan_forward(behavior, params, geom, current.pose);
  }
  check_joint_limits(plan, geom);
  return plan;
}

void check_joint_limits(const StepPlan& plan, const LegGeometry& geom, double dt) {
  const auto& lim = geom.limits;
  auto check = [&](const char* leg, double t, const JointState& s) {
    const double speed = std::max({std::abs(s.velocities.hip), std::abs(s.velocities.knee),
                                   std::abs(s.velocities.ankle)});
    if (!within_limits(lim, s.angles) || speed > lim.max_speed) {
      std::ostringstream os;
      os << plan.behavior.name() << ": " << leg << " leg leaves its joint limits at t = " << t
         << " s (hip " << rad2deg(s.angles.hip) << ", knee " << rad2deg(s.angles.knee)
         << ", ankle " << rad2deg(s.angles.ankle) << " deg, peak rate " << speed
         << " rad/s)";
      throw JointLimitExceeded(os.str());
    }
  };
  const double total = plan.duration();
  const std::size_t n = sample_count(total, dt);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = i + 1 == n ? total : static_cast<double>(i) * dt;
    check("moving", t, plan.moving_at(t));
    check("support", t, plan.support_at(t));
  }
}

}  // namespace exogait
