#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "exogait/errors.hpp"
#include "exogait/gait_planner.hpp"
#include "exogait/parameter_store.hpp"
#include "test_util.hpp"

namespace exogait {
namespace {

const LegGeometry kGeom{};
constexpr double kDt = 0.002;

GaitParameters preset(GaitProfile p) { return builtin_preset(p).params; }

StepPlan first_step(const Behavior& b, const GaitParameters& params) {
  return plan_step(b, params, kGeom, {periodic_pose(b, params, kGeom), false});
}

// Plans `n` consecutive steps starting from the periodic pose.
std::vector<StepPlan> walk(const Behavior& b, const GaitParameters& params, int n) {
  std::vector<StepPlan> plans;
  PlanningContext ctx{periodic_pose(b, params, kGeom), false};
  for (int i = 0; i < n; ++i) {
    plans.push_back(plan_step(b, params, kGeom, ctx));
    ctx.pose = plans.back().end_pose;
  }
  return plans;
}

double swing_start(const StepPlan& p) {
  for (const auto& s : p.phases) {
    if (s.phase == Phase::Swing) return s.start;
  }
  return 0.0;
}

TEST(Waypoints, FlatExample) {
  const auto wp = compute_waypoints(preset(GaitProfile::Flat), {0, 0}, {0.4, 0});
  EXPECT_NEAR(wp[0].x, 0.0, 1e-15);
  EXPECT_NEAR(wp[1].x, 0.06, 1e-12);
  EXPECT_NEAR(wp[1].z, 0.1, 1e-12);
  EXPECT_NEAR(wp[2].x, 0.34, 1e-12);
  EXPECT_NEAR(wp[2].z, 0.1, 1e-12);
  EXPECT_NEAR(wp[3].x, 0.4, 1e-15);
  EXPECT_NEAR(wp[1].vx, 0.4, 1e-12);
  EXPECT_EQ(wp[1].vz, 0.0);
  EXPECT_EQ(wp[0].vx, 0.0);
  EXPECT_EQ(wp[3].vx, 0.0);
}

TEST(Waypoints, StairsApexClearsUpperTread) {
  const auto wp = compute_waypoints(preset(GaitProfile::Stairs), {0, 0}, {0.29, 0.18});
  EXPECT_NEAR(wp[1].x, 0.058, 1e-12);
  EXPECT_NEAR(wp[1].z, 0.33, 1e-12);
  EXPECT_NEAR(wp[2].x, 0.232, 1e-12);
  EXPECT_NEAR(wp[2].z, 0.33, 1e-12);
}

TEST(Waypoints, CoincidentStartAndGoalIsDegenerate) {
  EXPECT_THROW(compute_waypoints(preset(GaitProfile::Flat), {0.1, 0.2}, {0.1, 0.2}),
               DegenerateStep);
}

TEST(SwingPlan, HipFrameWaypointsAreReproduced) {
  const auto params = preset(GaitProfile::Flat);
  const auto swing = plan_swing(params, {-0.24, -0.80}, {0.16, -0.80}, kGeom);
  for (int i = 0; i < 4; ++i) {
    const auto q = swing.joints.evaluate(swing.times[i]);
    const auto p = forward_kinematics(kGeom, q.angles);
    EXPECT_NEAR(p.x, swing.waypoints[i].x, 1e-6);
    EXPECT_NEAR(p.z, swing.waypoints[i].z, 1e-6);
    const auto v = cartesian_velocity(kGeom, q.angles, q.velocities);
    EXPECT_NEAR(v.vx, swing.waypoints[i].vx, 1e-6);
    EXPECT_NEAR(v.vz, swing.waypoints[i].vz, 1e-6);
  }
  EXPECT_DOUBLE_EQ(swing.times[3], params.swing_time);
}

TEST(SwingPlan, UnreachableWaypointReportsIndex) {
  try {
    plan_swing(preset(GaitProfile::Flat), {-0.24, -0.80}, {0.16, -0.80}, kGeom,
               [](double) { return PlanarPoint{0.0, 0.5}; });
    FAIL() << "expected UnreachableTarget";
  } catch (const UnreachableTarget& e) {
    EXPECT_EQ(e.waypoint_index(), 0);
  }
}

TEST(StepPlan, FlatStepTimingAndPhases) {
  const auto plan = first_step(Behavior::flat(), preset(GaitProfile::Flat));
  ASSERT_EQ(plan.phases.size(), 2u);
  EXPECT_EQ(plan.phases[0].phase, Phase::Transfer);
  EXPECT_EQ(plan.phases[1].phase, Phase::Swing);
  EXPECT_DOUBLE_EQ(plan.duration(), 1.4);
  EXPECT_EQ(plan.phase_at(0.4).phase, Phase::Swing);
  EXPECT_EQ(plan.phase_at(0.3999).phase, Phase::Transfer);
}

TEST(StepPlan, WorldWaypointsLieOnTheSwingPath) {
  for (const auto& b : {Behavior::flat(), Behavior::stairs_up(), Behavior::ramp_up(),
                        Behavior::stepping_stones(0.5)}) {
    const auto plan = first_step(b, builtin_preset(b.profile()).params);
    for (int i = 0; i < 4; ++i) {
      const auto p = plan.moving_ankle_at(kGeom, plan.waypoint_times[i]);
      EXPECT_NEAR(p.x, plan.waypoints[i].x, 1e-6) << b.name() << " waypoint " << i;
      EXPECT_NEAR(p.z, plan.waypoints[i].z, 1e-6) << b.name() << " waypoint " << i;
    }
  }
}

TEST(StepPlan, FlatMiddleSegmentStaysNearApex) {
  const auto params = preset(GaitProfile::Flat);
  const auto plan = first_step(Behavior::flat(), params);
  const double apex = plan.waypoints[1].z;
  EXPECT_NEAR(apex - plan.waypoints[0].z, params.swing_height, 1e-12);
  for (double t = plan.waypoint_times[1]; t <= plan.waypoint_times[2]; t += kDt) {
    EXPECT_GE(plan.moving_ankle_at(kGeom, t).z, apex - 1e-3) << "t = " << t;
  }
}

TEST(StepPlan, StepStartsAndEndsAtRest) {
  for (const auto& b : {Behavior::flat(), Behavior::stairs_up(), Behavior::ramp_down()}) {
    const auto plan = first_step(b, builtin_preset(b.profile()).params);
    for (double t : {0.0, plan.duration()}) {
      for (const auto& s : {plan.moving_at(t), plan.support_at(t)}) {
        EXPECT_NEAR(s.velocities.hip, 0.0, 1e-9) << b.name();
        EXPECT_NEAR(s.velocities.knee, 0.0, 1e-9) << b.name();
        EXPECT_NEAR(s.velocities.ankle, 0.0, 1e-9) << b.name();
      }
    }
  }
}

TEST(StepPlan, FlatSwingHipHasOnePeak) {
  const auto plan = first_step(Behavior::flat(), preset(GaitProfile::Flat));
  std::vector<double> hip;
  for (double t = swing_start(plan); t <= plan.duration(); t += kDt) {
    hip.push_back(plan.moving_at(t).angles.hip);
  }
  EXPECT_EQ(testing::slope_sign_changes(hip), 1);
  const auto peak = std::max_element(hip.begin(), hip.end());
  EXPECT_GT(*peak, hip.front());
  EXPECT_GT(*peak, hip.back());
}

TEST(StepPlan, FlatStanceAdvancesOneStepWithMonotoneHip) {
  const auto params = preset(GaitProfile::Flat);
  const auto plan = first_step(Behavior::flat(), params);
  const auto h0 = plan.hip_at(kGeom, 0.0), h1 = plan.hip_at(kGeom, plan.duration());
  EXPECT_NEAR(h1.x - h0.x, params.step_length, 1e-9);
  EXPECT_NEAR(h1.z, h0.z, 1e-9);
  std::vector<double> hip;
  for (double t = 0.0; t <= plan.duration(); t += kDt) {
    hip.push_back(plan.support_at(t).angles.hip);
  }
  EXPECT_TRUE(testing::non_increasing(hip));
  // The support leg hands over straight as the next trailing leg.
  EXPECT_LT(plan.support_at(plan.duration()).angles.knee, deg2rad(1.0));
}

TEST(StepPlan, ToeOffAngleReachedAtEndOfTransfer) {
  const auto params = preset(GaitProfile::Flat);
  const auto plan = first_step(Behavior::flat(), params);
  EXPECT_NEAR(plan.moving_at(params.transfer_time).angles.ankle, -params.toe_off_angle, 1e-12);
}

TEST(StepPlan, ZeroToeOffKeepsTransferAnkleConstant) {
  auto params = preset(GaitProfile::Flat);
  params.toe_off_angle = 0.0;
  const auto plan = first_step(Behavior::flat(), params);
  const double a0 = plan.moving_at(0.0).angles.ankle;
  for (double t = 0.0; t <= params.transfer_time; t += kDt) {
    EXPECT_NEAR(plan.moving_at(t).angles.ankle, a0, 1e-12);
  }
  // The fast impulse still fires at the start of swing.
  double lowest = a0;
  for (double t = params.transfer_time; t <= plan.duration(); t += kDt) {
    lowest = std::min(lowest, plan.moving_at(t).angles.ankle);
  }
  EXPECT_LT(lowest, a0 - 0.5 * params.fast_toeoff_extra);
}

TEST(StepPlan, StairsStepDuration) {
  const auto plan = first_step(Behavior::stairs_up(), preset(GaitProfile::Stairs));
  EXPECT_NEAR(plan.duration(), 2.7, 1e-12);
  EXPECT_NEAR(plan.end_pose.hip.z - plan.start_pose.hip.z, 0.18, 1e-9);
}

TEST(StepPlan, StairsDescentRequiresTurnAround) {
  const auto params = preset(GaitProfile::Stairs);
  const auto pose = periodic_pose(Behavior::stairs_up(), params, kGeom);
  EXPECT_THROW(plan_step(Behavior::stairs_down(), params, kGeom, {pose, false}),
               IncompatibleBehaviorTransition);
  EXPECT_NO_THROW(plan_step(Behavior::stairs_down(), params, kGeom, {pose, true}));
  const auto flat = periodic_pose(Behavior::flat(), preset(GaitProfile::Flat), kGeom);
  EXPECT_THROW(plan_step(Behavior::stairs_down(), params, kGeom, {flat, true}),
               IncompatibleBehaviorTransition);
}

TEST(StepPlan, StairsDescentIsTheAscentReversedWithoutToeOff) {
  const auto params = preset(GaitProfile::Stairs);
  const auto top = periodic_pose(Behavior::stairs_up(), params, kGeom, 0.0, 0.0);
  const auto down = plan_step(Behavior::stairs_down(), params, kGeom, {top, true});
  const auto below = periodic_pose(Behavior::stairs_up(), params, kGeom, -params.step_length,
                                   -params.step_rise);
  const auto up = without_toe_off(
      plan_step(Behavior::stairs_up(), params, kGeom, {below, false}), params);
  const double D = up.duration();
  ASSERT_NEAR(down.duration(), D, 1e-12);
  EXPECT_EQ(down.phases.front().phase, Phase::Swing);
  EXPECT_EQ(down.phases.back().phase, Phase::Transfer);
  double worst = 0.0;
  for (double t = 0.0; t <= D; t += kDt) {
    const auto a = down.moving_at(t).angles, b = up.moving_at(D - t).angles;
    const auto c = down.support_at(t).angles, d = up.support_at(D - t).angles;
    worst = std::max({worst, std::abs(a.hip - b.hip), std::abs(a.knee - b.knee),
                      std::abs(a.ankle - b.ankle), std::abs(c.hip - d.hip),
                      std::abs(c.knee - d.knee), std::abs(c.ankle - d.ankle)});
  }
  EXPECT_LT(worst, 1e-9);
}

TEST(StepPlan, StairsDescentHasNoToeOff) {
  const auto params = preset(GaitProfile::Stairs);
  const auto top = periodic_pose(Behavior::stairs_up(), params, kGeom);
  const auto down = plan_step(Behavior::stairs_down(), params, kGeom, {top, true});
  const double a0 = down.moving_at(0.0).angles.ankle;
  const double a1 = down.moving_at(down.duration()).angles.ankle;
  for (double t = 0.0; t <= down.duration(); t += kDt) {
    EXPECT_GE(down.moving_at(t).angles.ankle, std::min(a0, a1) - 1e-9);
  }
}

TEST(StepPlan, SteppingStoneBounds) {
  EXPECT_THROW(Behavior::stepping_stones(0.70), std::invalid_argument);
  EXPECT_THROW(Behavior::stepping_stones(0.34), std::invalid_argument);
  EXPECT_NO_THROW(Behavior::stepping_stones(0.35));
  EXPECT_NO_THROW(Behavior::stepping_stones(0.69));
  const auto params = preset(GaitProfile::Stones);
  for (double l : {0.35, 0.5, 0.69}) {
    const auto plans = walk(Behavior::stepping_stones(l), params, 3);
    const auto& last = plans.back();
    EXPECT_NEAR(last.waypoints[3].x - last.stance_ankle.x, l, 1e-6) << "step " << l;
  }
}

TEST(StepPlan, SwingSoleStaysAboveTerrain) {
  for (const auto& b : {Behavior::flat(), Behavior::stairs_up(), Behavior::ramp_up(),
                        Behavior::ramp_down(), Behavior::stepping_stones(0.5)}) {
    const auto params = builtin_preset(b.profile()).params;
    const auto plan = walk(b, params, 2).back();
    for (double t = swing_start(plan); t <= plan.duration(); t += kDt) {
      const auto a = plan.moving_ankle_at(kGeom, t);
      const double sole = a.z - kGeom.ankle_height;
      EXPECT_GE(sole - plan.terrain.height(a.x), -1e-6) << b.name() << " t = " << t;
    }
  }
}

TEST(StepPlan, ApexWithinFivePercentForPresets) {
  for (const auto& b : {Behavior::flat(), Behavior::stairs_up(), Behavior::ramp_up(),
                        Behavior::stepping_stones(0.5)}) {
    const auto params = builtin_preset(b.profile()).params;
    const auto plan = walk(b, params, 2).back();
    double peak = -1e9;
    for (double t = swing_start(plan); t <= plan.duration(); t += kDt / 4) {
      peak = std::max(peak, plan.moving_ankle_at(kGeom, t).z);
    }
    EXPECT_NEAR(peak, plan.waypoints[1].z, 0.05 * params.swing_height) << b.name();
  }
}

TEST(StepPlan, PresetsRespectJointLimitsAndSpeedCap) {
  for (const auto& b : {Behavior::flat(), Behavior::stairs_up(), Behavior::ramp_up(),
                        Behavior::ramp_down(), Behavior::stepping_stones(0.35),
                        Behavior::stepping_stones(0.69)}) {
    const auto params = builtin_preset(b.profile()).params;
    for (const auto& plan : walk(b, params, 3)) {
      EXPECT_NO_THROW(check_joint_limits(plan, kGeom, kDt)) << b.name();
    }
  }
}

TEST(StepPlan, ConsecutiveStepsJoinContinuously) {
  const auto plans = walk(Behavior::flat(), preset(GaitProfile::Flat), 3);
  for (std::size_t i = 1; i < plans.size(); ++i) {
    const auto& prev = plans[i - 1];
    const auto& next = plans[i];
    const double D = prev.duration();
    // The leg that supported the previous step swings next.
    const auto a = prev.support_at(D).angles, b = next.moving_at(0.0).angles;
    EXPECT_NEAR(a.hip, b.hip, 1e-9);
    EXPECT_NEAR(a.knee, b.knee, 1e-9);
    EXPECT_NEAR(a.ankle, b.ankle, 1e-9);
    const auto c = prev.moving_at(D).angles, d = next.support_at(0.0).angles;
    EXPECT_NEAR(c.hip, d.hip, 1e-9);
    EXPECT_NEAR(c.knee, d.knee, 1e-9);
    EXPECT_NEAR(c.ankle, d.ankle, 1e-9);
  }
}

TEST(StepPlan, ParameterChangeTakesEffectOnNextStep) {
  auto params = preset(GaitProfile::Flat);
  const auto first = first_step(Behavior::flat(), params);
  params.step_length = 0.3;
  params.swing_time = 0.8;
  const auto second = plan_step(Behavior::flat(), params, kGeom, {first.end_pose, false});
  EXPECT_DOUBLE_EQ(second.duration(), 1.2);
  const auto third = plan_step(Behavior::flat(), params, kGeom, {second.end_pose, false});
  EXPECT_NEAR(third.hip_at(kGeom, third.duration()).x - third.hip_at(kGeom, 0).x, 0.3, 1e-9);
}

TEST(StepPlan, StandDoesNotPlan) {
  const auto params = preset(GaitProfile::Flat);
  EXPECT_THROW(first_step(Behavior::stand(), params), IncompatibleBehaviorTransition);
}

TEST(BehaviorName, RoundTrips) {
  for (const auto& b : {Behavior::flat(), Behavior::stairs_up(), Behavior::stairs_down(),
                        Behavior::ramp_up(), Behavior::ramp_down(), Behavior::stand(),
                        Behavior::stepping_stones(0.5), Behavior::stepping_stones(0.6123)}) {
    EXPECT_EQ(Behavior::parse(b.name()), b);
  }
  EXPECT_THROW(Behavior::parse("jog"), std::invalid_argument);
  EXPECT_THROW(Behavior::parse("stones:0.9"), std::invalid_argument);
}

}  // namespace
}  // namespace exogait
