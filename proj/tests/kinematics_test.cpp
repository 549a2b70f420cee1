#include <gtest/gtest.h>

#include <cmath>
#include <complex>
#include <random>

#include "exogait/errors.hpp"
#include "exogait/kinematics.hpp"

namespace exogait {
namespace {

const LegGeometry kGeom{};

// Ankle position by chaining rotations in the complex plane; the leg hangs
// along -i at zero angles and positive angles swing it forward.
std::complex<double> chain_oracle(double l1, double l2, double hip, double knee) {
  const std::complex<double> down(0.0, -1.0);
  const auto rot = [](double a) { return std::polar(1.0, a); };
  return l1 * down * rot(hip) + l2 * down * rot(hip - knee);
}

PlanarPoint integrate_path(const LegGeometry& g, const JointAngles& target, int steps) {
  // Integrates the Jacobian along the straight joint-space path from the
  // hanging leg with classic RK4.
  double x = 0.0, z = -(g.thigh_length + g.shank_length);
  const JointVelocities rate{target.hip, target.knee, 0.0};
  auto deriv = [&](double s) {
    const JointAngles q{s * target.hip, s * target.knee, 0.0};
    return cartesian_velocity(g, q, rate);
  };
  const double h = 1.0 / steps;
  for (int i = 0; i < steps; ++i) {
    const double s = i * h;
    const auto k1 = deriv(s), k2 = deriv(s + h / 2), k3 = deriv(s + h / 2), k4 = deriv(s + h);
    x += h / 6 * (k1.vx + 2 * k2.vx + 2 * k3.vx + k4.vx);
    z += h / 6 * (k1.vz + 2 * k2.vz + 2 * k3.vz + k4.vz);
  }
  return {x, z};
}

TEST(ForwardKinematics, StraightLegHangsAtFullReach) {
  const auto p = forward_kinematics(kGeom, {0, 0, 0});
  EXPECT_NEAR(p.x, 0.0, 1e-15);
  EXPECT_NEAR(p.z, -0.87, 1e-15);
}

TEST(ForwardKinematics, HorizontalLeg) {
  const auto p = forward_kinematics(kGeom, {deg2rad(90), 0, 0});
  EXPECT_NEAR(p.x, 0.87, 1e-15);
  EXPECT_NEAR(p.z, 0.0, 1e-15);
}

TEST(ForwardKinematics, BentLegMatchesHandValues) {
  // hip 30, knee 60: thigh at +30 deg, shank at -30 deg from vertical.
  const auto p = forward_kinematics(kGeom, {deg2rad(30), deg2rad(60), 0});
  EXPECT_NEAR(p.x, 0.44 * 0.5 - 0.43 * 0.5, 1e-15);
  EXPECT_NEAR(p.z, -0.87 * std::sqrt(3.0) / 2.0, 1e-15);
}

TEST(ForwardKinematics, MatchesRotationChainAndIntegratedPath) {
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> hip(deg2rad(-45), deg2rad(85));
  std::uniform_real_distribution<double> knee(0.0, deg2rad(130));
  for (int i = 0; i < 50; ++i) {
    const JointAngles q{hip(rng), knee(rng), 0.0};
    const auto p = forward_kinematics(kGeom, q);
    const auto c = chain_oracle(kGeom.thigh_length, kGeom.shank_length, q.hip, q.knee);
    EXPECT_NEAR(p.x, c.real(), 1e-14);
    EXPECT_NEAR(p.z, c.imag(), 1e-14);
    const auto integ = integrate_path(kGeom, q, 400);
    EXPECT_NEAR(p.x, integ.x, 1e-9);
    EXPECT_NEAR(p.z, integ.z, 1e-9);
  }
}

TEST(ForwardKinematics, LipschitzInEachJoint) {
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> angle(-1.0, 2.0);
  std::uniform_real_distribution<double> delta(-0.1, 0.1);
  const double reach = kGeom.max_reach();
  for (int i = 0; i < 1000; ++i) {
    JointAngles q{angle(rng), std::abs(angle(rng)), 0.0};
    const auto p = forward_kinematics(kGeom, q);
    const double d = delta(rng);
    for (double JointAngles::*joint : {&JointAngles::hip, &JointAngles::knee}) {
      JointAngles moved = q;
      moved.*joint += d;
      const auto m = forward_kinematics(kGeom, moved);
      EXPECT_LE(std::hypot(m.x - p.x, m.z - p.z), reach * std::abs(d) + 1e-15);
    }
  }
}

TEST(InverseKinematics, FullExtensionIsStraight) {
  const auto sol = inverse_kinematics(kGeom, {0.0, -0.87});
  EXPECT_NEAR(sol.angles.hip, 0.0, 1e-12);
  EXPECT_NEAR(sol.angles.knee, 0.0, 1e-12);
  EXPECT_TRUE(sol.near_singular);
}

TEST(InverseKinematics, FlatSwingMidpointRoundTrip) {
  const PlanarPoint target{0.06, -0.77};
  const auto sol = inverse_kinematics(kGeom, target);
  EXPECT_FALSE(sol.near_singular);
  const auto p = forward_kinematics(kGeom, sol.angles);
  EXPECT_LT(std::hypot(p.x - target.x, p.z - target.z), 1e-9);
}

TEST(InverseKinematics, BeyondReachThrows) {
  EXPECT_THROW(inverse_kinematics(kGeom, {0.0, -0.88}), UnreachableTarget);
}

TEST(InverseKinematics, InsideInnerAnnulusThrows) {
  // Inner radius |0.44 - 0.43| = 0.01 plus the 1 mm margin.
  EXPECT_THROW(inverse_kinematics(kGeom, {0.0, -0.0105}), UnreachableTarget);
  EXPECT_NO_THROW(inverse_kinematics(kGeom, {0.0, -0.0115}));
}

TEST(InverseKinematics, RandomAnnulusRoundTripKeepsKneeBranch) {
  std::mt19937 rng(1234);
  const double lo = kGeom.min_reach() + 1e-3, hi = kGeom.max_reach() - 1e-3;
  std::uniform_real_distribution<double> radius(lo, hi);
  std::uniform_real_distribution<double> angle(-std::numbers::pi, std::numbers::pi);
  for (int i = 0; i < 1000; ++i) {
    const double r = radius(rng), a = angle(rng);
    const PlanarPoint target{r * std::sin(a), -r * std::cos(a)};
    const auto sol = inverse_kinematics(kGeom, target);
    EXPECT_GE(sol.angles.knee, 0.0);
    const auto p = forward_kinematics(kGeom, sol.angles);
    ASSERT_LT(std::hypot(p.x - target.x, p.z - target.z), 1e-9) << "sample " << i;
  }
}

TEST(InverseKinematics, NearSingularFlagCoversSmallKneeAndOuterBand) {
  const auto bent = forward_kinematics(kGeom, {0.2, deg2rad(10.0), 0});
  EXPECT_FALSE(inverse_kinematics(kGeom, bent).near_singular);
  const auto almost = forward_kinematics(kGeom, {0.2, deg2rad(0.5), 0});
  EXPECT_TRUE(inverse_kinematics(kGeom, almost).near_singular);
  // Knee 2 deg is above the knee threshold but within 1 mm of full reach.
  const auto band = forward_kinematics(kGeom, {0.2, deg2rad(2.0), 0});
  EXPECT_TRUE(inverse_kinematics(kGeom, band).near_singular);
}

TEST(Jacobian, MatchesCentralDifferences) {
  std::mt19937 rng(99);
  std::uniform_real_distribution<double> hip(deg2rad(-45), deg2rad(85));
  std::uniform_real_distribution<double> knee(deg2rad(5), deg2rad(125));
  const double h = 1e-6;
  for (int i = 0; i < 1000; ++i) {
    const JointAngles q{hip(rng), knee(rng), 0.0};
    const auto j = leg_jacobian(kGeom, q);
    double fd[4];
    for (int c = 0; c < 2; ++c) {
      JointAngles plus = q, minus = q;
      (c == 0 ? plus.hip : plus.knee) += h;
      (c == 0 ? minus.hip : minus.knee) -= h;
      const auto a = forward_kinematics(kGeom, plus), b = forward_kinematics(kGeom, minus);
      fd[c] = (a.x - b.x) / (2 * h);
      fd[2 + c] = (a.z - b.z) / (2 * h);
    }
    double err = 0.0, norm = 0.0;
    for (int k = 0; k < 4; ++k) {
      err += (j[k] - fd[k]) * (j[k] - fd[k]);
      norm += j[k] * j[k];
    }
    ASSERT_LT(std::sqrt(err / norm), 1e-6) << "sample " << i;
  }
}

TEST(Jacobian, DeterminantIsLinkProductTimesSinKnee) {
  const JointAngles q{0.3, 0.7, 0.0};
  const auto j = leg_jacobian(kGeom, q);
  EXPECT_NEAR(j[0] * j[3] - j[1] * j[2], 0.44 * 0.43 * std::sin(0.7), 1e-15);
}

TEST(JointVelocities, ZeroMapsToZero) {
  const auto qd = joint_velocities_from_cartesian(kGeom, {0.4, 0.9, 0}, {0, 0, 0, 0});
  EXPECT_EQ(qd.hip, 0.0);
  EXPECT_EQ(qd.knee, 0.0);
}

TEST(JointVelocities, ReproduceCartesianVelocityByFiniteDifference) {
  const JointAngles q{deg2rad(30), deg2rad(60), 0};
  const PlanarPoint v{0, 0, 0.1, 0.0};
  const auto qd = joint_velocities_from_cartesian(kGeom, q, v);
  const auto back = cartesian_velocity(kGeom, q, qd);
  EXPECT_NEAR(back.vx, 0.1, 1e-9);
  EXPECT_NEAR(back.vz, 0.0, 1e-9);

  const double h = 1e-6;
  const auto a = forward_kinematics(kGeom, {q.hip + h * qd.hip, q.knee + h * qd.knee, 0});
  const auto b = forward_kinematics(kGeom, {q.hip - h * qd.hip, q.knee - h * qd.knee, 0});
  EXPECT_NEAR((a.x - b.x) / (2 * h), 0.1, 1e-8);
  EXPECT_NEAR((a.z - b.z) / (2 * h), 0.0, 1e-8);
}

TEST(JointVelocities, StraightLegIsSingular) {
  EXPECT_THROW(joint_velocities_from_cartesian(kGeom, {1e-9, 1e-9, 0}, {0, 0, 0.1, 0}),
               SingularJacobian);
}

TEST(Limits, DefaultWindowsSpan130Degrees) {
  const JointLimits lim;
  EXPECT_NEAR(lim.hip.max - lim.hip.min, deg2rad(130), 1e-12);
  EXPECT_NEAR(lim.knee.max - lim.knee.min, deg2rad(130), 1e-12);
  EXPECT_NEAR(lim.ankle.max - lim.ankle.min, deg2rad(130), 1e-12);
  EXPECT_DOUBLE_EQ(lim.max_speed, 9.0);
  EXPECT_TRUE(within_limits(lim, {0, 0, 0}));
  EXPECT_FALSE(within_limits(lim, {0, -0.01, 0}));
}

TEST(Geometry, RejectsNonPositiveLengths) {
  LegGeometry g;
  g.shank_length = 0.0;
  EXPECT_THROW(g.validate(), std::invalid_argument);
}

}  // namespace
}  // namespace exogait
