#pragma once

#include <array>
#include <numbers>

namespace exogait {

constexpr double deg2rad(double deg) { return deg * std::numbers::pi / 180.0; }
constexpr double rad2deg(double rad) { return rad * 180.0 / std::numbers::pi; }

struct JointRange {
  double min;
  double max;
  bool contains(double q, double tol = 1e-9) const {
    return q >= min - tol && q <= max + tol;
  }
};

// Range-of-motion windows for one leg. Each default window spans 130 degrees
// and the speed cap is the actuator no-load velocity.
struct JointLimits {
  JointRange hip{deg2rad(-45.0), deg2rad(85.0)};
  JointRange knee{0.0, deg2rad(130.0)};
  JointRange ankle{deg2rad(-65.0), deg2rad(65.0)};
  double max_speed = 9.0;  // rad/s
};

// Planar sagittal leg: hip pitch, knee flexion, ankle pitch.
struct LegGeometry {
  double thigh_length = 0.44;         // m
  double shank_length = 0.43;         // m
  double foot_forward_length = 0.15;  // m, ankle to toe
  double ankle_height = 0.08;         // m, ankle joint above sole
  JointLimits limits{};

  double max_reach() const { return thigh_length + shank_length; }
  double min_reach() const;
  // Throws std::invalid_argument when a length is not strictly positive.
  void validate() const;
};

// Sign conventions: hip > 0 is flexion (thigh forward of vertical), knee > 0
// is flexion (0 = straight), ankle > 0 is dorsiflexion.
struct JointAngles {
  double hip = 0.0;
  double knee = 0.0;
  double ankle = 0.0;
};

struct JointVelocities {
  double hip = 0.0;
  double knee = 0.0;
  double ankle = 0.0;
};

struct JointState {
  JointAngles angles;
  JointVelocities velocities;
};

// Sagittal point with velocity. x forward, z up.
struct PlanarPoint {
  double x = 0.0;
  double z = 0.0;
  double vx = 0.0;
  double vz = 0.0;
};

struct IkSolution {
  JointAngles angles;
  // Knee below the near-singular threshold: the Jacobian is close to rank 1.
  bool near_singular = false;
};

struct KinematicsTolerances {
  double reach = 1e-3;               // m
  double knee = deg2rad(1.0);        // rad
  double jacobian_determinant = 1e-8;
};

inline constexpr KinematicsTolerances kDefaultTolerances{};

// Ankle position relative to the hip. Velocity fields are zero.
PlanarPoint forward_kinematics(const LegGeometry& geom, const JointAngles& q);

// Shank direction from vertical-down; positive when the ankle is ahead of the
// knee.
inline double shank_angle(const JointAngles& q) { return q.hip - q.knee; }

// Hip and knee angles that put the ankle at `target` (hip frame). Always the
// knee >= 0 branch. The ankle field of the result is zero; ankle pitch is
// commanded separately by the planner.
IkSolution inverse_kinematics(const LegGeometry& geom, const PlanarPoint& target,
                              const KinematicsTolerances& tol = kDefaultTolerances);

// Row-major 2x2 Jacobian of the ankle position w.r.t. (hip, knee).
std::array<double, 4> leg_jacobian(const LegGeometry& geom, const JointAngles& q);

// Solves J(q) * qdot = (vx, vz) for the hip and knee rates. Ankle rate is left
// at zero.
JointVelocities joint_velocities_from_cartesian(
    const LegGeometry& geom, const JointAngles& q, const PlanarPoint& velocity,
    const KinematicsTolerances& tol = kDefaultTolerances);

// Ankle velocity (relative to hip) produced by joint rates.
PlanarPoint cartesian_velocity(const LegGeometry& geom, const JointAngles& q,
                               const JointVelocities& qd);

bool within_limits(const JointLimits& limits, const JointAngles& q, double tol = 1e-9);

}  // namespace exogait
