#include "exogait/kinematics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "exogait/errors.hpp"

namespace exogait {

double LegGeometry::min_reach() const { return std::abs(thigh_length - shank_length); }

void LegGeometry::validate() const {
  if (!(thigh_length > 0.0) || !(shank_length > 0.0) || !(foot_forward_length > 0.0) ||
      !(ankle_height > 0.0)) {
    throw std::invalid_argument("leg geometry lengths must be strictly positive");
  }
  if (!(limits.max_speed > 0.0)) {
    throw std::invalid_argument("joint speed cap must be positive");
  }
}

PlanarPoint forward_kinematics(const LegGeometry& geom, const JointAngles& q) {
  const double shank = shank_angle(q);
  return {geom.thigh_length * std::sin(q.hip) + geom.shank_length * std::sin(shank),
          -geom.thigh_length * std::cos(q.hip) - geom.shank_length * std::cos(shank), 0.0,
          0.0};
}

IkSolution inverse_kinematics(const LegGeometry& geom, const PlanarPoint& target,
                              const KinematicsTolerances& tol) {
  const double l1 = geom.thigh_length;
  const double l2 = geom.shank_length;
  const double r = std::hypot(target.x, target.z);
  // Targets inside the outer reach band are still solved; they come back
  // flagged near-singular so callers can avoid velocity mapping there.
  if (!std::isfinite(r) || r > geom.max_reach() + 1e-12 ||
      r < geom.min_reach() + tol.reach) {
    std::ostringstream os;
    os << "target (" << target.x << ", " << target.z << ") at distance " << r
       << " m is outside the reachable annulus [" << geom.min_reach() + tol.reach << ", "
       << geom.max_reach() << "]";
    throw UnreachableTarget(os.str());
  }

  const double cos_knee =
      std::clamp((r * r - l1 * l1 - l2 * l2) / (2.0 * l1 * l2), -1.0, 1.0);
  const double knee = std::acos(cos_knee);
  const double direction = std::atan2(target.x, -target.z);
  const double offset = std::atan2(l2 * std::sin(knee), l1 + l2 * std::cos(knee));

  IkSolution sol;
  sol.angles.hip = direction + offset;
  sol.angles.knee = knee;
  sol.near_singular = knee < tol.knee || r > geom.max_reach() - tol.reach;
  return sol;
}

std::array<double, 4> leg_jacobian(const LegGeometry& geom, const JointAngles& q) {
  const double shank = shank_angle(q);
  const double c1 = std::cos(q.hip), s1 = std::sin(q.hip);
  const double c12 = std::cos(shank), s12 = std::sin(shank);
  const double l1 = geom.thigh_length, l2 = geom.shank_length;
  return {l1 * c1 + l2 * c12, -l2 * c12,  //
          l1 * s1 + l2 * s12, -l2 * s12};
}

JointVelocities joint_velocities_from_cartesian(const LegGeometry& geom,
                                                const JointAngles& q,
                                                const PlanarPoint& velocity,
                                                const KinematicsTolerances& tol) {
  const auto j = leg_jacobian(geom, q);
  const double det = j[0] * j[3] - j[1] * j[2];
  if (std::abs(det) < tol.jacobian_determinant) {
    std::ostringstream os;
    os << "leg Jacobian is singular (|det| = " << std::abs(det) << ") at knee "
       << rad2deg(q.knee) << " deg";
    throw SingularJacobian(os.str());
  }
  JointVelocities qd;
  qd.hip = (j[3] * velocity.vx - j[1] * velocity.vz) / det;
  qd.knee = (-j[2] * velocity.vx + j[0] * velocity.vz) / det;
  return qd;
}

PlanarPoint cartesian_velocity(const LegGeometry& geom, const JointAngles& q,
                               const JointVelocities& qd) {
  const auto j = leg_jacobian(geom, q);
  return {0.0, 0.0, j[0] * qd.hip + j[1] * qd.knee, j[2] * qd.hip + j[3] * qd.knee};
}

bool within_limits(const JointLimits& limits, const JointAngles& q, double tol) {
  return limits.hip.contains(q.hip, tol) && limits.knee.contains(q.knee, tol) &&
         limits.ankle.contains(q.ankle, tol);
}

}  // namespace exogait
