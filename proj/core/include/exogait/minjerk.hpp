#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include "exogait/kinematics.hpp"

namespace exogait {

struct Sample {
  double position = 0.0;
  double velocity = 0.0;
  double acceleration = 0.0;
};

// Quintic polynomial on local time [0, duration]:
//   p(t) = c0 + c1 t + c2 t^2 + c3 t^3 + c4 t^4 + c5 t^5
class QuinticSegment {
 public:
  QuinticSegment(const std::array<double, 6>& coefficients, double duration);

  // Position/velocity boundary conditions with zero acceleration at both ends.
  static QuinticSegment fit(double p0, double v0, double p1, double v1, double duration);
  static QuinticSegment hold(double value, double duration);

  // Throws OutOfDomain for t outside [0, duration].
  Sample evaluate(double t) const;
  // Same polynomial without the domain check.
  Sample evaluate_unchecked(double t) const;

  double duration() const { return duration_; }
  const std::array<double, 6>& coefficients() const { return c_; }
  Sample start() const { return evaluate_unchecked(0.0); }
  Sample end() const { return evaluate_unchecked(duration_); }

  // r(t) = p(duration - t).
  QuinticSegment reversed() const;
  // Adds another polynomial of the same duration.
  QuinticSegment plus(const QuinticSegment& other, double scale = 1.0) const;

 private:
  std::array<double, 6> c_;
  double duration_;
};

QuinticSegment fit_segment(double p0, double v0, double p1, double v1, double duration);
Sample evaluate(const QuinticSegment& seg, double t);

inline constexpr double kJunctionTolerance = 1e-9;

// Ordered, gap-free quintic segments for one scalar coordinate.
class PiecewiseQuintic {
 public:
  PiecewiseQuintic() = default;
  // Throws DiscontinuousJunction when position or velocity jumps by more than
  // `tolerance` between consecutive segments.
  explicit PiecewiseQuintic(std::vector<QuinticSegment> segments,
                            double tolerance = kJunctionTolerance);

  void append(const QuinticSegment& seg, double tolerance = kJunctionTolerance);
  void append(const PiecewiseQuintic& other, double tolerance = kJunctionTolerance);

  // Evaluates at global time t; t may overshoot the ends by 1e-9 s.
  Sample evaluate(double t) const;
  double duration() const { return duration_; }
  bool empty() const { return segments_.empty(); }
  const std::vector<QuinticSegment>& segments() const { return segments_; }
  std::vector<double> breakpoints() const;

  PiecewiseQuintic time_reversed() const;
  // Pointwise sum with another trajectory of equal duration. Both sets of
  // breakpoints are kept.
  PiecewiseQuintic plus(const PiecewiseQuintic& other, double scale = 1.0) const;

 private:
  std::vector<QuinticSegment> segments_;
  std::vector<double> starts_;
  double duration_ = 0.0;
};

// Piecewise quintic trajectories for the three joints of one leg.
struct JointTrajectory {
  PiecewiseQuintic hip;
  PiecewiseQuintic knee;
  PiecewiseQuintic ankle;

  // Throws std::logic_error if the joints disagree on duration.
  double duration() const;
  JointState evaluate(double t) const;
  void append(const JointTrajectory& other, double tolerance = kJunctionTolerance);
};

JointTrajectory chain(std::span<const JointTrajectory> parts);
PiecewiseQuintic chain(std::span<const QuinticSegment> segments);
JointTrajectory time_reverse(const JointTrajectory& traj);
PiecewiseQuintic time_reverse(const PiecewiseQuintic& traj);

struct TimedJointState {
  double t;
  JointState state;
};

// ceil(D/dt) + 1 samples, first at t = 0 and last exactly at t = D.
std::vector<TimedJointState> sample(const JointTrajectory& traj, double dt);
std::size_t sample_count(double duration, double dt);

}  // namespace exogait
