#include "exogait/minjerk.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "exogait/errors.hpp"

namespace exogait {
namespace {

constexpr double kDomainSlack = 1e-9;

// Binomial coefficients up to degree 5.
constexpr std::array<std::array<double, 6>, 6> kBinomial = {{
    {1, 0, 0, 0, 0, 0},
    {1, 1, 0, 0, 0, 0},
    {1, 2, 1, 0, 0, 0},
    {1, 3, 3, 1, 0, 0},
    {1, 4, 6, 4, 1, 0},
    {1, 5, 10, 10, 5, 1},
}};

// Coefficients of p(s + t) as a polynomial in t.
std::array<double, 6> shift(const std::array<double, 6>& c, double s) {
  std::array<double, 6> out{};
  for (int k = 0; k < 6; ++k) {
    double acc = 0.0;
    double power = 1.0;
    for (int j = k; j < 6; ++j) {
      acc += kBinomial[j][k] * c[j] * power;
      power *= s;
    }
    out[k] = acc;
  }
  return out;
}

void require_finite(std::initializer_list<double> values) {
  for (double v : values) {
    if (!std::isfinite(v)) throw std::invalid_argument("non-finite trajectory input");
  }
}

}  // namespace

QuinticSegment::QuinticSegment(const std::array<double, 6>& coefficients, double duration)
    : c_(coefficients), duration_(duration) {
  if (!(duration > 0.0) || !std::isfinite(duration)) {
    std::ostringstream os;
    os << "segment duration must be positive, got " << duration;
    throw NonpositiveDuration(os.str());
  }
}

QuinticSegment QuinticSegment::fit(double p0, double v0, double p1, double v1,
                                   double duration) {
  require_finite({p0, v0, p1, v1});
  if (!(duration > 0.0)) {
    std::ostringstream os;
    os << "segment duration must be positive, got " << duration;
    throw NonpositiveDuration(os.str());
  }
  // With c2 = 0 the remaining three conditions reduce, in scaled form, to
  // c3 T^3 = 10h - 4dT, c4 T^4 = 7dT - 15h, c5 T^5 = 6h - 3dT.
  const double T = duration;
  const double h = p1 - p0 - v0 * T;
  const double dT = (v1 - v0) * T;
  const double T2 = T * T, T3 = T2 * T;
  return QuinticSegment({p0, v0, 0.0, (10.0 * h - 4.0 * dT) / T3,
                         (7.0 * dT - 15.0 * h) / (T3 * T),
                         (6.0 * h - 3.0 * dT) / (T3 * T2)},
                        T);
}

QuinticSegment QuinticSegment::hold(double value, double duration) {
  return QuinticSegment({value, 0, 0, 0, 0, 0}, duration);
}

Sample QuinticSegment::evaluate(double t) const {
  if (!(t >= 0.0 && t <= duration_)) {
    std::ostringstream os;
    os << "t = " << t << " outside segment domain [0, " << duration_ << "]";
    throw OutOfDomain(os.str());
  }
  return evaluate_unchecked(t);
}

Sample QuinticSegment::evaluate_unchecked(double t) const {
  const auto& c = c_;
  Sample s;
  s.position = c[0] + t * (c[1] + t * (c[2] + t * (c[3] + t * (c[4] + t * c[5]))));
  s.velocity = c[1] + t * (2 * c[2] + t * (3 * c[3] + t * (4 * c[4] + t * 5 * c[5])));
  s.acceleration = 2 * c[2] + t * (6 * c[3] + t * (12 * c[4] + t * 20 * c[5]));
  return s;
}

QuinticSegment QuinticSegment::reversed() const {
  auto c = shift(c_, duration_);
  for (int k = 1; k < 6; k += 2) c[k] = -c[k];
  return QuinticSegment(c, duration_);
}

QuinticSegment QuinticSegment::plus(const QuinticSegment& other, double scale) const {
  auto c = c_;
  for (int k = 0; k < 6; ++k) c[k] += scale * other.c_[k];
  return QuinticSegment(c, duration_);
}

QuinticSegment fit_segment(double p0, double v0, double p1, double v1, double duration) {
  return QuinticSegment::fit(p0, v0, p1, v1, duration);
}

Sample evaluate(const QuinticSegment& seg, double t) { return seg.evaluate(t); }

PiecewiseQuintic::PiecewiseQuintic(std::vector<QuinticSegment> segments,
                                   double tolerance) {
  for (const auto& s : segments) append(s, tolerance);
}

void PiecewiseQuintic::append(const QuinticSegment& seg, double tolerance) {
  if (!segments_.empty()) {
    const Sample a = segments_.back().end();
    const Sample b = seg.start();
    if (std::abs(a.position - b.position) > tolerance ||
        std::abs(a.velocity - b.velocity) > tolerance) {
      std::ostringstream os;
      os << "junction at t = " << duration_ << " jumps by "
         << std::abs(a.position - b.position) << " (position) and "
         << std::abs(a.velocity - b.velocity) << " (velocity)";
      throw DiscontinuousJunction(os.str());
    }
  }
  starts_.push_back(duration_);
  segments_.push_back(seg);
  duration_ += seg.duration();
}

void PiecewiseQuintic::append(const PiecewiseQuintic& other, double tolerance) {
  for (const auto& s : other.segments_) {
    append(s, tolerance);
    tolerance = kJunctionTolerance;
  }
}

Sample PiecewiseQuintic::evaluate(double t) const {
  if (segments_.empty()) throw OutOfDomain("evaluating an empty trajectory");
  if (t < -kDomainSlack || t > duration_ + kDomainSlack) {
    std::ostringstream os;
    os << "t = " << t << " outside trajectory domain [0, " << duration_ << "]";
    throw OutOfDomain(os.str());
  }
  auto it = std::upper_bound(starts_.begin(), starts_.end(), t);
  std::size_t idx = it == starts_.begin() ? 0 : static_cast<std::size_t>(it - starts_.begin()) - 1;
  const auto& seg = segments_[idx];
  const double local = std::clamp(t - starts_[idx], 0.0, seg.duration());
  return seg.evaluate_unchecked(local);
}

std::vector<double> PiecewiseQuintic::breakpoints() const {
  std::vector<double> out = starts_;
  out.push_back(duration_);
  return out;
}

PiecewiseQuintic PiecewiseQuintic::time_reversed() const {
  PiecewiseQuintic out;
  for (auto it = segments_.rbegin(); it != segments_.rend(); ++it) {
    out.append(it->reversed(), kJunctionTolerance);
  }
  return out;
}

PiecewiseQuintic PiecewiseQuintic::plus(const PiecewiseQuintic& other, double scale) const {
  if (std::abs(duration_ - other.duration_) > kDomainSlack) {
    throw std::invalid_argument("cannot add trajectories of different duration");
  }
  auto cuts = breakpoints();
  const auto more = other.breakpoints();
  cuts.insert(cuts.end(), more.begin(), more.end());
  std::sort(cuts.begin(), cuts.end());
  std::vector<double> unique_cuts;
  for (double c : cuts) {
    if (unique_cuts.empty() || c - unique_cuts.back() > 1e-12) unique_cuts.push_back(c);
  }

  auto piece_at = [](const PiecewiseQuintic& p, double t0, double len) {
    auto it = std::upper_bound(p.starts_.begin(), p.starts_.end(), t0 + 1e-12);
    std::size_t idx = static_cast<std::size_t>(it - p.starts_.begin()) - 1;
    const auto& seg = p.segments_[idx];
    return QuinticSegment(shift(seg.coefficients(), t0 - p.starts_[idx]), len);
  };

  PiecewiseQuintic out;
  for (std::size_t i = 0; i + 1 < unique_cuts.size(); ++i) {
    const double t0 = unique_cuts[i];
    const double len = unique_cuts[i + 1] - t0;
    out.append(piece_at(*this, t0, len).plus(piece_at(other, t0, len), scale), 1e-8);
  }
  return out;
}

double JointTrajectory::duration() const {
  const double d = hip.duration();
  if (std::abs(knee.duration() - d) > kDomainSlack ||
      std::abs(ankle.duration() - d) > kDomainSlack) {
    throw std::logic_error("joint trajectories have mismatched durations");
  }
  return d;
}

JointState JointTrajectory::evaluate(double t) const {
  const Sample h = hip.evaluate(t), k = knee.evaluate(t), a = ankle.evaluate(t);
  return {{h.position, k.position, a.position}, {h.velocity, k.velocity, a.velocity}};
}

void JointTrajectory::append(const JointTrajectory& other, double tolerance) {
  hip.append(other.hip, tolerance);
  knee.append(other.knee, tolerance);
  ankle.append(other.ankle, tolerance);
}

JointTrajectory chain(std::span<const JointTrajectory> parts) {
  JointTrajectory out;
  for (const auto& p : parts) out.append(p);
  out.duration();
  return out;
}

PiecewiseQuintic chain(std::span<const QuinticSegment> segments) {
  return PiecewiseQuintic(std::vector<QuinticSegment>(segments.begin(), segments.end()));
}

JointTrajectory time_reverse(const JointTrajectory& traj) {
  return {traj.hip.time_reversed(), traj.knee.time_reversed(),
          traj.ankle.time_reversed()};
}

PiecewiseQuintic time_reverse(const PiecewiseQuintic& traj) { return traj.time_reversed(); }

std::size_t sample_count(double duration, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("sample period must be positive");
  return static_cast<std::size_t>(std::ceil(duration / dt - 1e-9)) + 1;
}

std::vector<TimedJointState> sample(const JointTrajectory& traj, double dt) {
  const double d = traj.duration();
  const std::size_t n = sample_count(d, dt);
  std::vector<TimedJointState> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = i + 1 == n ? d : std::min(static_cast<double>(i) * dt, d);
    out.push_back({t, traj.evaluate(t)});
  }
  return out;
}

}  // namespace exogait
