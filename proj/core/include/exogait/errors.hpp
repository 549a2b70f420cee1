#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace exogait {

// Base for every error raised by the library. Callers that do not care about
// the specific failure can catch this.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class UnreachableTarget : public Error {
 public:
  explicit UnreachableTarget(const std::string& what, int waypoint_index = -1)
      : Error(what), waypoint_index_(waypoint_index) {}
  // Index of the offending swing waypoint, or -1 outside waypoint planning.
  int waypoint_index() const { return waypoint_index_; }

 private:
  int waypoint_index_;
};

class SingularJacobian : public Error { using Error::Error; };
class NonpositiveDuration : public Error { using Error::Error; };
class OutOfDomain : public Error { using Error::Error; };
class DiscontinuousJunction : public Error { using Error::Error; };
class DegenerateStep : public Error { using Error::Error; };
class JointLimitExceeded : public Error { using Error::Error; };
class IncompatibleBehaviorTransition : public Error { using Error::Error; };
class BehaviorChangeWhileMoving : public Error { using Error::Error; };
class InsufficientSteps : public Error { using Error::Error; };
class IoError : public Error { using Error::Error; };
class ParseError : public Error { using Error::Error; };

class MalformedMessage : public Error {
 public:
  explicit MalformedMessage(const std::string& what, std::string code = "malformed_message")
      : Error(what), code_(std::move(code)) {}
  // Wire error code reported back to the sender.
  const std::string& code() const { return code_; }

 private:
  std::string code_;
};


class BindFailure : public Error { using Error::Error; };

struct Violation {
  std::string field;
  std::string constraint;
};

class ValidationError : public Error {
 public:
  explicit ValidationError(std::vector<Violation> violations);
  const std::vector<Violation>& violations() const { return violations_; }

 private:
  std::vector<Violation> violations_;
};

}  // namespace exogait
