#include "exogait/errors.hpp"

namespace exogait {
namespace {

std::string describe(const std::vector<Violation>& violations) {
  std::string out = "parameter validation failed";
  for (const auto& v : violations) {
    out += "; " + v.field + ": " + v.constraint;
  }
  return out;
}

}  // namespace

ValidationError::ValidationError(std::vector<Violation> violations)
    : Error(describe(violations)), violations_(std::move(violations)) {}

}  // namespace exogait
