#pragma once

#include <optional>
#include <string>
#include <string_view>

namespace exogait {

// Shortest text that parses back to the same double. Independent of the
// global locale.
std::string format_number(double value);

// Whole-string parse; surrounding blanks are allowed, anything else is not.
std::optional<double> parse_number(std::string_view text);

std::string_view trim(std::string_view text);

}  // namespace exogait
