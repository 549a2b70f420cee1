#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "exogait/errors.hpp"
#include "exogait/gait_planner.hpp"
#include "exogait/kinematics.hpp"

namespace exogait {

enum class ParameterSource { Builtin, File };

struct ParameterSet {
  std::string name;
  GaitProfile profile = GaitProfile::Flat;
  GaitParameters params;
  ParameterSource source = ParameterSource::Builtin;

  friend bool operator==(const ParameterSet&, const ParameterSet&) = default;
};

// flat, stairs, slopes, stones, in that order.
std::vector<ParameterSet> builtin_presets();
const ParameterSet& builtin_preset(GaitProfile profile);

// Empty when the set is usable. Each violation names the field and the
// constraint it breaks.
std::vector<Violation> validate(const GaitParameters& params, GaitProfile profile,
                                const LegGeometry& geom = {});
// Throws ValidationError listing every violation.
void require_valid(const GaitParameters& params, GaitProfile profile,
                   const LegGeometry& geom = {});

std::optional<GaitProfile> parse_profile(std::string_view text);

// Config text -> sets. `origin` prefixes error messages. Sections may inherit
// from builtins or from sets defined earlier in the same text. Throws
// ParseError or ValidationError.
std::vector<ParameterSet> parse_parameter_sets(std::string_view text,
                                               std::string_view origin = "<text>");
std::vector<ParameterSet> load_file(const std::filesystem::path& path);
std::string serialize(std::span<const ParameterSet> sets);

// [geometry] section with link lengths and joint windows.
LegGeometry parse_geometry(std::string_view text, std::string_view origin = "<text>");
LegGeometry load_geometry(const std::filesystem::path& path);
std::string serialize_geometry(const LegGeometry& geom);

// Named sets plus, per profile, the set the planner currently uses.
class ParameterStore {
 public:
  ParameterStore();  // builtins only

  // Adds or replaces by name. File sets named after a profile also become
  // that profile's active set.
  void add(const ParameterSet& set);
  void load(const std::filesystem::path& path);

  bool contains(std::string_view name) const;
  // Throws std::out_of_range for unknown names.
  const ParameterSet& get(std::string_view name) const;
  std::vector<std::string> names() const;

  // Makes `name` the active set for its profile; returns that profile.
  GaitProfile activate(std::string_view name);
  const ParameterSet& active(GaitProfile profile) const;

 private:
  std::map<std::string, ParameterSet, std::less<>> sets_;
  std::map<GaitProfile, std::string> active_;
};

}  // namespace exogait
