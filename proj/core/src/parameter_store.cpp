#include "exogait/parameter_store.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "exogait/number_text.hpp"

namespace exogait {
namespace {

enum class Unit { Meter, Second, Percent, Angle, Ratio, RadPerSecond };

std::string_view unit_suffix(Unit u) {
  switch (u) {
    case Unit::Meter: return "_m";
    case Unit::Second: return "_s";
    case Unit::Angle: return "_deg";
    case Unit::RadPerSecond: return "_rad_s";
    default: return "";
  }
}

template <typename T>
struct Field {
  std::string_view name;
  double T::*member;
  Unit unit;
};

constexpr Field<GaitParameters> kGaitFields[] = {
    {"step_length", &GaitParameters::step_length, Unit::Meter},
    {"swing_height", &GaitParameters::swing_height, Unit::Meter},
    {"pct_back", &GaitParameters::pct_back, Unit::Percent},
    {"pct_front", &GaitParameters::pct_front, Unit::Percent},
    {"swing_time", &GaitParameters::swing_time, Unit::Second},
    {"transfer_time", &GaitParameters::transfer_time, Unit::Second},
    {"toe_off_angle", &GaitParameters::toe_off_angle, Unit::Angle},
    {"fast_toeoff_extra", &GaitParameters::fast_toeoff_extra, Unit::Angle},
    {"fast_toeoff_duration", &GaitParameters::fast_toeoff_duration, Unit::Second},
    {"step_rise", &GaitParameters::step_rise, Unit::Meter},
    {"stance_lead_fraction", &GaitParameters::stance_lead_fraction, Unit::Ratio},
    {"transfer_hip_fraction", &GaitParameters::transfer_hip_fraction, Unit::Ratio},
    {"ramp_hip_offset", &GaitParameters::ramp_hip_offset, Unit::Meter},
    {"swing_dorsiflexion", &GaitParameters::swing_dorsiflexion, Unit::Angle},
    {"stone_pad", &GaitParameters::stone_pad, Unit::Meter},
};

// Geometry mixes plain members with the nested joint windows, so it is read
// through a flat mirror struct.
struct GeometryFlat {
  double thigh_length, shank_length, foot_forward_length, ankle_height;
  double hip_min, hip_max, knee_min, knee_max, ankle_min, ankle_max, max_joint_speed;
};

constexpr Field<GeometryFlat> kGeometryFields[] = {
    {"thigh_length", &GeometryFlat::thigh_length, Unit::Meter},
    {"shank_length", &GeometryFlat::shank_length, Unit::Meter},
    {"foot_forward_length", &GeometryFlat::foot_forward_length, Unit::Meter},
    {"ankle_height", &GeometryFlat::ankle_height, Unit::Meter},
    {"hip_min", &GeometryFlat::hip_min, Unit::Angle},
    {"hip_max", &GeometryFlat::hip_max, Unit::Angle},
    {"knee_min", &GeometryFlat::knee_min, Unit::Angle},
    {"knee_max", &GeometryFlat::knee_max, Unit::Angle},
    {"ankle_min", &GeometryFlat::ankle_min, Unit::Angle},
    {"ankle_max", &GeometryFlat::ankle_max, Unit::Angle},
    {"max_joint_speed", &GeometryFlat::max_joint_speed, Unit::RadPerSecond},
};

GeometryFlat flatten(const LegGeometry& g) {
  return {g.thigh_length,    g.shank_length,    g.foot_forward_length, g.ankle_height,
          g.limits.hip.min,  g.limits.hip.max,  g.limits.knee.min,     g.limits.knee.max,
          g.limits.ankle.min, g.limits.ankle.max, g.limits.max_speed};
}

LegGeometry unflatten(const GeometryFlat& f) {
  LegGeometry g;
  g.thigh_length = f.thigh_length;
  g.shank_length = f.shank_length;
  g.foot_forward_length = f.foot_forward_length;
  g.ankle_height = f.ankle_height;
  g.limits.hip = {f.hip_min, f.hip_max};
  g.limits.knee = {f.knee_min, f.knee_max};
  g.limits.ankle = {f.ankle_min, f.ankle_max};
  g.limits.max_speed = f.max_joint_speed;
  return g;
}

struct KeyMatch {
  std::size_t index;
  bool degrees;  // file value is in degrees, stored in radians
};

template <typename T, std::size_t N>
std::optional<KeyMatch> match_key(const Field<T> (&fields)[N], std::string_view key) {
  for (std::size_t i = 0; i < N; ++i) {
    const auto& f = fields[i];
    if (!key.starts_with(f.name)) continue;
    const auto suffix = key.substr(f.name.size());
    if (suffix == unit_suffix(f.unit)) {
      return KeyMatch{i, f.unit == Unit::Angle};
    }
    if (f.unit == Unit::Angle && suffix == "_rad") return KeyMatch{i, false};
  }
  return std::nullopt;
}

struct Entry {
  std::string key;
  std::string value;
  int line;
};

struct Section {
  std::string name;
  int line;
  std::vector<Entry> entries;
};

bool valid_identifier(std::string_view s) {
  if (s.empty() || !(std::isalpha(static_cast<unsigned char>(s[0])) || s[0] == '_')) {
    return false;
  }
  return std::all_of(s.begin(), s.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.';
  });
}

[[noreturn]] void fail(std::string_view origin, int line, const std::string& msg) {
  std::ostringstream os;
  os << origin << ':' << line << ": " << msg;
  throw ParseError(os.str());
}

std::vector<Section> lex(std::string_view text, std::string_view origin) {
  std::vector<Section> out;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    std::string_view line =
        text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    if (line_no == 1 && line.starts_with("\xEF\xBB\xBF")) line.remove_prefix(3);
    if (const auto c = line.find_first_of("#;"); c != std::string_view::npos) {
      line = line.substr(0, c);
    }
    line = trim(line);
    if (line.empty()) continue;

    if (line.front() == '[') {
      if (line.back() != ']') fail(origin, line_no, "unterminated section header");
      const auto name = trim(line.substr(1, line.size() - 2));
      if (!valid_identifier(name)) {
        fail(origin, line_no, "invalid section name '" + std::string(name) + "'");
      }
      for (const auto& s : out) {
        if (s.name == name) fail(origin, line_no, "duplicate section [" + s.name + "]");
      }
      out.push_back({std::string(name), line_no, {}});
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) fail(origin, line_no, "expected 'key = value'");
    if (out.empty()) fail(origin, line_no, "key outside of any [section]");
    const auto key = trim(line.substr(0, eq));
    const auto value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty()) fail(origin, line_no, "empty key or value");
    for (const auto& e : out.back().entries) {
      if (e.key == key) fail(origin, line_no, "duplicate key '" + e.key + "'");
    }
    out.back().entries.push_back({std::string(key), std::string(value), line_no});
  }
  return out;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  std::ostringstream os;
  os << in.rdbuf();
  if (in.bad()) throw IoError("read failed on '" + path.string() + "'");
  return os.str();
}

// Prefers degrees when the degree text converts back to the identical radian
// value; otherwise falls back to radians so the round trip stays exact.
template <typename T>
void write_field(std::ostringstream& os, const Field<T>& f, double value) {
  if (f.unit == Unit::Angle) {
    const std::string deg = format_number(rad2deg(value));
    if (deg2rad(*parse_number(deg)) == value) {
      os << f.name << "_deg = " << deg << '\n';
    } else {
      os << f.name << "_rad = " << format_number(value) << '\n';
    }
    return;
  }
  os << f.name << unit_suffix(f.unit) << " = " << format_number(value) << '\n';
}

void check(std::vector<Violation>& out, bool ok, std::string field, std::string constraint) {
  if (!ok) out.push_back({std::move(field), std::move(constraint)});
}

ParameterSet make_preset(std::string name, GaitProfile profile, double l, double h,
                         double back, double front, double swing, double transfer) {
  ParameterSet s{std::move(name), profile, {}, ParameterSource::Builtin};
  s.params.step_length = l;
  s.params.swing_height = h;
  s.params.pct_back = back;
  s.params.pct_front = front;
  s.params.swing_time = swing;
  s.params.transfer_time = transfer;
  return s;
}

}  // namespace

std::vector<ParameterSet> builtin_presets() {
  auto flat = make_preset("flat", GaitProfile::Flat, 0.4, 0.1, 15, 15, 1.0, 0.4);

  auto stairs = make_preset("stairs", GaitProfile::Stairs, 0.29, 0.15, 20, 20, 1.6, 1.1);
  stairs.params.step_rise = 0.18;
  stairs.params.stance_lead_fraction = 0.5;
  stairs.params.transfer_hip_fraction = 1.0;

  auto slopes = make_preset("slopes", GaitProfile::Slopes, 0.31, 0.08, 20, 20, 1.2, 0.6);
  slopes.params.step_rise = 0.08;

  // Step length is chosen per stone through the behavior; 0.5 m is the
  // nominal value inside the accepted range.
  auto stones = make_preset("stones", GaitProfile::Stones, 0.5, 0.1, 15, 15, 1.8, 0.6);
  stones.params.stance_lead_fraction = 0.48;

  return {flat, stairs, slopes, stones};
}

const ParameterSet& builtin_preset(GaitProfile profile) {
  static const std::vector<ParameterSet> presets = builtin_presets();
  for (const auto& p : presets) {
    if (p.profile == profile) return p;
  }
  throw std::logic_error("no builtin preset for profile");
}

std::optional<GaitProfile> parse_profile(std::string_view text) {
  for (GaitProfile p : {GaitProfile::Flat, GaitProfile::Stairs, GaitProfile::Slopes,
                        GaitProfile::Stones}) {
    if (profile_name(p) == text) return p;
  }
  return std::nullopt;
}

std::vector<Violation> validate(const GaitParameters& p, GaitProfile profile,
                                const LegGeometry& geom) {
  std::vector<Violation> v;
  for (const auto& f : kGaitFields) {
    check(v, std::isfinite(p.*(f.member)), std::string(f.name), "must be finite");
  }
  if (!v.empty()) return v;

  const double plantar_room = -geom.limits.ankle.min;
  check(v, p.step_length > 0.0, "step_length", "> 0 m");
  if (profile == GaitProfile::Stones) {
    std::ostringstream os;
    os << "stepping-stone step length must lie in [" << format_number(kStonesMinStep)
       << ", " << format_number(kStonesMaxStep) << "] m";
    check(v, p.step_length >= kStonesMinStep && p.step_length <= kStonesMaxStep,
          "step_length", os.str());
  }
  check(v, p.swing_height > 0.0, "swing_height", "> 0 m");
  check(v, p.pct_back > 0.0, "pct_back", "> 0 %");
  check(v, p.pct_front > 0.0, "pct_front", "> 0 %");
  check(v, p.pct_back + p.pct_front < 100.0, "pct_back+pct_front", "sum < 100 %");
  check(v, p.swing_time > 0.0, "swing_time", "> 0 s");
  check(v, p.transfer_time > 0.0, "transfer_time", "> 0 s");
  check(v, p.toe_off_angle >= 0.0 && p.toe_off_angle <= plantar_room, "toe_off_angle",
        "within [0, ankle plantar-flexion limit]");
  check(v, p.fast_toeoff_extra >= 0.0 && p.toe_off_angle + p.fast_toeoff_extra <= plantar_room,
        "fast_toeoff_extra", ">= 0 and toe_off_angle + extra within the ankle limit");
  check(v, p.fast_toeoff_duration >= 0.0 && p.fast_toeoff_duration < 0.5 * p.swing_time,
        "fast_toeoff_duration", "within [0, swing_time / 2)");
  check(v, p.step_rise >= 0.0 && p.step_rise < p.step_length, "step_rise",
        "within [0, step_length)");
  if (profile == GaitProfile::Stairs || profile == GaitProfile::Slopes) {
    check(v, p.step_rise > 0.0, "step_rise", "> 0 m for stairs and slopes");
  }
  check(v, p.stance_lead_fraction > 0.0 && p.stance_lead_fraction < 1.0,
        "stance_lead_fraction", "within (0, 1)");
  check(v, p.transfer_hip_fraction >= 0.0 && p.transfer_hip_fraction <= 1.0,
        "transfer_hip_fraction", "within [0, 1]");
  check(v, p.ramp_hip_offset >= 0.0 && p.ramp_hip_offset < p.step_length, "ramp_hip_offset",
        "within [0, step_length)");
  check(v, p.swing_dorsiflexion >= 0.0 && p.swing_dorsiflexion <= geom.limits.ankle.max,
        "swing_dorsiflexion", "within [0, ankle dorsiflexion limit]");
  check(v, p.stone_pad > 0.0, "stone_pad", "> 0 m");
  return v;
}

void require_valid(const GaitParameters& params, GaitProfile profile,
                   const LegGeometry& geom) {
  auto v = validate(params, profile, geom);
  if (!v.empty()) throw ValidationError(std::move(v));
}

std::vector<ParameterSet> parse_parameter_sets(std::string_view text,
                                               std::string_view origin) {
  std::vector<ParameterSet> out;
  for (const auto& sec : lex(text, origin)) {
    std::optional<GaitProfile> profile;
    const ParameterSet* base = nullptr;
    for (const auto& e : sec.entries) {
      if (e.key == "profile") {
        profile = parse_profile(e.value);
        if (!profile) fail(origin, e.line, "unknown profile '" + e.value + "'");
      } else if (e.key == "base") {
        for (const auto& s : out) {
          if (s.name == e.value) base = &s;
        }
        if (!base) {
          if (auto bp = parse_profile(e.value)) base = &builtin_preset(*bp);
        }
        if (!base) fail(origin, e.line, "unknown base set '" + e.value + "'");
      }
    }
    if (!profile && base) profile = base->profile;
    if (!profile) profile = parse_profile(sec.name);
    if (!profile) profile = GaitProfile::Flat;
    if (!base) base = &builtin_preset(*profile);

    ParameterSet set{sec.name, *profile, base->params, ParameterSource::File};
    std::vector<std::size_t> assigned;
    for (const auto& e : sec.entries) {
      if (e.key == "profile" || e.key == "base") continue;
      const auto m = match_key(kGaitFields, e.key);
      if (!m) fail(origin, e.line, "unknown key '" + e.key + "'");
      if (std::find(assigned.begin(), assigned.end(), m->index) != assigned.end()) {
        fail(origin, e.line, "'" + e.key + "' sets a value already given in another unit");
      }
      assigned.push_back(m->index);
      const auto value = parse_number(e.value);
      if (!value) fail(origin, e.line, "'" + e.value + "' is not a number");
      set.params.*(kGaitFields[m->index].member) = m->degrees ? deg2rad(*value) : *value;
    }
    auto violations = validate(set.params, set.profile);
    if (!violations.empty()) {
      for (auto& viol : violations) viol.field = set.name + "." + viol.field;
      throw ValidationError(std::move(violations));
    }
    out.push_back(std::move(set));
  }
  return out;
}

std::vector<ParameterSet> load_file(const std::filesystem::path& path) {
  return parse_parameter_sets(read_file(path), path.string());
}

std::string serialize(std::span<const ParameterSet> sets) {
  std::ostringstream os;
  bool first = true;
  for (const auto& s : sets) {
    if (!first) os << '\n';
    first = false;
    os << '[' << s.name << "]\n";
    os << "profile = " << profile_name(s.profile) << '\n';
    for (const auto& f : kGaitFields) write_field(os, f, s.params.*(f.member));
  }
  return os.str();
}

LegGeometry parse_geometry(std::string_view text, std::string_view origin) {
  const auto sections = lex(text, origin);
  GeometryFlat flat = flatten(LegGeometry{});
  bool found = false;
  for (const auto& sec : sections) {
    if (sec.name != "geometry") fail(origin, sec.line, "unexpected section [" + sec.name + "]");
    found = true;
    for (const auto& e : sec.entries) {
      const auto m = match_key(kGeometryFields, e.key);
      if (!m) fail(origin, e.line, "unknown key '" + e.key + "'");
      const auto value = parse_number(e.value);
      if (!value) fail(origin, e.line, "'" + e.value + "' is not a number");
      flat.*(kGeometryFields[m->index].member) = m->degrees ? deg2rad(*value) : *value;
    }
  }
  if (!found) fail(origin, 1, "missing [geometry] section");

  const LegGeometry g = unflatten(flat);
  std::vector<Violation> v;
  check(v, g.thigh_length > 0.0, "thigh_length", "> 0 m");
  check(v, g.shank_length > 0.0, "shank_length", "> 0 m");
  check(v, g.foot_forward_length > 0.0, "foot_forward_length", "> 0 m");
  check(v, g.ankle_height > 0.0, "ankle_height", "> 0 m");
  check(v, g.limits.hip.min < g.limits.hip.max, "hip_min", "< hip_max");
  check(v, g.limits.knee.min < g.limits.knee.max, "knee_min", "< knee_max");
  check(v, g.limits.ankle.min < g.limits.ankle.max, "ankle_min", "< ankle_max");
  check(v, g.limits.max_speed > 0.0, "max_joint_speed", "> 0 rad/s");
  if (!v.empty()) throw ValidationError(std::move(v));
  return g;
}

LegGeometry load_geometry(const std::filesystem::path& path) {
  return parse_geometry(read_file(path), path.string());
}

std::string serialize_geometry(const LegGeometry& geom) {
  std::ostringstream os;
  os << "[geometry]\n";
  const GeometryFlat flat = flatten(geom);
  for (const auto& f : kGeometryFields) write_field(os, f, flat.*(f.member));
  return os.str();
}

ParameterStore::ParameterStore() {
  for (const auto& p : builtin_presets()) {
    active_[p.profile] = p.name;
    sets_.emplace(p.name, p);
  }
}

void ParameterStore::add(const ParameterSet& set) {
  const auto named = parse_profile(set.name);
  if (named && *named != set.profile) {
    throw ValidationError({{set.name + ".profile",
                            "a set named after a profile must use that profile"}});
  }
  require_valid(set.params, set.profile);
  sets_.insert_or_assign(set.name, set);
  if (named) active_[set.profile] = set.name;
}

void ParameterStore::load(const std::filesystem::path& path) {
  for (const auto& s : load_file(path)) add(s);
}

bool ParameterStore::contains(std::string_view name) const {
  return sets_.find(name) != sets_.end();
}

const ParameterSet& ParameterStore::get(std::string_view name) const {
  const auto it = sets_.find(name);
  if (it == sets_.end()) throw std::out_of_range("unknown parameter set '" + std::string(name) + "'");
  return it->second;
}

std::vector<std::string> ParameterStore::names() const {
  std::vector<std::string> out;
  for (const auto& [name, set] : sets_) out.push_back(name);
  return out;
}

GaitProfile ParameterStore::activate(std::string_view name) {
  const auto& set = get(name);
  active_[set.profile] = set.name;
  return set.profile;
}

const ParameterSet& ParameterStore::active(GaitProfile profile) const {
  return get(active_.at(profile));
}

}  // namespace exogait
