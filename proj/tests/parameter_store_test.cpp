#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <random>

#include "exogait/errors.hpp"
#include "exogait/parameter_store.hpp"

namespace exogait {
namespace {

bool mentions(const std::vector<Violation>& v, const std::string& field) {
  return std::any_of(v.begin(), v.end(), [&](const Violation& x) { return x.field == field; });
}

TEST(Presets, ColumnValues) {
  const auto& flat = builtin_preset(GaitProfile::Flat).params;
  EXPECT_DOUBLE_EQ(flat.step_length, 0.4);
  EXPECT_DOUBLE_EQ(flat.swing_height, 0.1);
  EXPECT_DOUBLE_EQ(flat.pct_back, 15);
  EXPECT_DOUBLE_EQ(flat.pct_front, 15);
  EXPECT_DOUBLE_EQ(flat.swing_time, 1.0);
  EXPECT_DOUBLE_EQ(flat.transfer_time, 0.4);

  const auto& stairs = builtin_preset(GaitProfile::Stairs).params;
  EXPECT_DOUBLE_EQ(stairs.step_length, 0.29);
  EXPECT_DOUBLE_EQ(stairs.swing_height, 0.15);
  EXPECT_DOUBLE_EQ(stairs.pct_back, 20);
  EXPECT_DOUBLE_EQ(stairs.pct_front, 20);
  EXPECT_DOUBLE_EQ(stairs.swing_time, 1.6);
  EXPECT_DOUBLE_EQ(stairs.transfer_time, 1.1);

  const auto& slopes = builtin_preset(GaitProfile::Slopes).params;
  EXPECT_DOUBLE_EQ(slopes.step_length, 0.31);
  EXPECT_DOUBLE_EQ(slopes.swing_height, 0.08);
  EXPECT_DOUBLE_EQ(slopes.swing_time, 1.2);
  EXPECT_DOUBLE_EQ(slopes.transfer_time, 0.6);

  const auto& stones = builtin_preset(GaitProfile::Stones).params;
  EXPECT_DOUBLE_EQ(stones.swing_height, 0.1);
  EXPECT_DOUBLE_EQ(stones.swing_time, 1.8);
  EXPECT_DOUBLE_EQ(stones.transfer_time, 0.6);
}

TEST(Presets, AllValid) {
  for (const auto& s : builtin_presets()) {
    EXPECT_TRUE(validate(s.params, s.profile).empty()) << s.name;
    EXPECT_EQ(s.source, ParameterSource::Builtin);
  }
}

TEST(Validation, PercentagesMustLeaveAMiddleSegment) {
  auto p = builtin_preset(GaitProfile::Flat).params;
  p.pct_back = 60;
  p.pct_front = 60;
  EXPECT_TRUE(mentions(validate(p, GaitProfile::Flat), "pct_back+pct_front"));
  EXPECT_THROW(require_valid(p, GaitProfile::Flat), ValidationError);
}

TEST(Validation, StoneLengthCitesTheBound) {
  auto p = builtin_preset(GaitProfile::Stones).params;
  p.step_length = 0.34;
  const auto v = validate(p, GaitProfile::Stones);
  ASSERT_EQ(v.size(), 1u);
  EXPECT_EQ(v[0].field, "step_length");
  EXPECT_NE(v[0].constraint.find("[0.35, 0.69]"), std::string::npos);
  p.step_length = 0.35;
  EXPECT_TRUE(validate(p, GaitProfile::Stones).empty());
  p.step_length = 0.69;
  EXPECT_TRUE(validate(p, GaitProfile::Stones).empty());
  p.step_length = 0.70;
  EXPECT_FALSE(validate(p, GaitProfile::Stones).empty());
}

TEST(Validation, ReportsEveryViolation) {
  GaitParameters p;
  p.swing_time = 0.0;
  p.swing_height = -1.0;
  p.toe_off_angle = deg2rad(80);
  const auto v = validate(p, GaitProfile::Flat);
  EXPECT_TRUE(mentions(v, "swing_time"));
  EXPECT_TRUE(mentions(v, "swing_height"));
  EXPECT_TRUE(mentions(v, "toe_off_angle"));
  try {
    require_valid(p, GaitProfile::Flat);
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_EQ(e.violations().size(), v.size());
  }
}

TEST(Validation, StairsNeedARise) {
  auto p = builtin_preset(GaitProfile::Stairs).params;
  p.step_rise = 0.0;
  EXPECT_TRUE(mentions(validate(p, GaitProfile::Stairs), "step_rise"));
}

TEST(ConfigText, OverrideOnTopOfBuiltin) {
  const auto sets = parse_parameter_sets(
      "# tuned toe-off\n[mine]\nbase = flat\ntoe_off_angle_deg = 25\n");
  ASSERT_EQ(sets.size(), 1u);
  EXPECT_EQ(sets[0].name, "mine");
  EXPECT_EQ(sets[0].profile, GaitProfile::Flat);
  EXPECT_EQ(sets[0].source, ParameterSource::File);
  auto expected = builtin_preset(GaitProfile::Flat).params;
  expected.toe_off_angle = deg2rad(25);
  EXPECT_EQ(sets[0].params, expected);
}

TEST(ConfigText, InheritsFromEarlierSet) {
  const auto sets = parse_parameter_sets(
      "[a]\nprofile = stairs\nswing_time_s = 2.0\n\n[b]\nbase = a\nswing_height_m = 0.2\n");
  ASSERT_EQ(sets.size(), 2u);
  EXPECT_EQ(sets[1].profile, GaitProfile::Stairs);
  EXPECT_DOUBLE_EQ(sets[1].params.swing_time, 2.0);
  EXPECT_DOUBLE_EQ(sets[1].params.swing_height, 0.2);
}

TEST(ConfigText, InvalidValuesAreRejected) {
  EXPECT_THROW(parse_parameter_sets("[x]\nbase = flat\npct_back = 60\npct_front = 60\n"),
               ValidationError);
  EXPECT_THROW(parse_parameter_sets("[x]\nbase = stones\nstep_length_m = 0.34\n"),
               ValidationError);
}

TEST(ConfigText, SyntaxErrorsCarryLocation) {
  try {
    parse_parameter_sets("[x]\nbase = flat\nwobble = 3\n", "cfg.ini");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("cfg.ini:3"), std::string::npos) << e.what();
  }
  EXPECT_THROW(parse_parameter_sets("[x]\nbase = flat\nswing_time_s = fast\n"), ParseError);
  EXPECT_THROW(parse_parameter_sets("[x]\nbase = flat\nswing_time_s = 1\nswing_time_s = 2\n"),
               ParseError);
  EXPECT_THROW(parse_parameter_sets("[x]\nbase = flat\n[x]\nbase = flat\n"), ParseError);
  EXPECT_THROW(parse_parameter_sets("[x]\nbase = nowhere\n"), ParseError);
  EXPECT_THROW(parse_parameter_sets("swing_time_s = 1\n"), ParseError);
  EXPECT_THROW(
      parse_parameter_sets("[x]\ntoe_off_angle_deg = 10\ntoe_off_angle_rad = 0.1\n"),
      ParseError);
}

TEST(ConfigText, SerializeRoundTripsExactly) {
  std::vector<ParameterSet> sets = builtin_presets();
  std::mt19937 rng(8);
  std::uniform_real_distribution<double> jitter(0.9, 1.1);
  for (auto& s : sets) {
    s.name += "_tuned";
    s.source = ParameterSource::File;
    s.params.swing_time *= jitter(rng);
    s.params.toe_off_angle *= jitter(rng);
    s.params.swing_height *= jitter(rng);
  }
  const auto text = serialize(sets);
  EXPECT_EQ(parse_parameter_sets(text), sets);
  EXPECT_EQ(serialize(parse_parameter_sets(text)), text);
}

TEST(Geometry, RoundTripAndOverride) {
  LegGeometry g;
  g.thigh_length = 0.45;
  g.limits.knee.max = deg2rad(120);
  EXPECT_EQ(serialize_geometry(parse_geometry(serialize_geometry(g))), serialize_geometry(g));
  const auto parsed = parse_geometry("[geometry]\nthigh_length_m = 0.41\nknee_max_deg = 110\n");
  EXPECT_DOUBLE_EQ(parsed.thigh_length, 0.41);
  EXPECT_DOUBLE_EQ(parsed.shank_length, 0.43);
  EXPECT_DOUBLE_EQ(parsed.limits.knee.max, deg2rad(110));
}

TEST(Store, AddActivateAndLookup) {
  ParameterStore store;
  EXPECT_TRUE(store.contains("flat"));
  EXPECT_THROW(store.get("nope"), std::out_of_range);
  ParameterSet s = builtin_preset(GaitProfile::Flat);
  s.name = "slow";
  s.params.swing_time = 1.5;
  store.add(s);
  EXPECT_EQ(store.active(GaitProfile::Flat).name, "flat");
  EXPECT_EQ(store.activate("slow"), GaitProfile::Flat);
  EXPECT_DOUBLE_EQ(store.active(GaitProfile::Flat).params.swing_time, 1.5);
  EXPECT_THROW(store.activate("nope"), std::out_of_range);
}

TEST(Store, LoadsFileAndProfileNamedSetsBecomeActive) {
  const auto path = std::filesystem::temp_directory_path() / "exogait_store_test.ini";
  {
    std::ofstream out(path);
    out << "[stairs]\nprofile = stairs\nbase = stairs\nswing_time_s = 1.9\n";
  }
  ParameterStore store;
  store.load(path);
  EXPECT_DOUBLE_EQ(store.active(GaitProfile::Stairs).params.swing_time, 1.9);
  EXPECT_EQ(store.active(GaitProfile::Stairs).source, ParameterSource::File);
  std::filesystem::remove(path);
  EXPECT_THROW(store.load(path), IoError);
}

}  // namespace
}  // namespace exogait
