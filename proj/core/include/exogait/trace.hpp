#pragma once

#include <array>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "exogait/gait_planner.hpp"
#include "exogait/kinematics.hpp"
#include "exogait/parameter_store.hpp"
#include "exogait/step_engine.hpp"

namespace exogait {

// One control tick. Foot positions are the ankle joints in the world frame.
struct TraceRow {
  double t = 0.0;
  Phase phase = Phase::Standing;
  int step = 0;  // 1-based index of the step in progress, 0 while standing
  std::optional<Side> moving_leg;
  double phase_elapsed = 0.0;
  double phase_duration = 0.0;
  double step_elapsed = 0.0;
  double step_duration = 0.0;
  JointState left;
  JointState right;
  double left_foot_x = 0.0, left_foot_z = 0.0;
  double right_foot_x = 0.0, right_foot_z = 0.0;
  double hip_frame_x = 0.0, hip_frame_z = 0.0;
};

TraceRow make_row(const EngineState& state);

struct ScriptConfig {
  Behavior behavior = Behavior::flat();
  int steps = 1;
  ParameterStore parameters{};
  LegGeometry geometry{};
  double dt = kDefaultDt;
  int lead_in_rows = 50;  // standing rows before the first trigger
};

// Runs `steps` continuously triggered steps and stops at the first standing
// tick after the last one. Each follow-up trigger is issued on the first tick
// the window is open. Throws std::invalid_argument when steps < 1.
std::vector<TraceRow> run_scripted(const ScriptConfig& config);

inline constexpr int kNormalizedPoints = 101;

struct JointCurves {
  std::array<double, kNormalizedPoints> hip{};
  std::array<double, kNormalizedPoints> knee{};
  std::array<double, kNormalizedPoints> ankle{};
};

// Mean step on normalized time u in [0, 1]. The swing role is the leg that
// moves during the step, the stance role the one that supports it.
struct NormalizedStepTrace {
  std::array<double, kNormalizedPoints> u{};
  JointCurves swing;
  JointCurves stance;
  double transfer_fraction = 0.0;
  bool transfer_first = true;  // false for steps that end in double support
  int steps_averaged = 0;

  bool in_transfer(double u) const;
};

// Averages every complete step except the first. Throws InsufficientSteps when
// fewer than two complete steps are present.
NormalizedStepTrace normalize_steps(const std::vector<TraceRow>& rows);

// CSV with a header naming each column and its unit. Throws IoError.
void write_csv(std::ostream& out, const std::vector<TraceRow>& rows);
void write_csv(std::ostream& out, const NormalizedStepTrace& trace);
void export_csv(const std::vector<TraceRow>& rows, const std::filesystem::path& path);
void export_csv(const NormalizedStepTrace& trace, const std::filesystem::path& path);

// Reads a file written by export_csv(rows). Throws IoError or ParseError.
std::vector<TraceRow> read_csv(std::istream& in);
std::vector<TraceRow> import_csv(const std::filesystem::path& path);

const std::vector<std::string>& trace_columns();
const std::vector<std::string>& normalized_columns();

}  // namespace exogait
