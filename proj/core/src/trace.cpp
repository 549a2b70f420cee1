#include "exogait/trace.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "exogait/errors.hpp"
#include "exogait/number_text.hpp"

namespace exogait {
namespace {

using Accessor = double& (*)(TraceRow&);

struct NumericColumn {
  const char* name;
  Accessor get;
};

#define EXOGAIT_COLUMN(label, expr) \
  NumericColumn { label, [](TraceRow& r) -> double& { return expr; } }

const NumericColumn kNumeric[] = {
    EXOGAIT_COLUMN("phase_elapsed_s", r.phase_elapsed),
    EXOGAIT_COLUMN("phase_duration_s", r.phase_duration),
    EXOGAIT_COLUMN("step_elapsed_s", r.step_elapsed),
    EXOGAIT_COLUMN("step_duration_s", r.step_duration),
    EXOGAIT_COLUMN("left_hip_rad", r.left.angles.hip),
    EXOGAIT_COLUMN("left_knee_rad", r.left.angles.knee),
    EXOGAIT_COLUMN("left_ankle_rad", r.left.angles.ankle),
    EXOGAIT_COLUMN("left_hip_vel_rad_s", r.left.velocities.hip),
    EXOGAIT_COLUMN("left_knee_vel_rad_s", r.left.velocities.knee),
    EXOGAIT_COLUMN("left_ankle_vel_rad_s", r.left.velocities.ankle),
    EXOGAIT_COLUMN("right_hip_rad", r.right.angles.hip),
    EXOGAIT_COLUMN("right_knee_rad", r.right.angles.knee),
    EXOGAIT_COLUMN("right_ankle_rad", r.right.angles.ankle),
    EXOGAIT_COLUMN("right_hip_vel_rad_s", r.right.velocities.hip),
    EXOGAIT_COLUMN("right_knee_vel_rad_s", r.right.velocities.knee),
    EXOGAIT_COLUMN("right_ankle_vel_rad_s", r.right.velocities.ankle),
    EXOGAIT_COLUMN("left_foot_x_m", r.left_foot_x),
    EXOGAIT_COLUMN("left_foot_z_m", r.left_foot_z),
    EXOGAIT_COLUMN("right_foot_x_m", r.right_foot_x),
    EXOGAIT_COLUMN("right_foot_z_m", r.right_foot_z),
    EXOGAIT_COLUMN("hip_frame_x_m", r.hip_frame_x),
    EXOGAIT_COLUMN("hip_frame_z_m", r.hip_frame_z),
};

#undef EXOGAIT_COLUMN

std::string join(const std::vector<std::string>& parts) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += ',';
    out += parts[i];
  }
  return out;
}

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (true) {
    const auto comma = line.find(',', pos);
    out.push_back(line.substr(pos, comma == std::string_view::npos ? comma : comma - pos));
    if (comma == std::string_view::npos) break;
    pos = comma + 1;
  }
  return out;
}

const JointState& side_state(const TraceRow& r, Side s) {
  return s == Side::Left ? r.left : r.right;
}

struct StepRun {
  std::size_t first;
  std::size_t last;
};

struct CurvePoint {
  double u;
  std::array<double, 6> v;  // swing hip/knee/ankle, stance hip/knee/ankle
};

CurvePoint curve_point(const TraceRow& r, double u, Side moving) {
  const JointAngles& m = side_state(r, moving).angles;
  const JointAngles& s = side_state(r, other(moving)).angles;
  return {u, {m.hip, m.knee, m.ankle, s.hip, s.knee, s.ankle}};
}

std::array<double, 6> interpolate(const std::vector<CurvePoint>& pts, double u) {
  auto it = std::lower_bound(pts.begin(), pts.end(), u,
                             [](const CurvePoint& p, double x) { return p.u < x; });
  if (it == pts.begin()) return it->v;
  if (it == pts.end()) return pts.back().v;
  const CurvePoint& b = *it;
  const CurvePoint& a = *(it - 1);
  const double w = b.u > a.u ? (u - a.u) / (b.u - a.u) : 1.0;
  std::array<double, 6> out{};
  for (int k = 0; k < 6; ++k) out[k] = a.v[k] + w * (b.v[k] - a.v[k]);
  return out;
}

void finish(std::ofstream& out, const std::filesystem::path& path) {
  out.flush();
  if (!out) throw IoError("write failed on '" + path.string() + "'");
}

std::ofstream open_for_writing(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  return out;
}

}  // namespace

TraceRow make_row(const EngineState& s) {
  TraceRow r;
  r.t = s.time;
  r.phase = s.phase;
  r.step = s.phase == Phase::Standing ? 0 : s.step_count + 1;
  r.moving_leg = s.moving_side;
  r.phase_elapsed = s.phase_elapsed;
  r.phase_duration = s.phase_duration;
  r.step_elapsed = s.step_elapsed;
  r.step_duration = s.step_duration;
  r.left = s.left;
  r.right = s.right;
  r.left_foot_x = s.left_ankle.x;
  r.left_foot_z = s.left_ankle.z;
  r.right_foot_x = s.right_ankle.x;
  r.right_foot_z = s.right_ankle.z;
  r.hip_frame_x = s.hip.x;
  r.hip_frame_z = s.hip.z;
  return r;
}

std::vector<TraceRow> run_scripted(const ScriptConfig& config) {
  if (config.steps < 1) throw std::invalid_argument("a scripted run needs at least one step");
  if (config.lead_in_rows < 1) throw std::invalid_argument("lead-in must be at least one row");
  StepEngine engine({config.geometry, config.dt, config.behavior, config.parameters});

  std::vector<TraceRow> rows;
  rows.push_back(make_row(engine.state()));
  for (int i = 1; i < config.lead_in_rows; ++i) rows.push_back(make_row(engine.tick()));

  int triggered = 0;
  while (true) {
    const EngineState& s = engine.state();
    if (s.phase == Phase::Standing && s.step_count >= config.steps) break;
    if (triggered < config.steps && !s.pending_trigger && engine.trigger()) ++triggered;
    if (s.phase == Phase::Standing && !s.pending_trigger) {
      throw std::logic_error("scripted run stalled while standing");
    }
    rows.push_back(make_row(engine.tick()));
  }
  return rows;
}

bool NormalizedStepTrace::in_transfer(double x) const {
  constexpr double eps = 1e-12;
  return transfer_first ? x <= transfer_fraction + eps : x >= 1.0 - transfer_fraction - eps;
}

NormalizedStepTrace normalize_steps(const std::vector<TraceRow>& rows) {
  std::vector<StepRun> complete;
  for (std::size_t i = 0; i < rows.size();) {
    if (rows[i].step == 0) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j + 1 < rows.size() && rows[j + 1].step == rows[i].step) ++j;
    if (j + 1 < rows.size()) {
      const TraceRow& last = rows[j];
      const double reached = last.step_elapsed + (rows[j + 1].t - last.t);
      if (reached >= last.step_duration - 1e-9) complete.push_back({i, j});
    }
    i = j + 1;
  }
  if (complete.size() < 2) {
    std::ostringstream os;
    os << "need at least two complete steps to normalize, found " << complete.size();
    throw InsufficientSteps(os.str());
  }

  NormalizedStepTrace out;
  for (int j = 0; j < kNormalizedPoints; ++j) {
    out.u[j] = static_cast<double>(j) / (kNormalizedPoints - 1);
  }
  std::array<std::array<double, kNormalizedPoints>, 6> sum{};

  const TraceRow& head = rows[complete[1].first];
  out.transfer_first = head.phase == Phase::Transfer;
  for (std::size_t k = complete[1].first; k <= complete[1].last; ++k) {
    if (rows[k].phase == Phase::Transfer) {
      out.transfer_fraction = rows[k].phase_duration / rows[k].step_duration;
      break;
    }
  }

  for (std::size_t s = 1; s < complete.size(); ++s) {
    const StepRun run = complete[s];
    const TraceRow& first = rows[run.first];
    const TraceRow& last = rows[run.last];
    const Side moving = first.moving_leg.value_or(Side::Left);
    const double d = first.step_duration;

    std::vector<CurvePoint> pts;
    if (run.first > 0) {
      const TraceRow& prev = rows[run.first - 1];
      pts.push_back(curve_point(prev, (first.step_elapsed - (first.t - prev.t)) / d, moving));
    }
    for (std::size_t k = run.first; k <= run.last; ++k) {
      pts.push_back(curve_point(rows[k], rows[k].step_elapsed / d, moving));
    }
    const TraceRow& next = rows[run.last + 1];
    pts.push_back(curve_point(next, (last.step_elapsed + (next.t - last.t)) / d, moving));

    for (int j = 0; j < kNormalizedPoints; ++j) {
      const auto v = interpolate(pts, out.u[j]);
      for (int c = 0; c < 6; ++c) sum[c][j] += v[c];
    }
  }

  out.steps_averaged = static_cast<int>(complete.size() - 1);
  const double n = out.steps_averaged;
  for (int j = 0; j < kNormalizedPoints; ++j) {
    out.swing.hip[j] = sum[0][j] / n;
    out.swing.knee[j] = sum[1][j] / n;
    out.swing.ankle[j] = sum[2][j] / n;
    out.stance.hip[j] = sum[3][j] / n;
    out.stance.knee[j] = sum[4][j] / n;
    out.stance.ankle[j] = sum[5][j] / n;
  }
  return out;
}

const std::vector<std::string>& trace_columns() {
  static const std::vector<std::string> cols = [] {
    std::vector<std::string> c{"t_s", "phase", "step", "moving_leg"};
    for (const auto& col : kNumeric) c.emplace_back(col.name);
    return c;
  }();
  return cols;
}

const std::vector<std::string>& normalized_columns() {
  static const std::vector<std::string> cols{
      "u",          "swing_hip_rad",    "swing_knee_rad", "swing_ankle_rad",
      "stance_hip_rad", "stance_knee_rad", "stance_ankle_rad", "in_transfer",
      "transfer_fraction"};
  return cols;
}

void write_csv(std::ostream& out, const std::vector<TraceRow>& rows) {
  out << join(trace_columns()) << '\n';
  for (TraceRow r : rows) {
    out << format_number(r.t) << ',' << phase_name(r.phase) << ',' << r.step << ','
        << (r.moving_leg ? side_name(*r.moving_leg) : "none");
    for (const auto& col : kNumeric) out << ',' << format_number(col.get(r));
    out << '\n';
  }
}

void write_csv(std::ostream& out, const NormalizedStepTrace& tr) {
  out << join(normalized_columns()) << '\n';
  for (int j = 0; j < kNormalizedPoints; ++j) {
    out << format_number(tr.u[j]) << ',' << format_number(tr.swing.hip[j]) << ','
        << format_number(tr.swing.knee[j]) << ',' << format_number(tr.swing.ankle[j]) << ','
        << format_number(tr.stance.hip[j]) << ',' << format_number(tr.stance.knee[j]) << ','
        << format_number(tr.stance.ankle[j]) << ',' << (tr.in_transfer(tr.u[j]) ? 1 : 0)
        << ',' << format_number(tr.transfer_fraction) << '\n';
  }
}

void export_csv(const std::vector<TraceRow>& rows, const std::filesystem::path& path) {
  auto out = open_for_writing(path);
  write_csv(out, rows);
  finish(out, path);
}

void export_csv(const NormalizedStepTrace& trace, const std::filesystem::path& path) {
  auto out = open_for_writing(path);
  write_csv(out, trace);
  finish(out, path);
}

std::vector<TraceRow> read_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ParseError("trace CSV is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != join(trace_columns())) throw ParseError("unexpected trace CSV header");

  const std::size_t width = trace_columns().size();
  std::vector<TraceRow> rows;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto bad = [&](const std::string& what) {
      return ParseError("trace CSV line " + std::to_string(line_no) + ": " + what);
    };
    const auto cells = split(line);
    if (cells.size() != width) throw bad("expected " + std::to_string(width) + " cells");

    TraceRow r;
    const auto t = parse_number(cells[0]);
    if (!t) throw bad("bad time");
    r.t = *t;
    if (cells[1] == "standing") {
      r.phase = Phase::Standing;
    } else if (cells[1] == "transfer") {
      r.phase = Phase::Transfer;
    } else if (cells[1] == "swing") {
      r.phase = Phase::Swing;
    } else {
      throw bad("unknown phase '" + std::string(cells[1]) + "'");
    }
    const auto step = parse_number(cells[2]);
    if (!step || *step < 0 || *step != static_cast<int>(*step)) throw bad("bad step index");
    r.step = static_cast<int>(*step);
    if (cells[3] == "left") {
      r.moving_leg = Side::Left;
    } else if (cells[3] == "right") {
      r.moving_leg = Side::Right;
    } else if (cells[3] != "none") {
      throw bad("unknown leg '" + std::string(cells[3]) + "'");
    }
    for (std::size_t c = 0; c < std::size(kNumeric); ++c) {
      const auto v = parse_number(cells[4 + c]);
      if (!v) throw bad(std::string("bad value in ") + kNumeric[c].name);
      kNumeric[c].get(r) = *v;
    }
    rows.push_back(r);
  }
  if (in.bad()) throw IoError("read failed while importing trace");
  return rows;
}

std::vector<TraceRow> import_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  return read_csv(in);
}

}  // namespace exogait
