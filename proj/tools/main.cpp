#if __has_include(<CLI/CLI.hpp>)
#include <CLI/CLI.hpp>
#else
#include <CLI11.hpp>
#endif

#include <csignal>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "exogait/errors.hpp"
#include "exogait/parameter_store.hpp"
#include "exogait/pilot_service.hpp"
#include "exogait/step_engine.hpp"
#include "exogait/trace.hpp"

namespace {

struct Common {
  std::string params_path;
  std::string geom_path;
  double dt = exogait::kDefaultDt;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--params", c.params_path, "parameter-set file overriding the builtin presets")
      ->check(CLI::ExistingFile);
  cmd->add_option("--geom", c.geom_path, "leg geometry file")->check(CLI::ExistingFile);
  cmd->add_option("--dt", c.dt, "control period in seconds")->check(CLI::PositiveNumber);
}

exogait::ParameterStore load_store(const Common& c) {
  exogait::ParameterStore store;
  if (!c.params_path.empty()) store.load(c.params_path);
  return store;
}

exogait::LegGeometry load_geom(const Common& c) {
  return c.geom_path.empty() ? exogait::LegGeometry{} : exogait::load_geometry(c.geom_path);
}

int serve(const Common& c, const std::string& bind, double rate, double time_scale) {
  // Block the stop signals before any thread starts so only sigwait sees them.
  sigset_t stop_signals;
  sigemptyset(&stop_signals);
  sigaddset(&stop_signals, SIGINT);
  sigaddset(&stop_signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &stop_signals, nullptr);

  exogait::StepEngine engine({load_geom(c), c.dt, exogait::Behavior::flat(), load_store(c)});
  exogait::PilotService service(std::move(engine), {bind, rate, time_scale});
  service.start();
  std::cerr << "exogait: serving on port " << service.port() << " (" << rate << " Hz stream)\n";
  int sig = 0;
  sigwait(&stop_signals, &sig);
  service.stop();
  const auto stats = service.stats();
  std::cerr << "exogait: stopped; " << stats.frames_sent << " frames sent, "
            << stats.frames_dropped << " dropped\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sagittal exoskeleton gait engine"};
  app.require_subcommand(1);

  Common run_opts;
  std::string behavior = "flat";
  int steps = 10;
  int lead_in = 50;
  std::string out_path;
  auto* run = app.add_subcommand("run", "scripted run of continuously triggered steps to CSV");
  run->add_option("--behavior", behavior,
                  "flat, stairs_up, stairs_down, ramp_up, ramp_down or stones:<m>")
      ->required();
  run->add_option("--steps", steps, "number of steps")->required();
  run->add_option("--lead-in", lead_in, "standing rows before the first trigger")
      ->check(CLI::PositiveNumber);
  run->add_option("--out", out_path, "output CSV path")->required();
  add_common(run, run_opts);

  std::string in_path, norm_out;
  auto* normalize = app.add_subcommand("normalize", "average step of a trace CSV on a 0-1 grid");
  normalize->add_option("--in", in_path, "trace CSV written by 'run'")->required()->check(
      CLI::ExistingFile);
  normalize->add_option("--out", norm_out, "output CSV path")->required();

  Common serve_opts;
  std::string bind = "127.0.0.1:7878";
  double rate = 50.0;
  double time_scale = 1.0;
  auto* serve_cmd = app.add_subcommand("serve", "live engine behind the pilot TCP protocol");
  serve_cmd->add_option("--bind", bind, "listen address host:port");
  serve_cmd->add_option("--rate", rate, "state stream rate in Hz")->check(CLI::PositiveNumber);
  serve_cmd->add_option("--time-scale", time_scale, "engine seconds per wall second")
      ->check(CLI::PositiveNumber);
  add_common(serve_cmd, serve_opts);

  std::string presets_out;
  auto* presets = app.add_subcommand("presets", "print the builtin parameter sets");
  presets->add_option("--out", presets_out, "write to a file instead of stdout");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      exogait::ScriptConfig cfg;
      try {
        cfg.behavior = exogait::Behavior::parse(behavior);
      } catch (const std::invalid_argument& e) {
        std::cerr << "exogait: invalid behavior: " << e.what() << '\n';
        return 2;
      }
      cfg.steps = steps;
      cfg.parameters = load_store(run_opts);
      cfg.geometry = load_geom(run_opts);
      cfg.dt = run_opts.dt;
      cfg.lead_in_rows = lead_in;
      const auto rows = exogait::run_scripted(cfg);
      exogait::export_csv(rows, out_path);
      std::cerr << "exogait: " << rows.size() << " rows written to " << out_path << '\n';
    } else if (*normalize) {
      const auto trace = exogait::normalize_steps(exogait::import_csv(in_path));
      exogait::export_csv(trace, norm_out);
      std::cerr << "exogait: averaged " << trace.steps_averaged << " steps into " << norm_out
                << '\n';
    } else if (*serve_cmd) {
      return serve(serve_opts, bind, rate, time_scale);
    } else if (*presets) {
      const auto text = exogait::serialize(exogait::builtin_presets());
      if (presets_out.empty()) {
        std::cout << text;
      } else {
        std::ofstream out(presets_out);
        out << text;
        if (!out) throw exogait::IoError("cannot write '" + presets_out + "'");
      }
    }
  } catch (const exogait::ValidationError& e) {
    std::cerr << "exogait: invalid parameters: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "exogait: error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
