// fastlight: command-line front end for the effective-medium simulator.
//
//   fastlight sweep         --config <path> [--out <dir>] [--porcelain]
//   fastlight propagate     --config <path> [--out <dir>] [--porcelain]
//   fastlight fit           --reference <csv> --measured <csv> [--config <path>]
//                           [--w-min <w>] [--w-max <w>] [--porcelain]
//   fastlight reproduce-fig --fig {2,3,4} [--out <dir>] [--porcelain]
//
// Exit codes: 0 success, 2 config error, 3 input-data error, 4 fit failure.

#include <exception>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "fastlight/commands.hpp"

namespace {

using namespace fastlight;

struct CommonOptions {
  std::string config_path;
  std::string out_dir;
  bool porcelain = false;
};

void add_common(CLI::App* cmd, CommonOptions& opts, bool with_out = true) {
  cmd->add_option("--config", opts.config_path, "Scenario file (key = value)");
  if (with_out) cmd->add_option("--out", opts.out_dir, "Output directory");
  cmd->add_flag("--porcelain", opts.porcelain, "Single-line machine-readable output");
}

ScenarioConfig load_or_default(const CommonOptions& opts) {
  return opts.config_path.empty() ? ScenarioConfig{} : load_scenario(opts.config_path);
}

std::optional<std::string> cli_out(const CommonOptions& opts) {
  return opts.out_dir.empty() ? std::nullopt : std::optional<std::string>(opts.out_dir);
}

int run_sweep_cmd(const CommonOptions& opts) {
  const ScenarioConfig config = load_or_default(opts);
  const fs::path dir = resolve_output_dir(cli_out(opts), config.output_dir);
  const SweepResult result = cmd_sweep(config, dir);
  std::size_t extinct = 0;
  for (const auto& row : result.rows) extinct += row.extinct ? 1 : 0;
  if (opts.porcelain) {
    std::cout << "sweep_csv=" << (dir / "sweep.csv").string() << " rows=" << result.rows.size()
              << " extinct=" << extinct << '\n';
  } else {
    std::cout << "wrote " << (dir / "sweep.csv").string() << " (" << result.rows.size() << " points, " << extinct
              << " fully extinct)\n";
  }
  return 0;
}

int run_propagate_cmd(const CommonOptions& opts) {
  const ScenarioConfig config = load_or_default(opts);
  const fs::path dir = resolve_output_dir(cli_out(opts), config.output_dir);
  const PropagationRun run = cmd_propagate(config, dir);
  if (opts.porcelain) {
    std::cout << "out_dir=" << dir.string() << " outputs=" << run.outputs.size() << '\n';
    return 0;
  }
  std::cout << "wrote " << run.outputs.size() << " output pulse(s) to " << dir.string() << '\n';
  for (std::size_t k = 0; k < run.summary.size(); ++k) {
    const GeometrySummary& s = run.summary[k];
    std::cout << "  [" << k << "] Re W = " << format_double(s.re_w) << ", transmission "
              << format_double(s.transmission_db) << " dB, COM shift " << format_double(s.com_shift) << " s\n";
  }
  return 0;
}

int run_fit_cmd(const CommonOptions& opts, const std::string& reference, const std::string& measured,
                std::optional<double> w_min, std::optional<double> w_max) {
  const ScenarioConfig config = load_or_default(opts);
  WeakValueRange range = config.fit_range;
  if (w_min) range.lo = *w_min;
  if (w_max) range.hi = *w_max;
  if (!(range.hi > range.lo)) throw Error(ErrorKind::Config, "--w-max must exceed --w-min");
  const FitReport report = cmd_fit(reference, measured, config.fiber, range);
  std::cout << format_fit_report(report, opts.porcelain);
  return 0;
}

int run_reproduce_cmd(const CommonOptions& opts, int figure) {
  const fs::path dir = reproduce_figure(figure, resolve_output_dir(cli_out(opts), ""));
  if (opts.porcelain) {
    std::cout << "figure=" << figure << " out_dir=" << dir.string() << '\n';
  } else {
    std::cout << "figure " << figure << " data written to " << dir.string() << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fast- and slow-light simulator for a birefringent fiber between two polarizers"};
  app.require_subcommand(1);

  CommonOptions sweep_opts, propagate_opts, fit_opts, fig_opts;

  CLI::App* sweep = app.add_subcommand("sweep", "Optical properties versus detuning -> sweep.csv");
  add_common(sweep, sweep_opts);

  CLI::App* propagate = app.add_subcommand("propagate", "Propagate a pulse through one or more geometries");
  add_common(propagate, propagate_opts);

  CLI::App* fit = app.add_subcommand("fit", "Fit the real weak value from a reference and a measured pulse");
  add_common(fit, fit_opts, false);
  std::string reference, measured;
  std::optional<double> w_min, w_max;
  fit->add_option("--reference", reference, "Reference pulse CSV")->required();
  fit->add_option("--measured", measured, "Measured pulse CSV")->required();
  fit->add_option("--w-min", w_min, "Lower end of the weak-value search range");
  fit->add_option("--w-max", w_max, "Upper end of the weak-value search range");

  CLI::App* fig = app.add_subcommand("reproduce-fig", "Regenerate the data behind a figure");
  add_common(fig, fig_opts);
  int figure = 0;
  fig->add_option("--fig", figure, "Figure number")->required()->check(CLI::IsMember({2, 3, 4}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (sweep->parsed()) return run_sweep_cmd(sweep_opts);
    if (propagate->parsed()) return run_propagate_cmd(propagate_opts);
    if (fit->parsed()) return run_fit_cmd(fit_opts, reference, measured, w_min, w_max);
    if (fig->parsed()) return run_reproduce_cmd(fig_opts, figure);
  } catch (const Error& e) {
    std::cerr << "fastlight: " << e.what() << '\n';
    return exit_code_for(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "fastlight: " << e.what() << '\n';
    return 3;
  }
  return 2;
}
