#pragma once

// Scenario runners behind the `fastlight` command-line tool. Each command has a
// pure part returning data and a part writing the CSV artifacts.

#include <cmath>
#include <cstddef>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <future>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "fastlight/constants.hpp"
#include "fastlight/error.hpp"
#include "fastlight/estimation.hpp"
#include "fastlight/fft.hpp"
#include "fastlight/medium.hpp"
#include "fastlight/propagation.hpp"
#include "fastlight/scenario.hpp"
#include "fastlight/signal.hpp"
#include "fastlight/signal_csv.hpp"

namespace fastlight {

namespace fs = std::filesystem;

inline constexpr const char* kOutputRootEnv = "FASTLIGHT_SEED_DIR";
inline constexpr const char* kDefaultOutputDir = "fastlight_out";

/// 0 success, 2 config error, 3 input-data error, 4 fit failure.
inline int exit_code_for(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::InvalidData:
    case ErrorKind::GridMismatch:
    case ErrorKind::WrapAround:
    case ErrorKind::NegativeIntensity:
    case ErrorKind::ZeroEnergy:
    case ErrorKind::NeverCrosses:
      return 3;
    case ErrorKind::NoMinimum:
      return 4;
    default:
      return 2;
  }
}

/// --out wins; otherwise the config's output_dir (or the default name) is
/// resolved against $FASTLIGHT_SEED_DIR, falling back to the working directory.
inline fs::path resolve_output_dir(const std::optional<std::string>& cli_out, const std::string& config_out) {
  if (cli_out && !cli_out->empty()) return fs::path(*cli_out);
  const fs::path leaf = config_out.empty() ? fs::path(kDefaultOutputDir) : fs::path(config_out);
  if (leaf.is_absolute()) return leaf;
  const char* root = std::getenv(kOutputRootEnv);
  return root != nullptr && *root != '\0' ? fs::path(root) / leaf : leaf;
}

inline void ensure_directory(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorKind::InvalidData, "cannot create output directory " + dir.string() + ": " + ec.message());
}

inline void write_text(const fs::path& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error(ErrorKind::InvalidData, "cannot open " + path.string() + " for writing");
  os << text;
}

// ---------------------------------------------------------------- sweep

struct SweepRow {
  double detuning_hz = 0.0;
  double kappa_per_m = std::numeric_limits<double>::quiet_NaN();
  double n = std::numeric_limits<double>::quiet_NaN();
  double n_g = std::numeric_limits<double>::quiet_NaN();
  double re_w = std::numeric_limits<double>::quiet_NaN();
  double im_w = std::numeric_limits<double>::quiet_NaN();
  double transmission = 0.0;  // |G|^2
  bool extinct = false;
};

struct SweepResult {
  std::vector<SweepRow> rows;
};

inline SweepResult run_sweep(const EffectiveMedium& em, double carrier, const SweepSpec& spec) {
  SweepResult result;
  result.rows.reserve(spec.points);
  const double span = spec.detuning_max - spec.detuning_min;
  for (std::size_t i = 0; i < spec.points; ++i) {
    SweepRow row;
    row.detuning_hz = i + 1 == spec.points
                          ? spec.detuning_max
                          : spec.detuning_min + span * static_cast<double>(i) / static_cast<double>(spec.points - 1);
    const double omega = carrier + 2.0 * kPi * row.detuning_hz;
    row.transmission = std::norm(detail::birefringent_response(em, omega));
    try {
      row.kappa_per_m = absorption_coeff(em, omega);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::FullExtinction) throw;
      row.extinct = true;
    }
    if (em.w0()) {
      row.n = refractive_index(em, omega);
      try {
        const WeakValue w = weak_value_at(em, omega);
        row.re_w = w.re;
        row.im_w = w.im;
        row.n_g = group_index(em, omega);
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::OrthogonalSelection) throw;
      }
    }
    result.rows.push_back(row);
  }
  return result;
}

inline void write_sweep_csv(std::ostream& os, const SweepResult& r) {
  os << "detuning_hz,kappa_per_m,n,n_g,re_w,im_w,transmission,inf\n";
  for (const SweepRow& row : r.rows) {
    os << format_double(row.detuning_hz) << ',' << format_double(row.kappa_per_m) << ',' << format_double(row.n) << ','
       << format_double(row.n_g) << ',' << format_double(row.re_w) << ',' << format_double(row.im_w) << ','
       << format_double(row.transmission) << ',' << (row.extinct ? 1 : 0) << '\n';
  }
}

inline std::string sweep_plot_script(const std::vector<std::string>& csv_names) {
  std::ostringstream py;
  py << "#!/usr/bin/env python3\n"
        "# Refractive index and absorption versus detuning.\n"
        "import os, sys\n"
        "import pandas as pd\n"
        "import matplotlib.pyplot as plt\n\n"
        "here = os.path.dirname(os.path.abspath(__file__))\n"
        "files = [";
  for (std::size_t i = 0; i < csv_names.size(); ++i) py << (i ? ", " : "") << "'" << csv_names[i] << "'";
  py << "]\n"
        "fig, (ax_n, ax_k) = plt.subplots(2, 1, sharex=True, figsize=(6, 6))\n"
        "for name in files:\n"
        "    d = pd.read_csv(os.path.join(here, name))\n"
        "    ax_n.plot(d.detuning_hz / 1e9, d.n, label=name)\n"
        "    ax_k.plot(d.detuning_hz / 1e9, d.kappa_per_m, label=name)\n"
        "ax_n.set_ylabel('n')\n"
        "ax_k.set_ylabel('kappa [1/m]')\n"
        "ax_k.set_xlabel('detuning [GHz]')\n"
        "ax_n.legend()\n"
        "fig.tight_layout()\n"
        "fig.savefig(os.path.join(here, 'sweep.png'), dpi=150)\n"
        "if '--show' in sys.argv:\n"
        "    plt.show()\n";
  return py.str();
}

inline SweepResult cmd_sweep(const ScenarioConfig& config, const fs::path& out_dir) {
  const EffectiveMedium em = resolve_medium(config);
  SweepResult result = run_sweep(em, config.carrier(), config.sweep);
  ensure_directory(out_dir);
  std::ostringstream csv;
  write_sweep_csv(csv, result);
  write_text(out_dir / "sweep.csv", csv.str());
  if (config.plot_scripts) write_text(out_dir / "plot_sweep.py", sweep_plot_script({"sweep.csv"}));
  return result;
}

// ---------------------------------------------------------------- propagate

struct GeometrySummary {
  double post_angle_deg = std::numeric_limits<double>::quiet_NaN();
  double re_w = std::numeric_limits<double>::quiet_NaN();  // at the carrier
  double transmission_db = 0.0;                              // output / input energy
  double com_shift = std::numeric_limits<double>::quiet_NaN();
  double peak_shift = std::numeric_limits<double>::quiet_NaN();
  double front_arrival = std::numeric_limits<double>::quiet_NaN();
};

struct PropagationRun {
  SampledSignal input;
  std::vector<SampledSignal> outputs;
  std::vector<GeometrySummary> summary;
};

inline GeometrySummary summarize(const SampledSignal& input, const SampledSignal& output, const EffectiveMedium& em,
                                 const SelectionSpec& spec, double front_threshold) {
  GeometrySummary s;
  if (spec.mode == SelectionSpec::Mode::Angle) s.post_angle_deg = spec.angle * 180.0 / kPi;
  try {
    s.re_w = weak_value_at(em, input.carrier_omega()).re;
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::OrthogonalSelection) throw;
  }
  const double e_in = input.energy();
  const double e_out = output.energy();
  s.transmission_db = e_out > 0.0 ? 10.0 * std::log10(e_out / e_in) : -std::numeric_limits<double>::infinity();
  if (e_out > 0.0) {
    s.com_shift = center_of_mass(output) - center_of_mass(input);
    s.peak_shift = peak_time(output) - peak_time(input);
    try {
      s.front_arrival = front_arrival(output, front_threshold, input.peak_intensity());
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::NeverCrosses) throw;
    }
  }
  return s;
}

/// Propagates the configured pulse through every geometry of the sequence (or
/// the single post-selection). Geometries run concurrently.
inline PropagationRun run_propagation(const ScenarioConfig& config) {
  SampledSignal input = build_input_pulse(config);
  const std::vector<SelectionSpec> geometries =
      config.sequence.empty() ? std::vector<SelectionSpec>{config.post} : config.sequence;
  PropagationOptions opts;
  opts.remove_free_delay = config.remove_free_delay;
  check_wrap_around(input, config.fiber, opts);

  const FftPlan plan(input.size());
  std::vector<std::future<std::pair<SampledSignal, GeometrySummary>>> jobs;
  jobs.reserve(geometries.size());
  for (const SelectionSpec& spec : geometries) {
    jobs.push_back(std::async(std::launch::async, [&, spec] {
      const EffectiveMedium em = resolve_medium(config, spec);
      SampledSignal out = propagate_spectral(input, em, opts, plan);
      GeometrySummary s = summarize(input, out, em, spec, config.front_threshold);
      return std::make_pair(std::move(out), s);
    }));
  }
  PropagationRun run{input, {}, {}};
  for (auto& job : jobs) {
    auto [out, s] = job.get();
    run.outputs.push_back(std::move(out));
    run.summary.push_back(s);
  }
  return run;
}

inline void write_summary_csv(std::ostream& os, const std::vector<GeometrySummary>& rows) {
  os << "geometry,post_angle_deg,re_w,transmission_db,com_shift_s,peak_shift_s,front_arrival_s\n";
  for (std::size_t k = 0; k < rows.size(); ++k) {
    const GeometrySummary& s = rows[k];
    os << k << ',' << format_double(s.post_angle_deg) << ',' << format_double(s.re_w) << ','
       << format_double(s.transmission_db) << ',' << format_double(s.com_shift) << ',' << format_double(s.peak_shift)
       << ',' << format_double(s.front_arrival) << '\n';
  }
}

inline std::string propagate_plot_script(std::size_t n_outputs) {
  std::ostringstream py;
  py << "#!/usr/bin/env python3\n"
        "# Input and output pulses, linear and dB panels.\n"
        "import os, sys\n"
        "import numpy as np\n"
        "import pandas as pd\n"
        "import matplotlib.pyplot as plt\n\n"
        "here = os.path.dirname(os.path.abspath(__file__))\n"
        "n_outputs = "
     << n_outputs
     << "\n"
        "ref = pd.read_csv(os.path.join(here, 'input.csv'))\n"
        "peak = ref.intensity.max()\n"
        "fig, (ax_lin, ax_db) = plt.subplots(2, 1, sharex=True, figsize=(6, 7))\n"
        "ax_lin.plot(ref.time_s * 1e9, ref.intensity / peak, 'k--', label='reference')\n"
        "ax_db.plot(ref.time_s * 1e9, 10 * np.log10(np.maximum(ref.intensity / peak, 1e-12)), 'k--')\n"
        "for k in range(n_outputs):\n"
        "    d = pd.read_csv(os.path.join(here, f'output_{k}.csv'))\n"
        "    ax_lin.plot(d.time_s * 1e9, d.intensity / d.intensity.max(), label=f'output {k}')\n"
        "    ax_db.plot(d.time_s * 1e9, 10 * np.log10(np.maximum(d.intensity / peak, 1e-12)))\n"
        "ax_lin.set_ylabel('normalized intensity')\n"
        "ax_db.set_ylabel('intensity [dB re. input peak]')\n"
        "ax_db.set_xlabel('time [ns]')\n"
        "ax_db.set_ylim(-80, 3)\n"
        "ax_lin.legend()\n"
        "fig.tight_layout()\n"
        "fig.savefig(os.path.join(here, 'pulses.png'), dpi=150)\n"
        "if '--show' in sys.argv:\n"
        "    plt.show()\n";
  return py.str();
}

inline PropagationRun cmd_propagate(const ScenarioConfig& config, const fs::path& out_dir) {
  PropagationRun run = run_propagation(config);
  ensure_directory(out_dir);
  write_signal_csv((out_dir / "input.csv").string(), run.input);
  for (std::size_t k = 0; k < run.outputs.size(); ++k) {
    write_signal_csv((out_dir / ("output_" + std::to_string(k) + ".csv")).string(), run.outputs[k]);
  }
  std::ostringstream summary;
  write_summary_csv(summary, run.summary);
  write_text(out_dir / "summary.csv", summary.str());
  if (config.plot_scripts) write_text(out_dir / "plot_pulses.py", propagate_plot_script(run.outputs.size()));
  return run;
}

// ---------------------------------------------------------------- fit

struct FitReport {
  FitResult fit;
  double mean_shift = 0.0;  // s
  double group_index = 0.0;
  double velocity_over_c = 0.0;
};

inline FitReport make_fit_report(const FitResult& fit, const FiberMedium& fiber) {
  FitReport r;
  r.fit = fit;
  r.mean_shift = 0.5 * fiber.dgd * fit.w_estimate;
  r.group_index = fiber.index + kSpeedOfLight * fiber.dgd / (2.0 * fiber.length) * fit.w_estimate;
  r.velocity_over_c = 1.0 / r.group_index;
  return r;
}

inline FitReport cmd_fit(const std::string& reference_csv, const std::string& measured_csv, const FiberMedium& fiber,
                         const WeakValueRange& range) {
  const SampledSignal reference = read_signal_csv(reference_csv);
  const SampledSignal measured = read_signal_csv(measured_csv);
  return make_fit_report(fit_weak_value(reference, measured, fiber, range), fiber);
}

inline std::string format_fit_report(const FitReport& r, bool porcelain) {
  std::ostringstream os;
  if (porcelain) {
    os << "w=" << format_double(r.fit.w_estimate) << " amplitude_scale=" << format_double(r.fit.amplitude_scale)
       << " residual=" << format_double(r.fit.residual) << " mean_shift_s=" << format_double(r.mean_shift)
       << " n_g=" << format_double(r.group_index) << " vg_over_c=" << format_double(r.velocity_over_c)
       << " iterations=" << r.fit.iterations << '\n';
    return os.str();
  }
  os << "weak value W      : " << format_double(r.fit.w_estimate) << '\n'
     << "amplitude scale   : " << format_double(r.fit.amplitude_scale) << '\n'
     << "residual (rel L2) : " << format_double(r.fit.residual) << '\n'
     << "mean shift <t>    : " << format_double(r.mean_shift) << " s\n"
     << "group index n_g   : " << format_double(r.group_index) << '\n'
     << "v_g / c           : " << format_double(r.velocity_over_c) << '\n'
     << "evaluations       : " << r.fit.iterations << '\n';
  return os.str();
}

// ---------------------------------------------------------------- figures

/// Static W0 = w for a 45-degree pre-selection and a linear post-selection:
/// W0 = tan(pi/4 - theta).
inline double post_angle_for_static_weak_value(double w) { return kPi / 4.0 - std::atan(w); }

inline ScenarioConfig figure2_config(double w0) {
  ScenarioConfig c;
  c.post = SelectionSpec{};
  c.post.mode = SelectionSpec::Mode::Angle;
  c.post.angle = detail::normalize_angle(post_angle_for_static_weak_value(w0));
  c.sweep = SweepSpec{-200e9, 200e9, 2001};
  return c;
}

/// Square 2 ns pulses through post-selections of decreasing transmission; the
/// free delay is kept so fronts sit at the c/n_f arrival time.
inline ScenarioConfig figure3a_config() {
  ScenarioConfig c;
  c.pulse.shape = PulseSpec::Shape::Square;
  c.pulse.width = 2e-9;
  c.pulse.rise = 20e-12;
  c.pulse.dt = 0.5 * c.fiber.dgd;
  c.pulse.samples = 16384;
  c.remove_free_delay = false;
  for (double w : {-1.0, -3.0, -10.0, -30.0, -60.0}) {
    SelectionSpec s;
    s.mode = SelectionSpec::Mode::WeakValue;
    s.weak_value = w;
    c.sequence.push_back(s);
  }
  return c;
}

/// OTDR-like 2 ns Gaussian with a representative fast (b) or slow (c) weak
/// value below the superluminal bound.
inline ScenarioConfig figure3bc_config(double w) {
  ScenarioConfig c;
  c.pulse.shape = PulseSpec::Shape::Gaussian;
  c.pulse.width = 2e-9;
  c.pulse.dt = 5e-12;
  c.pulse.samples = 16384;
  c.post = SelectionSpec{};
  c.post.mode = SelectionSpec::Mode::WeakValue;
  c.post.weak_value = w;
  return c;
}

/// 50 ns Gaussian, fast (W = -3500) and slow (W = +3500).
inline ScenarioConfig figure4_config() {
  ScenarioConfig c;
  c.pulse.shape = PulseSpec::Shape::Gaussian;
  c.pulse.width = 50e-9;
  c.pulse.dt = 0.1e-9;
  c.pulse.samples = 16384;
  for (double w : {-3500.0, 3500.0}) {
    SelectionSpec s;
    s.mode = SelectionSpec::Mode::WeakValue;
    s.weak_value = w;
    c.sequence.push_back(s);
  }
  return c;
}

/// Regenerates the datasets behind one figure under out_dir. Returns the
/// directory written.
inline fs::path reproduce_figure(int figure, const fs::path& out_dir) {
  switch (figure) {
    case 2: {
      const fs::path dir = out_dir / "fig2";
      const ScenarioConfig plus = figure2_config(60.0);
      const ScenarioConfig minus = figure2_config(-60.0);
      ensure_directory(dir);
      for (const auto& [cfg, name] : {std::pair{plus, "sweep_w0_plus60.csv"}, std::pair{minus, "sweep_w0_minus60.csv"}}) {
        std::ostringstream csv;
        write_sweep_csv(csv, run_sweep(resolve_medium(cfg), cfg.carrier(), cfg.sweep));
        write_text(dir / name, csv.str());
      }
      write_text(dir / "plot_sweep.py", sweep_plot_script({"sweep_w0_plus60.csv", "sweep_w0_minus60.csv"}));
      return dir;
    }
    case 3: {
      const fs::path dir = out_dir / "fig3";
      cmd_propagate(figure3a_config(), dir / "a");
      std::ostringstream fits;
      fits << "panel,w_true,w_estimate,residual\n";
      for (const auto& [panel, w] : {std::pair{"b", -500.0}, std::pair{"c", 500.0}}) {
        const ScenarioConfig cfg = figure3bc_config(w);
        const PropagationRun run = cmd_propagate(cfg, dir / panel);
        const FitResult fit = fit_weak_value(run.input, run.outputs.front(), cfg.fiber, cfg.fit_range);
        fits << panel << ',' << format_double(w) << ',' << format_double(fit.w_estimate) << ','
             << format_double(fit.residual) << '\n';
      }
      write_text(dir / "fits.csv", fits.str());
      return dir;
    }
    case 4: {
      const fs::path dir = out_dir / "fig4";
      const ScenarioConfig cfg = figure4_config();
      const PropagationRun run = cmd_propagate(cfg, dir);
      const double reference_peak = peak_time(run.input);
      // Where the peak would sit had the pulse crossed L at c instead of c/n_f.
      const double c_travel = reference_peak - (cfg.fiber.index - 1.0) * cfg.fiber.length / kSpeedOfLight;
      std::ostringstream markers;
      markers << "marker,time_s\n"
              << "reference_peak," << format_double(reference_peak) << '\n'
              << "c_travel_peak," << format_double(c_travel) << '\n'
              << "fast_peak," << format_double(peak_time(run.outputs[0])) << '\n'
              << "slow_peak," << format_double(peak_time(run.outputs[1])) << '\n';
      write_text(dir / "markers.csv", markers.str());
      return dir;
    }
    default:
      throw Error(ErrorKind::Config, "no reproduction for figure " + std::to_string(figure) + " (expected 2, 3 or 4)");
  }
}

}  // namespace fastlight
