#pragma once

// Scenario files: flat `key = value` lines, `#` starts a comment. Numbers may
// carry a unit suffix (`2.66ps`, `1.5m`, `45deg`, `-200GHz`). Bare numbers are
// SI base units, except angles, which default to degrees.
//
//   fiber.length = 1.5m            fiber.index = 1.5
//   fiber.dgd = 2.66ps             fiber.wavelength = 1550nm
//   pre.angle = 45deg              pre.phase = 0deg
//   pre.jones = 1, 0.5+0.5i        (overrides pre.angle / pre.phase)
//   post.angle = 135deg            post.phase = 0deg | carrier
//   post.jones = ...               post.weak_value = -3500
//   pulse.shape = gaussian | square
//   pulse.width = 50ns             (Gaussian intensity FWHM / square duration)
//   pulse.rise = 20ps              pulse.dt = 0.1ns
//   pulse.samples = 16384          pulse.position = 800ns (center / start)
//   sweep.detuning_min = -200GHz   sweep.detuning_max = 200GHz
//   sweep.points = 2001
//   sequence.post_angles = 134deg, 135deg, ...
//   sequence.weak_values = -1, -10, -100
//   remove_free_delay = true       front_threshold = 1e-3
//   fit.w_min = -5000              fit.w_max = 5000
//   output_dir = run1              plot_scripts = true

#include <cmath>
#include <complex>
#include <cstddef>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "fastlight/constants.hpp"
#include "fastlight/error.hpp"
#include "fastlight/estimation.hpp"
#include "fastlight/medium.hpp"
#include "fastlight/polarization.hpp"
#include "fastlight/signal.hpp"
#include "fastlight/signal_csv.hpp"

namespace fastlight {

struct SelectionSpec {
  enum class Mode { Angle, Jones, WeakValue };

  Mode mode = Mode::Angle;
  double angle = 0.0;  // rad, normalized to [0, pi)
  double phase = 0.0;  // rad, on the V component
  bool phase_from_carrier = false;
  Complex jones_h = 1.0;
  Complex jones_v = 0.0;
  double weak_value = 0.0;
};

struct PulseSpec {
  enum class Shape { Gaussian, Square };

  Shape shape = Shape::Gaussian;
  double width = 50e-9;
  double rise = 20e-12;
  double dt = 0.1e-9;
  std::size_t samples = 16384;
  std::optional<double> position;
};

struct SweepSpec {
  double detuning_min = -200e9;  // Hz
  double detuning_max = 200e9;   // Hz
  std::size_t points = 2001;
};

struct ScenarioConfig {
  FiberMedium fiber{};
  double wavelength = kDefaultWavelength;
  SelectionSpec pre{SelectionSpec::Mode::Angle, kPi / 4.0};
  SelectionSpec post{SelectionSpec::Mode::Angle, 3.0 * kPi / 4.0 - 1.0 / 60.0};
  PulseSpec pulse{};
  SweepSpec sweep{};
  std::vector<SelectionSpec> sequence;
  bool remove_free_delay = true;
  double front_threshold = kDefaultFrontThreshold;
  WeakValueRange fit_range{};
  std::string output_dir;
  bool plot_scripts = true;

  double carrier() const noexcept { return carrier_omega(wavelength); }
};

namespace detail {

enum class Dimension { None, Length, Time, Angle, Frequency };

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

[[noreturn]] inline void config_error(std::size_t line, std::string_view key, const std::string& msg) {
  std::string where = line > 0 ? "line " + std::to_string(line) + ": " : std::string();
  if (!key.empty()) where += "'" + std::string(key) + "': ";
  throw Error(ErrorKind::Config, where + msg);
}

inline std::optional<double> unit_scale(Dimension dim, std::string_view unit) {
  static const std::map<std::string_view, double> length{{"m", 1.0},     {"km", 1e3},  {"cm", 1e-2},
                                                          {"mm", 1e-3},  {"um", 1e-6}, {"nm", 1e-9}};
  static const std::map<std::string_view, double> time{{"s", 1.0},    {"ms", 1e-3},  {"us", 1e-6},
                                                       {"ns", 1e-9},  {"ps", 1e-12}, {"fs", 1e-15}};
  static const std::map<std::string_view, double> angle{{"deg", kPi / 180.0}, {"rad", 1.0}};
  static const std::map<std::string_view, double> freq{{"Hz", 1.0}, {"kHz", 1e3}, {"MHz", 1e6},
                                                       {"GHz", 1e9}, {"THz", 1e12}};
  const std::map<std::string_view, double>* table = nullptr;
  switch (dim) {
    case Dimension::None: return unit.empty() ? std::optional<double>(1.0) : std::nullopt;
    case Dimension::Length: table = &length; break;
    case Dimension::Time: table = &time; break;
    case Dimension::Angle: table = &angle; break;
    case Dimension::Frequency: table = &freq; break;
  }
  if (unit.empty()) return dim == Dimension::Angle ? kPi / 180.0 : 1.0;
  const auto it = table->find(unit);
  if (it == table->end()) return std::nullopt;
  return it->second;
}

inline double parse_quantity(std::string_view text, Dimension dim, std::size_t line, std::string_view key) {
  text = trim(text);
  std::size_t split = text.size();
  while (split > 0 && std::isalpha(static_cast<unsigned char>(text[split - 1]))) --split;
  // Keep an exponent like "1e" out of the unit suffix.
  std::string_view number = trim(text.substr(0, split));
  std::string_view unit = trim(text.substr(split));
  double value = 0.0;
  if (!parse_double(number, value) || !std::isfinite(value)) {
    config_error(line, key, "expected a number, got '" + std::string(text) + "'");
  }
  const auto scale = unit_scale(dim, unit);
  if (!scale) config_error(line, key, "unknown unit '" + std::string(unit) + "'");
  return value * *scale;
}

inline std::vector<std::string_view> split_list(std::string_view text) {
  std::vector<std::string_view> out;
  while (true) {
    const auto comma = text.find(',');
    out.push_back(trim(text.substr(0, comma)));
    if (comma == std::string_view::npos) break;
    text.remove_prefix(comma + 1);
  }
  return out;
}

/// Accepts `x`, `yi`, `x+yi`, `x-yi` (also `j`).
inline Complex parse_complex(std::string_view text, std::size_t line, std::string_view key) {
  text = trim(text);
  if (text.empty()) config_error(line, key, "empty complex number");
  const char last = text.back();
  if (last != 'i' && last != 'j') {
    double re = 0.0;
    if (!parse_double(text, re)) config_error(line, key, "bad complex number '" + std::string(text) + "'");
    return {re, 0.0};
  }
  std::string_view body = text.substr(0, text.size() - 1);
  // Split at the last sign that is not a leading sign or part of an exponent.
  std::size_t split = std::string_view::npos;
  for (std::size_t i = body.size(); i-- > 1;) {
    if ((body[i] == '+' || body[i] == '-') && body[i - 1] != 'e' && body[i - 1] != 'E') {
      split = i;
      break;
    }
  }
  double re = 0.0, im = 0.0;
  std::string_view im_text = split == std::string_view::npos ? body : body.substr(split);
  if (split != std::string_view::npos && !parse_double(body.substr(0, split), re)) {
    config_error(line, key, "bad complex number '" + std::string(text) + "'");
  }
  if (im_text == "" || im_text == "+") {
    im = 1.0;
  } else if (im_text == "-") {
    im = -1.0;
  } else if (!parse_double(im_text, im)) {
    config_error(line, key, "bad complex number '" + std::string(text) + "'");
  }
  return {re, im};
}

inline bool parse_bool(std::string_view text, std::size_t line, std::string_view key) {
  text = trim(text);
  if (text == "true" || text == "yes" || text == "on" || text == "1") return true;
  if (text == "false" || text == "no" || text == "off" || text == "0") return false;
  config_error(line, key, "expected true/false, got '" + std::string(text) + "'");
}

inline double normalize_angle(double theta) {
  double t = std::fmod(theta, kPi);
  if (t < 0.0) t += kPi;
  if (t >= kPi) t -= kPi;
  return t;
}

inline std::size_t parse_count(std::string_view text, std::size_t line, std::string_view key) {
  const double v = parse_quantity(text, Dimension::None, line, key);
  if (v < 0.0 || v != std::floor(v) || v > 1e9) config_error(line, key, "expected a non-negative integer");
  return static_cast<std::size_t>(v);
}

inline void apply_selection_key(SelectionSpec& s, std::string_view field, std::string_view value, std::size_t line,
                                std::string_view key, bool allow_weak_value) {
  if (field == "angle") {
    if (s.mode != SelectionSpec::Mode::Jones) s.mode = SelectionSpec::Mode::Angle;
    s.angle = normalize_angle(parse_quantity(value, Dimension::Angle, line, key));
  } else if (field == "phase") {
    if (trim(value) == "carrier") {
      s.phase_from_carrier = true;
      s.phase = 0.0;
    } else {
      s.phase_from_carrier = false;
      s.phase = parse_quantity(value, Dimension::Angle, line, key);
    }
  } else if (field == "jones") {
    const auto parts = split_list(value);
    if (parts.size() != 2) config_error(line, key, "expected two complex amplitudes 'h, v'");
    s.mode = SelectionSpec::Mode::Jones;
    s.jones_h = parse_complex(parts[0], line, key);
    s.jones_v = parse_complex(parts[1], line, key);
    if (std::abs(s.jones_h) == 0.0 && std::abs(s.jones_v) == 0.0) config_error(line, key, "zero Jones vector");
  } else if (field == "weak_value" && allow_weak_value) {
    s.mode = SelectionSpec::Mode::WeakValue;
    s.weak_value = parse_quantity(value, Dimension::None, line, key);
  } else {
    config_error(line, key, "unknown key");
  }
}

}  // namespace detail

inline void validate(const ScenarioConfig& c) {
  using detail::config_error;
  const FiberMedium& f = c.fiber;
  if (!(f.length > 0.0)) config_error(0, "fiber.length", "must be positive");
  if (!(f.index >= 1.0)) config_error(0, "fiber.index", "must be >= 1");
  if (!(f.dgd > 0.0)) config_error(0, "fiber.dgd", "must be positive");
  if (!(c.wavelength > 0.0)) config_error(0, "fiber.wavelength", "must be positive");
  if (!(c.pulse.width > 0.0)) config_error(0, "pulse.width", "must be positive");
  if (!(c.pulse.rise > 0.0)) config_error(0, "pulse.rise", "must be positive");
  if (!(c.pulse.dt > 0.0)) config_error(0, "pulse.dt", "must be positive");
  if (c.pulse.samples < kMinSamples) config_error(0, "pulse.samples", "must be at least 8");
  if (c.sweep.points < 2) config_error(0, "sweep.points", "a sweep needs at least 2 points");
  if (!(c.sweep.detuning_max > c.sweep.detuning_min)) {
    config_error(0, "sweep.detuning_max", "must exceed sweep.detuning_min");
  }
  if (2.0 * kPi * c.sweep.detuning_min + c.carrier() <= 0.0) {
    config_error(0, "sweep.detuning_min", "sweep reaches non-positive absolute frequency");
  }
  if (!(c.front_threshold > 0.0 && c.front_threshold < 1.0)) config_error(0, "front_threshold", "must lie in (0, 1)");
  if (!(c.fit_range.hi > c.fit_range.lo)) config_error(0, "fit.w_max", "must exceed fit.w_min");
}

inline ScenarioConfig parse_scenario(std::string_view text) {
  using namespace detail;
  ScenarioConfig c;
  std::map<std::string, std::size_t, std::less<>> seen;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text.remove_prefix(nl == std::string_view::npos ? text.size() : nl + 1);
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) config_error(line_no, "", "expected 'key = value'");
    const std::string_view key = trim(line.substr(0, eq));
    const std::string_view value = trim(line.substr(eq + 1));
    if (key.empty()) config_error(line_no, "", "missing key");
    if (value.empty()) config_error(line_no, key, "missing value");
    if (const auto it = seen.find(key); it != seen.end()) {
      config_error(line_no, key, "duplicate key (first set on line " + std::to_string(it->second) + ")");
    }
    seen.emplace(std::string(key), line_no);

    const auto dot = key.find('.');
    const std::string_view group = dot == std::string_view::npos ? std::string_view() : key.substr(0, dot);
    const std::string_view field = dot == std::string_view::npos ? key : key.substr(dot + 1);

    if (group == "fiber") {
      if (field == "length") c.fiber.length = parse_quantity(value, Dimension::Length, line_no, key);
      else if (field == "index") c.fiber.index = parse_quantity(value, Dimension::None, line_no, key);
      else if (field == "dgd") c.fiber.dgd = parse_quantity(value, Dimension::Time, line_no, key);
      else if (field == "wavelength") c.wavelength = parse_quantity(value, Dimension::Length, line_no, key);
      else config_error(line_no, key, "unknown key");
    } else if (group == "pre") {
      apply_selection_key(c.pre, field, value, line_no, key, false);
    } else if (group == "post") {
      apply_selection_key(c.post, field, value, line_no, key, true);
    } else if (group == "pulse") {
      if (field == "shape") {
        if (value == "gaussian") c.pulse.shape = PulseSpec::Shape::Gaussian;
        else if (value == "square") c.pulse.shape = PulseSpec::Shape::Square;
        else config_error(line_no, key, "expected 'gaussian' or 'square'");
      } else if (field == "width") {
        c.pulse.width = parse_quantity(value, Dimension::Time, line_no, key);
      } else if (field == "rise") {
        c.pulse.rise = parse_quantity(value, Dimension::Time, line_no, key);
      } else if (field == "dt") {
        c.pulse.dt = parse_quantity(value, Dimension::Time, line_no, key);
      } else if (field == "samples") {
        c.pulse.samples = parse_count(value, line_no, key);
      } else if (field == "position") {
        c.pulse.position = parse_quantity(value, Dimension::Time, line_no, key);
      } else {
        config_error(line_no, key, "unknown key");
      }
    } else if (group == "sweep") {
      if (field == "detuning_min") c.sweep.detuning_min = parse_quantity(value, Dimension::Frequency, line_no, key);
      else if (field == "detuning_max") c.sweep.detuning_max = parse_quantity(value, Dimension::Frequency, line_no, key);
      else if (field == "points") c.sweep.points = parse_count(value, line_no, key);
      else config_error(line_no, key, "unknown key");
    } else if (group == "sequence") {
      if (!c.sequence.empty()) config_error(line_no, key, "only one sequence list may be given");
      for (std::string_view item : split_list(value)) {
        SelectionSpec s = c.post;
        if (field == "post_angles") {
          s.mode = SelectionSpec::Mode::Angle;
          s.angle = normalize_angle(parse_quantity(item, Dimension::Angle, line_no, key));
        } else if (field == "weak_values") {
          s.mode = SelectionSpec::Mode::WeakValue;
          s.weak_value = parse_quantity(item, Dimension::None, line_no, key);
        } else {
          config_error(line_no, key, "unknown key");
        }
        c.sequence.push_back(s);
      }
    } else if (group == "fit") {
      if (field == "w_min") c.fit_range.lo = parse_quantity(value, Dimension::None, line_no, key);
      else if (field == "w_max") c.fit_range.hi = parse_quantity(value, Dimension::None, line_no, key);
      else config_error(line_no, key, "unknown key");
    } else if (group.empty()) {
      if (field == "remove_free_delay") c.remove_free_delay = parse_bool(value, line_no, key);
      else if (field == "front_threshold") c.front_threshold = parse_quantity(value, Dimension::None, line_no, key);
      else if (field == "output_dir") c.output_dir = std::string(value);
      else if (field == "plot_scripts") c.plot_scripts = parse_bool(value, line_no, key);
      else config_error(line_no, key, "unknown key");
    } else {
      config_error(line_no, key, "unknown key");
    }
  }
  // Phase settings given after the sequence list still apply to it.
  for (SelectionSpec& s : c.sequence) {
    s.phase = c.post.phase;
    s.phase_from_carrier = c.post.phase_from_carrier;
  }
  validate(c);
  return c;
}

inline ScenarioConfig load_scenario(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error(ErrorKind::Config, "cannot open config file " + path);
  std::stringstream ss;
  ss << is.rdbuf();
  try {
    return parse_scenario(ss.str());
  } catch (const Error& e) {
    throw Error(ErrorKind::Config, path + ": " + std::string(e.what()).substr(std::string("Config: ").size()));
  }
}

/// Builds the Jones vector described by a selection spec. `pre` is needed for
/// carrier-aligned phases and weak-value post-selections.
inline PolarizationState resolve_selection(const SelectionSpec& s, const ScenarioConfig& c,
                                           const PolarizationState* pre = nullptr) {
  const double carrier_phase = -c.carrier() * c.fiber.dgd;
  switch (s.mode) {
    case SelectionSpec::Mode::Jones:
      return make_state(s.jones_h, s.jones_v);
    case SelectionSpec::Mode::WeakValue:
      if (pre == nullptr) throw Error(ErrorKind::Config, "weak-value selection needs a pre-selection");
      return post_selection_for_weak_value(*pre, c.fiber, c.carrier(), s.weak_value);
    case SelectionSpec::Mode::Angle:
      break;
  }
  double phase = s.phase;
  if (s.phase_from_carrier) {
    // Cancel the carrier birefringence phase so the weak value at the carrier
    // comes out as for an untwisted fiber.
    const double pre_phase =
        pre == nullptr ? 0.0 : std::arg(pre->amp_v()) - std::arg(pre->amp_h());
    phase = pre_phase + carrier_phase;
  }
  return linear_state(s.angle, phase);
}

inline EffectiveMedium resolve_medium(const ScenarioConfig& c, const SelectionSpec& post) {
  const PolarizationState pre = resolve_selection(c.pre, c);
  return make_effective_medium(c.fiber, pre, resolve_selection(post, c, &pre));
}

inline EffectiveMedium resolve_medium(const ScenarioConfig& c) { return resolve_medium(c, c.post); }

/// Input pulse described by the config, positioned at the window center
/// (Gaussian) or quarter (square) unless pulse.position is set.
inline SampledSignal build_input_pulse(const ScenarioConfig& c) {
  const PulseSpec& p = c.pulse;
  const double window = static_cast<double>(p.samples) * p.dt;
  if (p.shape == PulseSpec::Shape::Gaussian) {
    return gaussian_pulse(p.position.value_or(0.5 * window), p.width, p.dt, p.samples, c.carrier());
  }
  return square_pulse(p.position.value_or(0.25 * window), p.width, p.rise, p.dt, p.samples, c.carrier());
}

}  // namespace fastlight
