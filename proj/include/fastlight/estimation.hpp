#pragma once

// Recovering a real weak value from a reference pulse and a measured pulse.
//
// Model: I_in -> A_in = sqrt(I_in) -> spectrum -> multiply by s F(Omega, w)
// -> back to time -> I_out = |A_out|^2. The carrier birefringence phase is
// assumed compensated by the post-selection alignment, so F is evaluated at
// the detuning Omega and (A + B) is folded into the free scale s.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "fastlight/constants.hpp"
#include "fastlight/error.hpp"
#include "fastlight/fft.hpp"
#include "fastlight/medium.hpp"
#include "fastlight/signal.hpp"

namespace fastlight {

struct FitResult {
  double w_estimate = 0.0;
  double amplitude_scale = 0.0;
  double residual = 0.0;  // relative L2 on peak-normalized intensities
  std::size_t iterations = 0;
};

struct WeakValueRange {
  double lo = -5000.0;
  double hi = 5000.0;

  double width() const noexcept { return hi - lo; }
};

struct FitOptions {
  std::size_t grid_points = 201;
  /// Golden-section stops once the bracket is narrower than
  /// min(range_fraction * |range|, relative * max(1, |w|)).
  double range_fraction = 1e-3;
  double relative = 1e-5;
  /// Residual spread across the grid below this counts as "no minimum".
  double flat_tolerance = 1e-12;
};

enum class TraceKind { Intensity, Amplitude };

namespace detail {

/// Forward model with the reference spectrum cached, for repeated evaluation.
class WeakValueModel {
 public:
  WeakValueModel(const SampledSignal& reference_amplitude, double dgd)
      : plan_(reference_amplitude.size()),
        spectrum_(plan_.forward(reference_amplitude.samples())),
        half_phase_(bin_frequencies(reference_amplitude.size(), reference_amplitude.dt())),
        buffer_(reference_amplitude.size()),
        field_(reference_amplitude.size()) {
    for (double& x : half_phase_) x *= 0.5 * dgd;
  }

  /// Output envelope for a unit scale.
  const std::vector<Complex>& field(double w) {
    for (std::size_t k = 0; k < spectrum_.size(); ++k) {
      const double x = half_phase_[k];
      buffer_[k] = spectrum_[k] * Complex(std::cos(x), w * std::sin(x));
    }
    plan_.inverse_into(buffer_, field_);
    return field_;
  }

 private:
  FftPlan plan_;
  std::vector<Complex> spectrum_;
  std::vector<double> half_phase_;
  std::vector<Complex> buffer_;
  std::vector<Complex> field_;
};

struct Evaluation {
  double w;
  double residual;
  double intensity_scale;
};

}  // namespace detail

/// Runs the fit model forward for a given w (unit scale). An Intensity
/// reference holds I_in in the real parts; an Amplitude reference is used as
/// the input envelope directly.
inline SampledSignal simulate_with_w(const SampledSignal& reference, double w, const FiberMedium& fiber,
                                     TraceKind kind = TraceKind::Intensity) {
  const SampledSignal amplitude = kind == TraceKind::Intensity ? amplitude_from_intensity(reference) : reference;
  detail::WeakValueModel model(amplitude, fiber.dgd);
  return amplitude.with_samples(model.field(w));
}

/// Grid scan over w_range followed by golden-section refinement around the
/// best grid point. The intensity scale is solved in closed form per w.
/// Both signals are envelopes; only their intensities enter the fit.
inline FitResult fit_weak_value(const SampledSignal& reference, const SampledSignal& measured, const FiberMedium& fiber,
                                WeakValueRange range = {}, const FitOptions& opts = {}) {
  if (!same_grid(reference, measured)) {
    throw Error(ErrorKind::GridMismatch, "reference and measured signals are on different grids");
  }
  if (!std::isfinite(range.lo) || !std::isfinite(range.hi) || !(range.hi > range.lo)) {
    throw Error(ErrorKind::InvalidArgument, "weak-value range must be a finite, non-empty interval");
  }
  if (opts.grid_points < 3) {
    throw Error(ErrorKind::InvalidArgument, "fit grid needs at least 3 points");
  }

  const SampledSignal amplitude = amplitude_from_intensity(intensity_trace(reference));
  if (!(amplitude.energy() > 0.0)) {
    throw Error(ErrorKind::ZeroEnergy, "reference pulse is empty");
  }
  std::vector<double> target = measured.intensity();
  const double peak = *std::max_element(target.begin(), target.end());
  if (!(peak > 0.0)) {
    throw Error(ErrorKind::ZeroEnergy, "measured pulse is empty");
  }
  for (double& v : target) v /= peak;
  const double target_norm = std::sqrt(std::inner_product(target.begin(), target.end(), target.begin(), 0.0));

  detail::WeakValueModel model(amplitude, fiber.dgd);
  std::vector<double> model_intensity(target.size());
  std::size_t evaluations = 0;

  auto evaluate = [&](double w) {
    ++evaluations;
    const std::vector<Complex>& field = model.field(w);
    double cross = 0.0, self = 0.0;
    for (std::size_t i = 0; i < field.size(); ++i) {
      const double v = std::norm(field[i]);
      model_intensity[i] = v;
      cross += v * target[i];
      self += v * v;
    }
    const double scale = self > 0.0 ? std::max(cross / self, 0.0) : 0.0;
    double err = 0.0;
    for (std::size_t i = 0; i < target.size(); ++i) {
      const double d = scale * model_intensity[i] - target[i];
      err += d * d;
    }
    return detail::Evaluation{w, std::sqrt(err) / target_norm, scale};
  };

  const std::size_t n_grid = opts.grid_points;
  const double step = range.width() / static_cast<double>(n_grid - 1);
  std::vector<detail::Evaluation> grid;
  grid.reserve(n_grid);
  for (std::size_t i = 0; i < n_grid; ++i) {
    const double w = i + 1 == n_grid ? range.hi : range.lo + step * static_cast<double>(i);
    grid.push_back(evaluate(w));
  }
  const auto by_residual = [](const detail::Evaluation& a, const detail::Evaluation& b) { return a.residual < b.residual; };
  const auto [lowest, highest] = std::minmax_element(grid.begin(), grid.end(), by_residual);
  if (highest->residual - lowest->residual <= opts.flat_tolerance) {
    throw Error(ErrorKind::NoMinimum, "fit residual is flat across the weak-value range");
  }

  const auto best_index = static_cast<std::size_t>(lowest - grid.begin());
  double a = grid[best_index == 0 ? 0 : best_index - 1].w;
  double b = grid[std::min(best_index + 1, n_grid - 1)].w;
  detail::Evaluation best = *lowest;

  const double tolerance =
      std::min(opts.range_fraction * range.width(), opts.relative * std::max(1.0, std::abs(best.w)));
  constexpr double inv_phi = 0.6180339887498949;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  detail::Evaluation fc = evaluate(c);
  detail::Evaluation fd = evaluate(d);
  while (b - a > tolerance) {
    if (fc.residual < fd.residual) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = evaluate(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = evaluate(d);
    }
    for (const auto& e : {fc, fd}) {
      if (e.residual < best.residual) best = e;
    }
  }

  FitResult result;
  result.w_estimate = best.w;
  result.residual = best.residual;
  result.amplitude_scale = std::sqrt(best.intensity_scale * peak);
  result.iterations = evaluations;
  return result;
}

}  // namespace fastlight
