#pragma once

// Uniformly sampled complex envelopes and the pulse metrology used to read
// group and signal velocities off them.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "fastlight/constants.hpp"
#include "fastlight/error.hpp"

namespace fastlight {

inline constexpr std::size_t kMinSamples = 8;

/// Complex baseband envelope on the grid t_start + k * dt. The optical field
/// is envelope(t) * exp(-i carrier_omega t); intensity is |envelope|^2.
class SampledSignal {
 public:
  SampledSignal(double t_start, double dt, std::vector<Complex> samples, double carrier_omega = 0.0)
      : t_start_(t_start), dt_(dt), samples_(std::move(samples)), carrier_omega_(carrier_omega) {
    if (!(dt_ > 0.0) || !std::isfinite(dt_) || !std::isfinite(t_start_)) {
      throw Error(ErrorKind::InvalidArgument, "sample spacing must be positive and finite");
    }
    if (samples_.size() < kMinSamples) {
      throw Error(ErrorKind::InvalidArgument,
                  "a signal needs at least " + std::to_string(kMinSamples) + " samples");
    }
    for (const Complex& s : samples_) {
      if (!std::isfinite(s.real()) || !std::isfinite(s.imag())) {
        throw Error(ErrorKind::InvalidData, "signal contains non-finite samples");
      }
    }
  }

  double t_start() const noexcept { return t_start_; }
  double dt() const noexcept { return dt_; }
  double carrier_omega() const noexcept { return carrier_omega_; }
  std::size_t size() const noexcept { return samples_.size(); }
  std::span<const Complex> samples() const noexcept { return samples_; }
  Complex operator[](std::size_t i) const noexcept { return samples_[i]; }
  double time(std::size_t i) const noexcept { return t_start_ + static_cast<double>(i) * dt_; }
  double duration() const noexcept { return static_cast<double>(samples_.size()) * dt_; }

  std::vector<double> intensity() const {
    std::vector<double> out(samples_.size());
    std::transform(samples_.begin(), samples_.end(), out.begin(), [](Complex s) { return std::norm(s); });
    return out;
  }

  double peak_intensity() const noexcept {
    double peak = 0.0;
    for (const Complex& s : samples_) peak = std::max(peak, std::norm(s));
    return peak;
  }

  /// sum |s|^2 dt
  double energy() const noexcept {
    double e = 0.0;
    for (const Complex& s : samples_) e += std::norm(s);
    return e * dt_;
  }

  /// Same grid and carrier, new samples.
  SampledSignal with_samples(std::vector<Complex> samples) const {
    if (samples.size() != samples_.size()) {
      throw Error(ErrorKind::InvalidArgument, "replacement samples must keep the grid size");
    }
    return SampledSignal(t_start_, dt_, std::move(samples), carrier_omega_);
  }

 private:
  double t_start_;
  double dt_;
  std::vector<Complex> samples_;
  double carrier_omega_;
};

inline bool same_grid(const SampledSignal& a, const SampledSignal& b, double rel_tol = 1e-9) noexcept {
  if (a.size() != b.size()) return false;
  if (std::abs(a.dt() - b.dt()) > rel_tol * a.dt()) return false;
  return std::abs(a.t_start() - b.t_start()) <= rel_tol * a.duration();
}

/// Unit-energy real Gaussian. `fwhm` is the full width at half maximum of the
/// intensity |s|^2. The grid starts at t = 0.
inline SampledSignal gaussian_pulse(double center, double fwhm, double dt, std::size_t n_samples,
                                    double carrier_omega = 0.0) {
  if (!(dt > 0.0) || !(fwhm > 4.0 * dt)) {
    throw Error(ErrorKind::GridTooCoarse, "Gaussian fwhm must exceed 4 samples");
  }
  if (static_cast<double>(n_samples) * dt < 6.0 * fwhm) {
    throw Error(ErrorKind::GridTooCoarse, "window must cover at least 6 fwhm");
  }
  // |s|^2 = exp(-4 ln2 t^2 / fwhm^2)
  const double k = 2.0 * std::log(2.0) / (fwhm * fwhm);
  std::vector<Complex> samples(n_samples);
  double energy = 0.0;
  for (std::size_t i = 0; i < n_samples; ++i) {
    const double t = static_cast<double>(i) * dt - center;
    const double a = std::exp(-k * t * t);
    samples[i] = a;
    energy += a * a;
  }
  energy *= dt;
  const double scale = 1.0 / std::sqrt(energy);
  for (auto& s : samples) s *= scale;
  return SampledSignal(0.0, dt, std::move(samples), carrier_omega);
}

/// Flat-top pulse of unit peak amplitude occupying [start, start + duration].
/// Both edges are raised-cosine ramps in intensity of length `rise`, so the
/// half-intensity point of the front sits at start + rise / 2.
inline SampledSignal square_pulse(double start, double duration, double rise, double dt, std::size_t n_samples,
                                  double carrier_omega = 0.0) {
  if (!(dt > 0.0) || !(rise >= 2.0 * dt)) {
    throw Error(ErrorKind::GridTooCoarse, "rise time must span at least 2 samples");
  }
  if (!(duration > 0.0)) {
    throw Error(ErrorKind::InvalidArgument, "square pulse duration must be positive");
  }
  if (duration < 2.0 * rise) {
    throw Error(ErrorKind::InvalidArgument, "square pulse duration must hold both ramps");
  }
  const double end = start + duration;
  std::vector<Complex> samples(n_samples);
  for (std::size_t i = 0; i < n_samples; ++i) {
    const double t = static_cast<double>(i) * dt;
    double a = 0.0;
    if (t <= start || t >= end) {
      a = 0.0;
    } else if (t < start + rise) {
      a = std::sin(0.5 * kPi * (t - start) / rise);
    } else if (t > end - rise) {
      a = std::sin(0.5 * kPi * (end - t) / rise);
    } else {
      a = 1.0;
    }
    samples[i] = a;
  }
  return SampledSignal(0.0, dt, std::move(samples), carrier_omega);
}

/// Real intensity trace (stored in the real part) from a complex envelope.
inline SampledSignal intensity_trace(const SampledSignal& signal) {
  std::vector<Complex> values(signal.size());
  for (std::size_t i = 0; i < signal.size(); ++i) values[i] = std::norm(signal[i]);
  return signal.with_samples(std::move(values));
}

inline constexpr double kDefaultNoiseFloor = 1e-9;

/// sqrt of a measured intensity trace (real parts). This treats the pulse as
/// transform-limited: all spectral phase is discarded. Negative values within
/// noise_floor * peak are clamped to zero.
inline SampledSignal amplitude_from_intensity(const SampledSignal& intensity, double noise_floor = kDefaultNoiseFloor) {
  double peak = 0.0;
  for (const Complex& v : intensity.samples()) peak = std::max(peak, v.real());
  const double floor = noise_floor * peak;
  std::vector<Complex> amp(intensity.size());
  for (std::size_t i = 0; i < intensity.size(); ++i) {
    const double v = intensity[i].real();
    if (v < -floor) {
      throw Error(ErrorKind::NegativeIntensity,
                  "intensity sample " + std::to_string(i) + " is below the noise floor: " + std::to_string(v));
    }
    amp[i] = std::sqrt(std::max(v, 0.0));
  }
  return intensity.with_samples(std::move(amp));
}

/// Energy-weighted mean time.
inline double center_of_mass(const SampledSignal& signal) {
  double num = 0.0;
  double den = 0.0;
  for (std::size_t i = 0; i < signal.size(); ++i) {
    const double w = std::norm(signal[i]);
    num += signal.time(i) * w;
    den += w;
  }
  if (!(den > 0.0)) {
    throw Error(ErrorKind::ZeroEnergy, "center of mass of a zero signal");
  }
  return num / den;
}

/// Time of maximum intensity. Ties go to the earliest sample; a strict
/// interior maximum is refined with a parabola through its neighbours.
inline double peak_time(const SampledSignal& signal) {
  const std::vector<double> in = signal.intensity();
  const auto it = std::max_element(in.begin(), in.end());  // first of equal maxima
  if (!(*it > 0.0)) {
    throw Error(ErrorKind::ZeroEnergy, "peak of a zero signal");
  }
  const auto k = static_cast<std::size_t>(it - in.begin());
  double t = signal.time(k);
  if (k > 0 && k + 1 < in.size() && in[k - 1] < in[k] && in[k + 1] < in[k]) {
    const double y0 = in[k - 1], y1 = in[k], y2 = in[k + 1];
    const double curvature = y0 - 2.0 * y1 + y2;
    if (curvature < 0.0) {
      t += 0.5 * (y0 - y2) / curvature * signal.dt();
    }
  }
  return t;
}

inline constexpr double kDefaultFrontThreshold = 1e-3;

/// Earliest time the intensity rises above threshold_fraction * level, with
/// linear interpolation between the bracketing samples. `level` defaults to
/// the signal's own peak; pass the input pulse's peak to compare fronts
/// across outputs with different transmissions.
inline double front_arrival(const SampledSignal& signal, double threshold_fraction,
                            std::optional<double> level = std::nullopt) {
  if (!(threshold_fraction > 0.0 && threshold_fraction < 1.0)) {
    throw Error(ErrorKind::InvalidArgument, "threshold fraction must lie in (0, 1)");
  }
  const double reference = level.value_or(signal.peak_intensity());
  const double threshold = threshold_fraction * reference;
  if (!(threshold > 0.0)) {
    throw Error(ErrorKind::NeverCrosses, "signal has no intensity to cross a threshold");
  }
  double previous = 0.0;
  for (std::size_t i = 0; i < signal.size(); ++i) {
    const double v = std::norm(signal[i]);
    if (v > threshold) {
      if (i == 0) return signal.time(0);
      return signal.time(i - 1) + (threshold - previous) / (v - previous) * signal.dt();
    }
    previous = v;
  }
  throw Error(ErrorKind::NeverCrosses, "intensity never exceeds the threshold");
}

}  // namespace fastlight
