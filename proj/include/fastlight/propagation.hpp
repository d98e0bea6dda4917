#pragma once

// Pulse propagation through the effective medium, two ways:
//  * propagate_spectral: transform, multiply each bin by G(carrier + Omega),
//    transform back (periodic window).
//  * propagate_oracle: the same filter written as two delayed replicas of the
//    input, one per fiber eigenmode, with sample-exact shifts only.

#include <cmath>
#include <complex>
#include <cstddef>
#include <string>
#include <vector>

#include "fastlight/constants.hpp"
#include "fastlight/error.hpp"
#include "fastlight/fft.hpp"
#include "fastlight/medium.hpp"
#include "fastlight/signal.hpp"

namespace fastlight {

struct PropagationOptions {
  /// Drop exp(i n_f omega L / c), i.e. report pulses relative to a reference
  /// that crossed the bare fiber.
  bool remove_free_delay = true;
  /// Maximum fraction of input energy that an arm delay may carry across the
  /// window boundary.
  double wrap_tolerance = 1e-6;
};

/// Delays of the slow (H) and fast (V) replicas.
struct ArmDelays {
  double slow;
  double fast;
};

inline ArmDelays arm_delays(const FiberMedium& fiber, bool remove_free_delay) noexcept {
  const double free = remove_free_delay ? 0.0 : fiber.free_time();
  return {free + 0.5 * fiber.dgd, free - 0.5 * fiber.dgd};
}

/// Fraction of the input energy that a circular shift by `delay` moves across
/// the window edge.
inline double wrapped_energy_fraction(const SampledSignal& input, double delay) {
  const double total = input.energy() / input.dt();
  if (!(total > 0.0) || delay == 0.0) return 0.0;
  const std::size_t n = input.size();
  const auto crossing = static_cast<std::size_t>(
      std::min(static_cast<double>(n), std::ceil(std::abs(delay) / input.dt() - 1e-9)));
  double leaked = 0.0;
  if (delay > 0.0) {
    for (std::size_t i = n - crossing; i < n; ++i) leaked += std::norm(input[i]);
  } else {
    for (std::size_t i = 0; i < crossing; ++i) leaked += std::norm(input[i]);
  }
  return leaked / total;
}

inline void check_wrap_around(const SampledSignal& input, const FiberMedium& fiber, const PropagationOptions& opts) {
  const ArmDelays d = arm_delays(fiber, opts.remove_free_delay);
  const double worst = std::max(wrapped_energy_fraction(input, d.slow), wrapped_energy_fraction(input, d.fast));
  if (worst > opts.wrap_tolerance) {
    throw Error(ErrorKind::WrapAround,
                "a delayed replica leaks " + std::to_string(worst) +
                    " of the input energy across the window boundary; enlarge the window or move the pulse");
  }
}

/// G sampled on the bins of an N-point grid around `carrier`. The carrier and
/// detuning parts of the free-propagation phase are kept as separate factors
/// because n_f L carrier / c is ~1e7 rad and would otherwise lose the phase to
/// rounding.
inline std::vector<Complex> transfer_function(const EffectiveMedium& em, double carrier, std::span<const double> detuning,
                                              bool remove_free_delay) {
  std::vector<Complex> g(detuning.size());
  const double t_free = em.fiber().free_time();
  const Complex carrier_phase = remove_free_delay ? Complex(1.0) : std::polar(1.0, carrier * t_free);
  for (std::size_t k = 0; k < detuning.size(); ++k) {
    Complex v = detail::birefringent_response(em, carrier + detuning[k]) * carrier_phase;
    if (!remove_free_delay) v *= std::polar(1.0, detuning[k] * t_free);
    g[k] = v;
  }
  return g;
}

inline SampledSignal propagate_spectral(const SampledSignal& input, const EffectiveMedium& em,
                                        const PropagationOptions& opts, const FftPlan& plan) {
  if (plan.size() != input.size()) {
    throw Error(ErrorKind::InvalidArgument, "FFT plan size does not match the signal");
  }
  check_wrap_around(input, em.fiber(), opts);
  std::vector<Complex> spectrum = plan.forward(input.samples());
  const std::vector<double> omega = bin_frequencies(input.size(), input.dt());
  const std::vector<Complex> g = transfer_function(em, input.carrier_omega(), omega, opts.remove_free_delay);
  for (std::size_t k = 0; k < spectrum.size(); ++k) spectrum[k] *= g[k];
  return input.with_samples(plan.inverse(spectrum));
}

inline SampledSignal propagate_spectral(const SampledSignal& input, const EffectiveMedium& em,
                                        const PropagationOptions& opts = {}) {
  const FftPlan plan(input.size());
  return propagate_spectral(input, em, opts, plan);
}

namespace detail {

inline std::ptrdiff_t aligned_shift(double delay, double dt, const char* what) {
  const double samples = delay / dt;
  const double rounded = std::round(samples);
  if (std::abs(samples - rounded) > 1e-9 * std::max(1.0, std::abs(samples))) {
    throw Error(ErrorKind::GridMismatch,
                std::string(what) + " of " + std::to_string(delay) + " s is not a whole number of samples");
  }
  return static_cast<std::ptrdiff_t>(rounded);
}

}  // namespace detail

/// out(t) = A e^{+i w0 dgd/2} in(t - d_slow) + B e^{-i w0 dgd/2} in(t - d_fast),
/// times the carrier free-propagation phase when the free delay is kept.
/// Samples shifted in from outside the window are zero.
inline SampledSignal propagate_oracle(const SampledSignal& input, const EffectiveMedium& em,
                                      const PropagationOptions& opts = {}) {
  const FiberMedium& fiber = em.fiber();
  const ArmDelays d = arm_delays(fiber, opts.remove_free_delay);
  const std::ptrdiff_t shift_slow = detail::aligned_shift(d.slow, input.dt(), "slow-arm delay");
  const std::ptrdiff_t shift_fast = detail::aligned_shift(d.fast, input.dt(), "fast-arm delay");

  const double w0 = input.carrier_omega();
  const Complex carrier_phase = opts.remove_free_delay ? Complex(1.0) : std::polar(1.0, w0 * fiber.free_time());
  const Complex slow_arm = em.a() * std::polar(1.0, 0.5 * w0 * fiber.dgd) * carrier_phase;
  const Complex fast_arm = em.b() * std::polar(1.0, -0.5 * w0 * fiber.dgd) * carrier_phase;

  const auto n = static_cast<std::ptrdiff_t>(input.size());
  std::vector<Complex> out(input.size());
  for (std::ptrdiff_t j = 0; j < n; ++j) {
    Complex v = 0.0;
    if (const std::ptrdiff_t src = j - shift_slow; src >= 0 && src < n) v += slow_arm * input[static_cast<std::size_t>(src)];
    if (const std::ptrdiff_t src = j - shift_fast; src >= 0 && src < n) v += fast_arm * input[static_cast<std::size_t>(src)];
    out[static_cast<std::size_t>(j)] = v;
  }
  return input.with_samples(std::move(out));
}

}  // namespace fastlight
