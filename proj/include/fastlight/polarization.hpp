#pragma once

// Two-mode polarization algebra in the fiber eigenbasis {H, V}.
//
// H is the slow eigenmode, V the fast one. Birefringence acts as
// exp(i * omega * dgd * sigma_z / 2), so the H amplitude picks up
// exp(+i omega dgd / 2) and V picks up exp(-i omega dgd / 2). With the
// exp(-i omega t) plane-wave convention, a factor exp(+i omega d) is a delay d.

#include <cmath>
#include <complex>

#include "fastlight/constants.hpp"
#include "fastlight/error.hpp"

namespace fastlight {

/// Unit Jones vector. Only constructible through make_state() and the named
/// factories, so |amp_h|^2 + |amp_v|^2 == 1 always holds.
class PolarizationState {
 public:
  Complex amp_h() const noexcept { return h_; }
  Complex amp_v() const noexcept { return v_; }

  double norm() const noexcept { return std::sqrt(std::norm(h_) + std::norm(v_)); }

  /// Same ray, different global phase.
  PolarizationState with_global_phase(double phase) const noexcept {
    const Complex p = std::polar(1.0, phase);
    return PolarizationState(h_ * p, v_ * p);
  }

  friend PolarizationState make_state(Complex amp_h, Complex amp_v);
  friend PolarizationState fiber_rotation(const PolarizationState& psi0, double omega, double dgd);

 private:
  PolarizationState(Complex h, Complex v) noexcept : h_(h), v_(v) {}

  Complex h_;
  Complex v_;
};

/// Normalizes (amp_h, amp_v); relative phase is preserved.
inline PolarizationState make_state(Complex amp_h, Complex amp_v) {
  const double n = std::hypot(std::abs(amp_h), std::abs(amp_v));
  if (!(n > 0.0) || !std::isfinite(n)) {
    throw Error(ErrorKind::ZeroVector, "polarization state needs a nonzero, finite amplitude");
  }
  return PolarizationState(amp_h / n, amp_v / n);
}

inline PolarizationState horizontal() { return make_state(1.0, 0.0); }
inline PolarizationState vertical() { return make_state(0.0, 1.0); }
inline PolarizationState diagonal() { return make_state(1.0, 1.0); }

/// Linear polarizer at angle theta from H, with an optional extra phase on the
/// V component (elliptical states / alignment in the x-y plane of the sphere).
inline PolarizationState linear_state(double theta, double v_phase = 0.0) {
  return make_state(std::cos(theta), std::polar(1.0, v_phase) * std::sin(theta));
}

/// <phi|psi> = conj(a1) a0 + conj(b1) b0
inline Complex overlap(const PolarizationState& phi, const PolarizationState& psi) noexcept {
  return std::conj(phi.amp_h()) * psi.amp_h() + std::conj(phi.amp_v()) * psi.amp_v();
}

inline PolarizationState fiber_rotation(const PolarizationState& psi0, double omega, double dgd) {
  if (!(dgd >= 0.0)) {
    throw Error(ErrorKind::InvalidArgument, "differential group delay must be >= 0");
  }
  const double half = 0.5 * omega * dgd;
  return PolarizationState(psi0.amp_h() * std::polar(1.0, half), psi0.amp_v() * std::polar(1.0, -half));
}

struct WeakValue {
  double re = 0.0;
  double im = 0.0;

  Complex value() const noexcept { return {re, im}; }
  double norm_sq() const noexcept { return re * re + im * im; }
};

namespace detail {

inline WeakValue checked_weak_value(Complex w) {
  if (!std::isfinite(w.real()) || !std::isfinite(w.imag())) {
    throw Error(ErrorKind::OrthogonalSelection, "weak value is not finite");
  }
  return {w.real(), w.imag()};
}

}  // namespace detail

/// W0 = (A - B) / (A + B) with A = conj(a1) a0, B = conj(b1) b0.
inline WeakValue weak_value_static(const PolarizationState& psi0, const PolarizationState& phi,
                                   double tolerance = kOrthogonalityTolerance) {
  const Complex a = std::conj(phi.amp_h()) * psi0.amp_h();
  const Complex b = std::conj(phi.amp_v()) * psi0.amp_v();
  const Complex sum = a + b;
  if (std::abs(sum) <= tolerance) {
    throw Error(ErrorKind::OrthogonalSelection,
                "pre- and post-selection are orthogonal (|<phi|psi0>| = " + std::to_string(std::abs(sum)) + ")");
  }
  return detail::checked_weak_value((a - b) / sum);
}

/// F(omega, W0) = cos(omega dgd / 2) + i W0 sin(omega dgd / 2)
inline Complex structure_factor(double omega, const WeakValue& w0, double dgd) noexcept {
  const double x = 0.5 * omega * dgd;
  return std::cos(x) + Complex(0.0, 1.0) * w0.value() * std::sin(x);
}

/// Weak value of the post-selection against the rotated pre-selection
/// psi(omega), evaluated in closed form from W0:
///
///   W = [W_R + i (W_I cos(omega dgd) + (1 - |W0|^2) sin(omega dgd) / 2)] / |F(omega, W0)|^2
inline WeakValue weak_value_dynamic(const PolarizationState& psi0, const PolarizationState& phi, double omega,
                                    double dgd, double tolerance = kOrthogonalityTolerance) {
  if (!(dgd >= 0.0)) {
    throw Error(ErrorKind::InvalidArgument, "differential group delay must be >= 0");
  }
  const WeakValue w0 = weak_value_static(psi0, phi, tolerance);
  const Complex f = structure_factor(omega, w0, dgd);
  const double f_abs = std::abs(f);
  if (f_abs <= tolerance) {
    throw Error(ErrorKind::OrthogonalSelection, "rotated pre-selection is orthogonal to the post-selection");
  }
  const double phase = omega * dgd;
  const double im = w0.im * std::cos(phase) + 0.5 * (1.0 - w0.norm_sq()) * std::sin(phase);
  const double denom = f_abs * f_abs;
  return detail::checked_weak_value(Complex(w0.re, im) / denom);
}

}  // namespace fastlight
