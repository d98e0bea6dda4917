#pragma once

// The effective medium: polarizer -> birefringent fiber -> polarizer, seen as a
// single linear filter G(omega), plus the optical properties derived from it.

#include <cmath>
#include <complex>
#include <optional>
#include <string>

#include "fastlight/constants.hpp"
#include "fastlight/error.hpp"
#include "fastlight/polarization.hpp"

namespace fastlight {

struct FiberMedium {
  double length = kDefaultLength;  // m
  double index = kDefaultFiberIndex;
  double dgd = kDefaultDgd;  // s

  /// t_f = n_f L / c
  double free_time() const noexcept { return index * length / kSpeedOfLight; }
};

inline FiberMedium make_fiber(double length, double index, double dgd) {
  if (!(length > 0.0) || !std::isfinite(length)) {
    throw Error(ErrorKind::InvalidArgument, "fiber length must be > 0");
  }
  if (!(index >= 1.0) || !std::isfinite(index)) {
    throw Error(ErrorKind::InvalidArgument, "fiber index must be >= 1");
  }
  if (!(dgd >= 0.0) || !std::isfinite(dgd)) {
    throw Error(ErrorKind::InvalidArgument, "differential group delay must be >= 0");
  }
  return FiberMedium{length, index, dgd};
}

/// Fiber plus pre/post-selection. The post-selection is stored with its global
/// phase fixed so that A + B is real and non-negative.
class EffectiveMedium {
 public:
  const FiberMedium& fiber() const noexcept { return fiber_; }
  const PolarizationState& pre_selection() const noexcept { return pre_; }
  const PolarizationState& post_selection() const noexcept { return post_; }

  Complex a() const noexcept { return a_; }
  Complex b() const noexcept { return b_; }
  double transmission_sum() const noexcept { return sum_; }

  /// Absent when the selections are orthogonal within tolerance.
  const std::optional<WeakValue>& w0() const noexcept { return w0_; }

  double tolerance() const noexcept { return tolerance_; }

  friend EffectiveMedium make_effective_medium(const FiberMedium&, const PolarizationState&,
                                               const PolarizationState&, double);

 private:
  EffectiveMedium(const FiberMedium& fiber, const PolarizationState& pre, const PolarizationState& post)
      : fiber_(fiber), pre_(pre), post_(post) {}

  FiberMedium fiber_;
  PolarizationState pre_;
  PolarizationState post_;
  Complex a_;
  Complex b_;
  double sum_ = 0.0;
  std::optional<WeakValue> w0_;
  double tolerance_ = kOrthogonalityTolerance;
};

inline EffectiveMedium make_effective_medium(const FiberMedium& fiber, const PolarizationState& pre,
                                             const PolarizationState& post,
                                             double tolerance = kOrthogonalityTolerance) {
  const FiberMedium checked = make_fiber(fiber.length, fiber.index, fiber.dgd);
  const Complex raw_sum = overlap(post, pre);
  // Rotating |phi> by exp(i arg) multiplies conj(a1), conj(b1) by exp(-i arg).
  const PolarizationState phased = std::abs(raw_sum) > 0.0 ? post.with_global_phase(std::arg(raw_sum)) : post;

  EffectiveMedium em(checked, pre, phased);
  em.a_ = std::conj(phased.amp_h()) * pre.amp_h();
  em.b_ = std::conj(phased.amp_v()) * pre.amp_v();
  em.sum_ = std::abs(raw_sum);
  em.tolerance_ = tolerance;
  if (em.sum_ > tolerance) {
    em.w0_ = weak_value_static(pre, phased, tolerance);
  }
  return em;
}

/// Post-selection whose weak value against the pre-selection, rotated to
/// `carrier`, is exactly the real number `w`. This is the geometry the lab
/// reaches by trimming the fiber length: the carrier birefringence phase is
/// folded into the post-selection.
inline PolarizationState post_selection_for_weak_value(const PolarizationState& pre, const FiberMedium& fiber,
                                                       double carrier, double w) {
  const PolarizationState rotated = fiber_rotation(pre, carrier, fiber.dgd);
  if (std::abs(rotated.amp_h()) == 0.0 || std::abs(rotated.amp_v()) == 0.0) {
    throw Error(ErrorKind::InvalidArgument, "an eigenmode pre-selection has Re W = +-1 only");
  }
  // Want conj(a1) a0' : conj(b1) b0' = (1 + w) : (1 - w).
  return make_state(std::conj((1.0 + w) / rotated.amp_h()), std::conj((1.0 - w) / rotated.amp_v()));
}

/// 45-degree pre-selection with a carrier-aligned post-selection for `w`.
inline EffectiveMedium medium_for_weak_value(const FiberMedium& fiber, double carrier, double w,
                                             double tolerance = kOrthogonalityTolerance) {
  const PolarizationState pre = diagonal();
  return make_effective_medium(fiber, pre, post_selection_for_weak_value(pre, fiber, carrier, w), tolerance);
}

namespace detail {

/// Polarization part of G: (A + B) F(omega, W0), or the two-arm sum when W0
/// does not exist.
inline Complex birefringent_response(const EffectiveMedium& em, double omega) noexcept {
  if (em.w0()) {
    return em.transmission_sum() * structure_factor(omega, *em.w0(), em.fiber().dgd);
  }
  const double x = 0.5 * omega * em.fiber().dgd;
  return em.a() * std::polar(1.0, x) + em.b() * std::polar(1.0, -x);
}

/// Continuous phase of F(omega, W0) as a function of x = omega dgd / 2.
///
/// F traces an ellipse around the origin, winding in the direction of sign(W_R)
/// with F(x + pi) = -F(x). On |r| <= pi/2 the principal atan2 branch is already
/// continuous, so the full phase is that value plus the half-turn count.
inline double unwrapped_phase(double x, const WeakValue& w0) noexcept {
  if (w0.re == 0.0) {
    return 0.0;
  }
  const double turns = std::round(x / kPi);
  const double r = x - turns * kPi;
  const double sign = w0.re > 0.0 ? 1.0 : -1.0;
  return turns * kPi * sign + std::atan2(w0.re * std::sin(r), std::cos(r) - w0.im * std::sin(r));
}

}  // namespace detail

/// G(omega) = exp(i n_f omega L / c) (A + B) F(omega, W0)
inline Complex response(const EffectiveMedium& em, double omega) noexcept {
  return std::polar(1.0, omega * em.fiber().free_time()) * detail::birefringent_response(em, omega);
}

/// kappa(omega) = -[ln(A + B) + ln|F(omega, W0)|] / L, so exp(-kappa L) = |G|.
inline double absorption_coeff(const EffectiveMedium& em, double omega) {
  const Complex g = detail::birefringent_response(em, omega);
  if (std::abs(g) <= kExtinctionFloor) {
    throw Error(ErrorKind::FullExtinction, "medium is opaque at omega = " + std::to_string(omega));
  }
  const double length = em.fiber().length;
  if (em.w0()) {
    const Complex f = structure_factor(omega, *em.w0(), em.fiber().dgd);
    return -(std::log(em.transmission_sum()) + std::log(std::abs(f))) / length;
  }
  return -std::log(std::abs(g)) / length;
}

/// n(omega) = n_f + c / (L omega) * arctan[W_R / (cot(omega dgd / 2) - W_I)],
/// with the arctan taken on the branch that keeps n continuous in omega.
inline double refractive_index(const EffectiveMedium& em, double omega) {
  if (!(omega > 0.0)) {
    throw Error(ErrorKind::InvalidArgument, "refractive index needs omega > 0");
  }
  if (!em.w0()) {
    throw Error(ErrorKind::OrthogonalSelection, "refractive index undefined for orthogonal selections");
  }
  const FiberMedium& f = em.fiber();
  const double phase = detail::unwrapped_phase(0.5 * omega * f.dgd, *em.w0());
  return f.index + kSpeedOfLight / (f.length * omega) * phase;
}

inline WeakValue weak_value_at(const EffectiveMedium& em, double omega) {
  return weak_value_dynamic(em.pre_selection(), em.post_selection(), omega, em.fiber().dgd, em.tolerance());
}

/// <t> = (dgd / 2) Re W(omega); negative means the pulse arrives early.
inline double mean_arrival_shift(const EffectiveMedium& em, double omega) {
  return 0.5 * em.fiber().dgd * weak_value_at(em, omega).re;
}

/// n_g = n_f + c dgd / (2 L) Re W(omega)
inline double group_index(const EffectiveMedium& em, double omega) {
  const FiberMedium& f = em.fiber();
  return f.index + kSpeedOfLight * f.dgd / (2.0 * f.length) * weak_value_at(em, omega).re;
}

/// v_g = L / (t_f + <t>)
inline double group_velocity(const EffectiveMedium& em, double omega) {
  const FiberMedium& f = em.fiber();
  const double transit = f.free_time() + mean_arrival_shift(em, omega);
  if (std::abs(transit) <= 1e-12 * f.free_time()) {
    throw Error(ErrorKind::InfiniteVelocity, "center of mass transit time is zero");
  }
  return f.length / transit;
}

/// Re W below which the group velocity exceeds c: -L / (c dgd) * 2 (n_f - 1).
inline double superluminal_weak_value(const FiberMedium& f) noexcept {
  return -2.0 * (f.index - 1.0) * f.length / (kSpeedOfLight * f.dgd);
}

/// Re W below which the group velocity turns negative: -2 n_f L / (c dgd).
inline double negative_velocity_weak_value(const FiberMedium& f) noexcept {
  return -2.0 * f.index * f.length / (kSpeedOfLight * f.dgd);
}

}  // namespace fastlight
