#pragma once

// Envelope transforms on a uniform grid, backed by FFTW.
//
// Sign convention follows the exp(-i omega t) plane waves used everywhere else:
//   spectrum[k] = sum_j a[j] exp(+i Omega_k j dt)
//   a[j]        = (1/N) sum_k spectrum[k] exp(-i Omega_k j dt)
// so multiplying spectrum[k] by exp(+i Omega_k d) delays the envelope by d.

#include <fftw3.h>

#include <complex>
#include <cstddef>
#include <memory>
#include <mutex>
#include <span>
#include <vector>

#include "fastlight/constants.hpp"
#include "fastlight/error.hpp"

namespace fastlight {

namespace detail {

// FFTW planning is not thread-safe; execution with new-array functions is.
inline std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

struct PlanDeleter {
  void operator()(fftw_plan_s* p) const noexcept {
    std::lock_guard lock(fftw_planner_mutex());
    fftw_destroy_plan(p);
  }
};

using PlanHandle = std::unique_ptr<fftw_plan_s, PlanDeleter>;

inline fftw_complex* as_fftw(Complex* p) noexcept { return reinterpret_cast<fftw_complex*>(p); }

}  // namespace detail

/// Forward/inverse plan pair for one transform size. Cheap to share across
/// threads once built.
class FftPlan {
 public:
  explicit FftPlan(std::size_t n) : n_(n) {
    if (n == 0) {
      throw Error(ErrorKind::InvalidArgument, "transform size must be positive");
    }
    std::vector<Complex> scratch_in(n), scratch_out(n);
    const int size = static_cast<int>(n);
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    std::lock_guard lock(detail::fftw_planner_mutex());
    // FFTW_BACKWARD is the exp(+i ...) kernel, which is our forward direction.
    forward_.reset(fftw_plan_dft_1d(size, detail::as_fftw(scratch_in.data()), detail::as_fftw(scratch_out.data()),
                                    FFTW_BACKWARD, flags));
    inverse_.reset(fftw_plan_dft_1d(size, detail::as_fftw(scratch_in.data()), detail::as_fftw(scratch_out.data()),
                                    FFTW_FORWARD, flags));
    if (!forward_ || !inverse_) {
      throw Error(ErrorKind::InvalidArgument, "FFTW failed to build a plan");
    }
  }

  std::size_t size() const noexcept { return n_; }

  std::vector<Complex> forward(std::span<const Complex> in) const {
    std::vector<Complex> out(n_);
    execute(forward_.get(), in, out);
    return out;
  }

  /// Normalized by 1/N, so inverse(forward(a)) == a.
  std::vector<Complex> inverse(std::span<const Complex> in) const {
    std::vector<Complex> out(n_);
    inverse_into(in, out);
    return out;
  }

  void inverse_into(std::span<const Complex> in, std::span<Complex> out) const {
    execute(inverse_.get(), in, out);
    const double scale = 1.0 / static_cast<double>(n_);
    for (auto& v : out) v *= scale;
  }

 private:
  void execute(fftw_plan_s* plan, std::span<const Complex> in, std::span<Complex> out) const {
    if (in.size() != n_ || out.size() != n_) {
      throw Error(ErrorKind::InvalidArgument, "buffer size does not match the plan");
    }
    // Plans are out-of-place; FFTW leaves the input untouched in that mode but
    // its interface is not const-correct.
    auto* src = const_cast<Complex*>(in.data());
    if (src == out.data()) {
      throw Error(ErrorKind::InvalidArgument, "in-place transforms are not supported");
    }
    fftw_execute_dft(plan, detail::as_fftw(src), detail::as_fftw(out.data()));
  }

  std::size_t n_;
  detail::PlanHandle forward_;
  detail::PlanHandle inverse_;
};

/// Signed angular frequency of each bin: Omega_k = 2 pi k / (N dt), with
/// k in [-N/2, N/2).
inline std::vector<double> bin_frequencies(std::size_t n, double dt) {
  std::vector<double> omega(n);
  const double step = 2.0 * kPi / (static_cast<double>(n) * dt);
  const auto half = static_cast<std::ptrdiff_t>(n / 2);
  for (std::size_t k = 0; k < n; ++k) {
    auto signed_k = static_cast<std::ptrdiff_t>(k);
    if (signed_k >= static_cast<std::ptrdiff_t>(n) - half) signed_k -= static_cast<std::ptrdiff_t>(n);
    omega[k] = step * static_cast<double>(signed_k);
  }
  return omega;
}

}  // namespace fastlight
