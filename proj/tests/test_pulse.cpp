#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <random>
#include <vector>

#include "fastlight/propagation.hpp"

namespace fastlight {
namespace {

const FiberMedium kFiber{1.5, 1.5, 2.66e-12};
const double kCarrier = carrier_omega(kDefaultWavelength);
const Complex I(0.0, 1.0);

PolarizationState random_state(std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  return make_state({g(rng), g(rng)}, {g(rng), g(rng)});
}

double max_abs_diff(const SampledSignal& a, const SampledSignal& b) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a[i] - b[i]));
  return worst;
}

double max_abs(const SampledSignal& a) {
  double m = 0.0;
  for (const Complex& v : a.samples()) m = std::max(m, std::abs(v));
  return m;
}

// Direct O(N^2) transform with the library's sign and bin conventions.
std::vector<Complex> naive_forward(const std::vector<Complex>& a, double dt) {
  const std::size_t n = a.size();
  std::vector<Complex> out(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double kk = k < n - n / 2 ? static_cast<double>(k) : static_cast<double>(k) - static_cast<double>(n);
    const double omega = 2.0 * kPi * kk / (static_cast<double>(n) * dt);
    Complex sum = 0.0;
    for (std::size_t j = 0; j < n; ++j) sum += a[j] * std::exp(I * (omega * static_cast<double>(j) * dt));
    out[k] = sum;
  }
  return out;
}

// sum_t s(t) conj(s(t + lag)) for a whole-sample lag, zero outside the window.
Complex autocorrelation(const SampledSignal& s, std::ptrdiff_t lag) {
  Complex sum = 0.0;
  const auto n = static_cast<std::ptrdiff_t>(s.size());
  for (std::ptrdiff_t j = 0; j < n; ++j) {
    const std::ptrdiff_t k = j + lag;
    if (k >= 0 && k < n) sum += s[static_cast<std::size_t>(j)] * std::conj(s[static_cast<std::size_t>(k)]);
  }
  return sum;
}

double intensity_fwhm(const SampledSignal& s) {
  const std::vector<double> in = s.intensity();
  const double half = 0.5 * *std::max_element(in.begin(), in.end());
  std::size_t i = 0;
  while (in[i + 1] <= half) ++i;
  const double left = s.time(i) + (half - in[i]) / (in[i + 1] - in[i]) * s.dt();
  std::size_t j = in.size() - 1;
  while (in[j - 1] <= half) --j;
  const double right = s.time(j) - (half - in[j]) / (in[j - 1] - in[j]) * s.dt();
  return right - left;
}

TEST(SampledSignal, Validation) {
  EXPECT_THROW(SampledSignal(0.0, 0.0, std::vector<Complex>(16)), Error);
  EXPECT_THROW(SampledSignal(0.0, 1.0, std::vector<Complex>(4)), Error);
  std::vector<Complex> bad(16);
  bad[3] = std::nan("");
  try {
    SampledSignal(0.0, 1.0, bad);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::InvalidData);
  }
}

TEST(GaussianPulse, UnitEnergyAndWidth) {
  const auto p = gaussian_pulse(5e-9, 1e-9, 1e-11, 2048);
  EXPECT_NEAR(p.energy(), 1.0, 1e-12);
  EXPECT_NEAR(peak_time(p), 5e-9, 1e-15);
  EXPECT_NEAR(center_of_mass(p), 5e-9, 1e-15);
  EXPECT_NEAR(intensity_fwhm(p), 1e-9, 1e-3 * 1e-9);
  EXPECT_EQ(p.t_start(), 0.0);
}

TEST(GaussianPulse, GridChecks) {
  try {
    gaussian_pulse(5e-9, 3e-11, 1e-11, 2048);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::GridTooCoarse);
  }
  EXPECT_THROW(gaussian_pulse(5e-9, 5e-9, 1e-11, 2048), Error);
}

TEST(SquarePulse, ShapeAndHalfPoint) {
  const double dt = 1e-12;
  const auto p = square_pulse(100e-12, 2e-9, 20e-12, dt, 4096);
  EXPECT_EQ(p[50], Complex(0.0));
  EXPECT_EQ(p[1000], Complex(1.0));
  EXPECT_NEAR(std::norm(p[110]), 0.5, 1e-12);  // start + rise / 2
  EXPECT_NEAR(front_arrival(p, 0.5), 110e-12, 1e-15);
  EXPECT_NEAR(p.peak_intensity(), 1.0, 1e-15);
}

TEST(SquarePulse, Errors) {
  try {
    square_pulse(0.0, 1e-9, 1e-12, 1e-12, 4096);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::GridTooCoarse);
  }
  try {
    square_pulse(0.0, 0.0, 20e-12, 1e-12, 4096);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::InvalidArgument);
  }
  EXPECT_THROW(square_pulse(0.0, 30e-12, 20e-12, 1e-12, 4096), Error);
}

TEST(AmplitudeFromIntensity, Examples) {
  std::vector<Complex> in(8, 0.0);
  in[2] = 4.0;
  in[3] = 1.0;
  in[4] = -1e-12;  // within the noise floor
  const auto amp = amplitude_from_intensity(SampledSignal(0.0, 1.0, in));
  EXPECT_EQ(amp[2], Complex(2.0));
  EXPECT_EQ(amp[3], Complex(1.0));
  EXPECT_EQ(amp[4], Complex(0.0));

  in[4] = -0.1;
  try {
    amplitude_from_intensity(SampledSignal(0.0, 1.0, in));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::NegativeIntensity);
  }
}

TEST(AmplitudeFromIntensity, InvertsIntensityOfRealPulse) {
  const auto p = gaussian_pulse(5e-9, 1e-9, 1e-11, 2048);
  const auto back = amplitude_from_intensity(intensity_trace(p));
  EXPECT_LT(max_abs_diff(back, p), 1e-12);
}

TEST(Fft, BinFrequencies) {
  const auto w = bin_frequencies(8, 0.5);
  const double step = 2.0 * kPi / 4.0;
  const std::vector<double> expected{0, 1, 2, 3, -4, -3, -2, -1};
  for (std::size_t k = 0; k < 8; ++k) EXPECT_DOUBLE_EQ(w[k], expected[k] * step);
  const auto odd = bin_frequencies(5, 1.0);
  EXPECT_GT(odd[2], 0.0);
  EXPECT_LT(odd[3], 0.0);
}

TEST(Fft, MatchesNaiveTransform) {
  std::mt19937_64 rng(12);
  std::normal_distribution<double> g;
  for (std::size_t n : {8u, 15u, 64u, 100u}) {
    std::vector<Complex> a(n);
    for (auto& v : a) v = {g(rng), g(rng)};
    const FftPlan plan(n);
    const auto fast = plan.forward(a);
    const auto slow = naive_forward(a, 1e-12);
    for (std::size_t k = 0; k < n; ++k) EXPECT_LT(std::abs(fast[k] - slow[k]), 1e-10 * static_cast<double>(n));
    const auto back = plan.inverse(fast);
    for (std::size_t k = 0; k < n; ++k) EXPECT_LT(std::abs(back[k] - a[k]), 1e-13);
  }
}

TEST(Fft, PhaseRampDelays) {
  const std::size_t n = 64;
  std::vector<Complex> a(n, 0.0);
  a[10] = 1.0;
  const FftPlan plan(n);
  auto spec = plan.forward(a);
  const auto w = bin_frequencies(n, 1.0);
  for (std::size_t k = 0; k < n; ++k) spec[k] *= std::exp(I * (w[k] * 3.0));
  const auto out = plan.inverse(spec);
  EXPECT_NEAR(std::abs(out[13]), 1.0, 1e-13);
  EXPECT_LT(std::abs(out[10]), 1e-13);
}

TEST(Fft, RejectsBadBuffers) {
  const FftPlan plan(16);
  std::vector<Complex> a(8);
  EXPECT_THROW(plan.forward(a), Error);
  std::vector<Complex> b(16);
  EXPECT_THROW(plan.inverse_into(b, b), Error);
  EXPECT_THROW(FftPlan(0), Error);
}

TEST(Propagation, IdentityWithoutBirefringence) {
  const auto fiber = make_fiber(1.5, 1.5, 0.0);
  const auto em = make_effective_medium(fiber, diagonal(), diagonal());
  const auto in = gaussian_pulse(5e-9, 1e-9, 1e-11, 2048, kCarrier);
  const auto out = propagate_spectral(in, em);
  const double scale = max_abs(in);
  EXPECT_LT(max_abs_diff(out, in), 1e-13 * scale);
  EXPECT_LT(max_abs_diff(propagate_oracle(in, em), in), 1e-15 * scale);
}

TEST(Propagation, CosineFilterInBaseband) {
  // W0 = 0: G = cos(omega dgd / 2), i.e. the mean of two replicas at +-dgd/2.
  const double dt = kFiber.dgd / 2.0;
  const auto em = make_effective_medium(kFiber, diagonal(), diagonal());
  const auto in = gaussian_pulse(2048 * dt, 40 * dt, dt, 4096);
  const auto out = propagate_spectral(in, em);
  const double scale = max_abs(in);
  for (std::size_t i = 1; i + 1 < in.size(); ++i) {
    EXPECT_LT(std::abs(out[i] - 0.5 * (in[i - 1] + in[i + 1])), 1e-13 * scale);
  }
}

TEST(Propagation, SlowEigenmodeDelaysByHalfDgd) {
  const double dt = kFiber.dgd / 2.0;
  const auto em = make_effective_medium(kFiber, horizontal(), horizontal());
  const auto in = gaussian_pulse(1024 * dt, 40 * dt, dt, 2048, kCarrier);
  const auto out = propagate_spectral(in, em);
  EXPECT_NEAR(peak_time(out) - peak_time(in), dt, 1e-6 * dt);
  EXPECT_NEAR(center_of_mass(out) - center_of_mass(in), dt, 1e-6 * dt);
  EXPECT_NEAR(out.energy(), in.energy(), 1e-12);
  EXPECT_LT(max_abs_diff(out, propagate_oracle(in, em)), 1e-12 * max_abs(in));
}

TEST(Propagation, DestructiveAtCarrierLeavesDerivative) {
  // Orthogonal polarizers in baseband: out = (s(t - d) - s(t + d)) / 2 up to
  // sign, with energy fraction (1 - C(2d) / E) / 2.
  const double dt = kFiber.dgd / 2.0;
  const auto em = make_effective_medium(kFiber, diagonal(), make_state(1.0, -1.0));
  ASSERT_FALSE(em.w0().has_value());
  const auto in = gaussian_pulse(2048 * dt, 40 * dt, dt, 4096);
  const auto out = propagate_spectral(in, em);
  const auto oracle = propagate_oracle(in, em);
  EXPECT_LT(max_abs_diff(out, oracle), 1e-13 * max_abs(in));
  const double e = autocorrelation(in, 0).real();
  const double expected = 0.5 * (1.0 - autocorrelation(in, 2).real() / e);
  EXPECT_NEAR(out.energy() / in.energy(), expected, 1e-9 * expected);
  EXPECT_LT(out.energy() / in.energy(), 1e-3);
}

TEST(Propagation, CenterOfMassMatchesMomentFormula) {
  // Aligned geometry, real symmetric input: the centroid moves by
  // (dgd/2) w / (1 + (w^2 - 1) <sin^2(Omega dgd/2)>), where the spectral
  // average is 1 - C(dgd)/E over 2 in the time domain.
  const double dt = kFiber.dgd / 2.0;
  const auto in = gaussian_pulse(4096 * dt, 300 * dt, dt, 8192, kCarrier);
  const double e = autocorrelation(in, 0).real();
  const double sin2 = 0.5 * (1.0 - autocorrelation(in, 2).real() / e);
  const FftPlan plan(in.size());
  for (double w : {-3500.0, -200.0, -60.0, -3.0, 0.5, 10.0, 400.0}) {
    const auto em = medium_for_weak_value(kFiber, kCarrier, w);
    const auto out = propagate_spectral(in, em, {}, plan);
    const double expected = 0.5 * kFiber.dgd * w / (1.0 + (w * w - 1.0) * sin2);
    EXPECT_NEAR(center_of_mass(out) - center_of_mass(in), expected, 1e-9 * std::abs(expected) + 1e-20) << w;
  }
}

TEST(Propagation, SpectralMatchesOracleOnRandomGeometries) {
  std::mt19937_64 rng(2718);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> g;
  for (int trial = 0; trial < 100; ++trial) {
    const int per_half = 1 + static_cast<int>(unit(rng) * 3.0);
    const double dt = kFiber.dgd / (2.0 * per_half);
    const std::size_t n = 1024;
    const double carrier = trial % 2 == 0 ? kCarrier : 1e12 * unit(rng);
    std::vector<Complex> samples(n, 0.0);
    // Smooth random envelope well inside the window.
    const double c = (0.3 + 0.4 * unit(rng)) * n;
    const double width = 10.0 + 60.0 * unit(rng);
    const Complex chirp(0.0, 0.01 * g(rng));
    for (std::size_t i = 0; i < n; ++i) {
      const double u = (static_cast<double>(i) - c) / width;
      samples[i] = std::exp(-u * u * (1.0 + chirp)) * Complex(1.0 + 0.3 * g(rng), 0.3 * g(rng)) *
                   std::exp(-0.5 * u * u);
    }
    const SampledSignal in(0.0, dt, samples, carrier);
    const auto em = make_effective_medium(kFiber, random_state(rng), random_state(rng));
    const auto spectral = propagate_spectral(in, em);
    const auto oracle = propagate_oracle(in, em);
    EXPECT_LT(max_abs_diff(spectral, oracle), 1e-9 * max_abs(in)) << "trial " << trial;
  }
}

TEST(Propagation, OracleRequiresAlignedDelays) {
  const auto em = medium_for_weak_value(kFiber, kCarrier, -10.0);
  const auto in = gaussian_pulse(5e-9, 1e-9, 1e-11, 2048, kCarrier);
  try {
    propagate_oracle(in, em);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::GridMismatch);
  }
}

TEST(Propagation, WrapAroundDetected) {
  const double dt = kFiber.dgd / 2.0;
  const auto em = medium_for_weak_value(kFiber, kCarrier, -10.0);
  const auto edge = gaussian_pulse(2047 * dt, 40 * dt, dt, 2048, kCarrier);
  try {
    propagate_spectral(edge, em);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::WrapAround);
  }
  // Keeping the 7.5 ns free delay pushes a pulse centred in a 10 ns window
  // across the edge.
  const auto centred = gaussian_pulse(5e-9, 1e-9, 1e-11, 1000, kCarrier);
  EXPECT_NO_THROW(propagate_spectral(centred, em));
  EXPECT_THROW(propagate_spectral(centred, em, {.remove_free_delay = false}), Error);
}

TEST(Propagation, CausalWithFreeDelay) {
  // Fiber length chosen so n_f L / c is a whole number of samples; nothing
  // may leave before the fast replica of the front, t_f - dgd/2 later.
  const double dt = kFiber.dgd / 2.0;
  const double t_free = 1500 * dt;
  const FiberMedium fiber = make_fiber(t_free * kSpeedOfLight / 1.5, 1.5, kFiber.dgd);
  ASSERT_NEAR(fiber.free_time() / dt, 1500.0, 1e-9);
  const auto in = square_pulse(200 * dt, 1000 * dt, 20 * dt, dt, 4096, kCarrier);
  const double earliest = 200 * dt + t_free - dt;
  for (double w : {-60.0, -10.0, -1.0, 0.0, 5.0}) {
    const auto em = medium_for_weak_value(fiber, kCarrier, w);
    const auto out = propagate_spectral(in, em, {.remove_free_delay = false});
    const auto oracle = propagate_oracle(in, em, {.remove_free_delay = false});
    EXPECT_LT(max_abs_diff(out, oracle), 1e-12 * max_abs(in));
    for (std::size_t i = 0; i < out.size() && out.time(i) <= earliest; ++i) {
      EXPECT_LT(std::abs(out[i]), 1e-12 * max_abs(in)) << "w=" << w << " i=" << i;
    }
  }
}

TEST(Propagation, SupportStartsNoEarlierThanFastReplica) {
  // The leading edge is reshaped (fast light amplifies it relative to the
  // peak) but nothing appears before the fast replica of the first nonzero
  // input sample.
  const double dt = kFiber.dgd / 2.0;
  const auto in = square_pulse(1000 * dt, 1500 * dt, 15 * dt, dt, 4096, kCarrier);
  std::size_t first = 0;
  while (in[first] == Complex(0.0)) ++first;
  const double scale = max_abs(in);
  const FftPlan plan(in.size());
  for (double w : {-1.0, -3.0, -10.0, -30.0, -60.0, 60.0}) {
    const auto out = propagate_spectral(in, medium_for_weak_value(kFiber, kCarrier, w), {}, plan);
    for (std::size_t i = 0; i + 1 < first; ++i) EXPECT_LT(std::abs(out[i]), 1e-12 * scale) << "w=" << w << " i=" << i;
    EXPECT_GT(std::abs(out[first - 1]), 0.0);
  }
}

TEST(Propagation, PassiveOnRandomGeometries) {
  std::mt19937_64 rng(31);
  const double dt = kFiber.dgd / 2.0;
  const auto in = gaussian_pulse(1024 * dt, 20 * dt, dt, 2048, kCarrier);
  const FftPlan plan(in.size());
  for (int i = 0; i < 100; ++i) {
    const auto em = make_effective_medium(kFiber, random_state(rng), random_state(rng));
    EXPECT_LE(propagate_spectral(in, em, {}, plan).energy(), in.energy() * (1.0 + 1e-12));
  }
}

TEST(Metrology, CenterOfMass) {
  std::vector<Complex> s(8, 0.0);
  s[2] = 1.0;
  s[4] = std::sqrt(3.0);
  EXPECT_NEAR(center_of_mass(SampledSignal(1.0, 0.5, s)), 1.0 + 0.5 * (2 * 1 + 4 * 3) / 4.0, 1e-15);
  try {
    center_of_mass(SampledSignal(0.0, 1.0, std::vector<Complex>(8)));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::ZeroEnergy);
  }
}

TEST(Metrology, PeakTime) {
  std::vector<Complex> s(8, 0.0);
  s[3] = 1.0;
  s[4] = 1.0;
  EXPECT_DOUBLE_EQ(peak_time(SampledSignal(0.0, 1.0, s)), 3.0);  // earliest of a tie
  // Parabola through (2, 1), (3, 2), (4, 1.5) peaks at 3 + 0.5 * (1 - 1.5) / (1 - 4 + 1.5)
  std::vector<Complex> p(8, 0.0);
  p[2] = 1.0;
  p[3] = std::sqrt(2.0);
  p[4] = std::sqrt(1.5);
  EXPECT_NEAR(peak_time(SampledSignal(0.0, 1.0, p)), 3.0 + 0.5 * (-0.5) / (-1.5), 1e-12);
  // Off-grid Gaussian centre.
  const auto g = gaussian_pulse(5.0037e-9, 1e-9, 1e-11, 2048);
  EXPECT_NEAR(peak_time(g), 5.0037e-9, 1e-13);
}

TEST(Metrology, FrontArrival) {
  std::vector<Complex> s(8, 0.0);
  s[3] = 0.5;  // intensity 0.25
  s[4] = 1.0;
  const SampledSignal sig(0.0, 1.0, s);
  EXPECT_NEAR(front_arrival(sig, 0.5), 3.0 + (0.5 - 0.25) / 0.75, 1e-15);
  EXPECT_NEAR(front_arrival(sig, 0.1), 2.4, 1e-15);
  EXPECT_NEAR(front_arrival(sig, 0.5, 0.4), 2.8, 1e-15);
  try {
    front_arrival(sig, 0.5, 10.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::NeverCrosses);
  }
  EXPECT_THROW(front_arrival(sig, 1.5), Error);
}

}  // namespace
}  // namespace fastlight
