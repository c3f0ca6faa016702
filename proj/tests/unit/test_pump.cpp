#include <doctest.h>

#include <cmath>
#include <numbers>

#include "fixtures.hpp"
#include "ringsfwm/pump.hpp"

using namespace ringsfwm;
using fixtures::cplx;

namespace {

constexpr cplx I{0.0, 1.0};

double l2_rel(std::span<const cplx> a, std::span<const cplx> b) {
  double num = 0.0, den = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    num += std::norm(a[k] - b[k]);
    den += std::norm(b[k]);
  }
  return std::sqrt(num / den);
}

}  // namespace

TEST_CASE("incoming spectrum") {
  const auto spec = PumpSpec::gaussian(cplx(0.3, 0.4), 1e-10);
  CHECK(spec.amplitude_at(0.0, 1.5e8) == cplx(0.3, 0.4));
  // 2 / (v sigma) = 133.33 rad/m is the 1/e point
  const double kw = 2.0 / (1.5e8 * 1e-10);
  CHECK(kw == doctest::Approx(133.3333333).epsilon(1e-9));
  CHECK(std::abs(spec.amplitude_at(kw, 1.5e8)) == doctest::Approx(0.5 / std::numbers::e).epsilon(1e-14));
  CHECK(std::abs(spec.amplitude_at(-kw, 1.5e8)) == doctest::Approx(0.5 / std::numbers::e).epsilon(1e-14));
  CHECK(spec.support(1.5e8) > 6.0 * kw / 2.0);
}

TEST_CASE("incoming spectrum: coverage and invalid input") {
  const auto spec = PumpSpec::gaussian(1.0, 1e-10);
  CHECK_THROWS_AS(incoming_spectrum(spec, 1.5e8, SpectralGrid(100.0, 65)), CoverageError);
  CHECK_NOTHROW(incoming_spectrum(spec, 1.5e8, SpectralGrid(400.0, 65)));
  CHECK_THROWS_AS(PumpSpec::gaussian(1.0, 0.0), InvalidParameter);
  std::vector<cplx> flat(33, cplx(1.0));
  CHECK_THROWS_AS(PumpSpec::tabulated(SpectralGrid(10.0, 33), flat), CoverageError);
}

TEST_CASE("tabulated pump reproduces a Gaussian") {
  const double v = 1.5e8, sigma = 1e-10;
  const auto g = PumpSpec::gaussian(1.0, sigma);
  const SpectralGrid axis(g.support(v), 257);
  const auto t = PumpSpec::tabulated(axis, incoming_spectrum(g, v, axis));
  CHECK(std::abs(t.amplitude_at(37.0, v) - g.amplitude_at(37.0, v)) < 1e-10);
  const IncomingDrive dg(g, v), dt(t, v);
  CHECK(std::abs(dt(3e-11) - dg(3e-11)) / dg.peak() < 1e-8);
  CHECK(dt.peak() == doctest::Approx(dg.peak()).epsilon(1e-3));
}

TEST_CASE("intracavity spectrum is the Lorentzian filter") {
  const RingSystem sys(fixtures::ring(1e10, 5e9));
  const auto& p = sys.mode(Field::pump);
  const double gbar = sys.rate(Field::pump).total;
  const cplx alpha(0.7, -0.2);
  CHECK(std::abs(intracavity_amplitude(sys, 0.0, alpha) - (-I * std::conj(p.gamma) * alpha / gbar)) < 1e-12 * std::abs(p.gamma));
  const double half = std::norm(intracavity_amplitude(sys, gbar / p.v, 1.0)) / std::norm(intracavity_amplitude(sys, 0.0, 1.0));
  CHECK(half == doctest::Approx(0.5).epsilon(1e-14));
}

TEST_CASE("pump ODE reproduces the Lorentzian-filtered spectrum") {
  for (double sigma : {1e-10, 1e-9}) {
    for (double loss : {0.0, 1e10}) {
      const RingSystem sys(fixtures::ring(1e10, loss));
      const auto spec = PumpSpec::gaussian(1.0, sigma);
      const double v = sys.mode(Field::pump).v;
      const SpectralGrid sg(spec.support(v), 129);
      const auto tg = default_time_grid(sys, spec, 8001);
      const auto ode = pump_time_evolution(sys, spec, tg, sg);
      const auto lin = intracavity_field(sys, spec, sg);
      CAPTURE(sigma);
      CAPTURE(loss);
      CHECK(l2_rel(ode.spectrum(), lin.spectrum()) <= 1e-4);
      CHECK_FALSE(ode.tail_truncated());
    }
  }
}

TEST_CASE("pump ODE: zero drive, linearity, early start") {
  const RingSystem sys(fixtures::ring(1e10, 0.0));
  const auto spec = PumpSpec::gaussian(1.0, 1e-10);
  const SpectralGrid sg(spec.support(1.5e8), 65);
  const auto tg = default_time_grid(sys, spec, 2001);

  const auto zero = pump_time_evolution(sys, PumpSpec::gaussian(0.0, 1e-10), tg, sg);
  for (auto b : zero.envelope()) CHECK(b == cplx{});

  const auto one = pump_time_evolution(sys, spec, tg, sg);
  const cplx c(2.0, -1.5);
  const auto scaled = pump_time_evolution(sys, spec.scaled(c), tg, sg);
  for (std::size_t k = 0; k < tg.size(); k += 97) {
    CHECK(std::abs(scaled.envelope()[k] - c * one.envelope()[k]) <= 1e-12 * std::abs(c) * (std::abs(one.envelope()[k]) + 1e-30));
  }

  CHECK_THROWS_AS(pump_time_evolution(sys, spec, TimeGrid(-2e-10, 1e-9, 501), sg), CoverageError);
}

TEST_CASE("pump ODE: free decay at the total damping rate") {
  const RingSystem sys(fixtures::ring(1e10, 1e10));
  const auto spec = PumpSpec::gaussian(1.0, 1e-11);
  const auto tg = default_time_grid(sys, spec, 6001);
  const auto f = pump_time_evolution(sys, spec, tg, SpectralGrid(spec.support(1.5e8), 33));
  // well after the drive, |beta| ~ exp(-Gamma_bar t)
  const double t1 = 2e-10, t2 = 6e-10;
  const double slope = std::log(std::abs(f.envelope_at(t2)) / std::abs(f.envelope_at(t1))) / (t2 - t1);
  CHECK(slope == doctest::Approx(-2e10).epsilon(1e-6));
}

TEST_CASE("pump ODE: self-phase modulated steady state") {
  // long pulse, adiabatic: n (Gamma_bar^2 + 4 eta^2 n^2) = |gamma|^2 |psi|^2
  // eta chosen so 2 eta n_linear = Gamma_bar; cubic root frozen below
  const double sigma = 1e-8;
  const auto sys = RingSystem(fixtures::ring(1e10, 0.0)).with_nonlinearity(0.0, 1.875e11, 0.0);
  const auto spec = PumpSpec::gaussian(1.0, sigma);
  const TimeGrid tg(-6 * sigma, 6 * sigma + 25.0 / 1e10, 7001);
  const auto f = pump_time_evolution(sys, spec, tg, SpectralGrid(spec.support(1.5e8), 33));
  const double n0 = std::norm(f.envelope_at(0.0));
  CHECK(n0 == doctest::Approx(0.018195408102080515).epsilon(1e-3));

  const auto lin = pump_time_evolution(RingSystem(fixtures::ring(1e10, 0.0)), spec, tg, SpectralGrid(spec.support(1.5e8), 33));
  CHECK(std::norm(lin.envelope_at(0.0)) == doctest::Approx(0.026666666666666667).epsilon(1e-3));
}

TEST_CASE("pump ODE: weak field is insensitive to self-phase modulation") {
  const auto base = RingSystem(fixtures::ring(1e10, 0.0));
  const auto spec = PumpSpec::gaussian(1e-4, 1e-10);
  const auto tg = default_time_grid(base, spec, 3001);
  const SpectralGrid sg(spec.support(1.5e8), 65);
  const auto a = pump_time_evolution(base, spec, tg, sg);
  const auto b = pump_time_evolution(base.with_nonlinearity(0.0, 1e3, 0.0), spec, tg, sg);
  CHECK(l2_rel(b.envelope(), a.envelope()) < 1e-6);
}

TEST_CASE("pump ODE: step-halving error estimate") {
  const RingSystem sys(fixtures::ring(1e10, 0.0));
  const auto spec = PumpSpec::gaussian(1.0, 1e-10);
  OdeOptions opt;
  opt.estimate_error = true;
  const auto f = pump_time_evolution(sys, spec, default_time_grid(sys, spec, 2001), SpectralGrid(spec.support(1.5e8), 33), opt);
  CHECK(f.ode_error_estimate() > 0.0);
  CHECK(f.ode_error_estimate() < 1e-8);
}
