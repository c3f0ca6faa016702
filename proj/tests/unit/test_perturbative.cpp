#include <doctest.h>

#include <cmath>
#include <random>

#include "fixtures.hpp"
#include "ringsfwm/perturbative.hpp"

using namespace ringsfwm;
using fixtures::cplx;

namespace {

struct Solved {
  PumpPairFunction f;
  ResponseKernels k;
  ComplexGrid pair;
};

Solved solve(const RingSystem& sys, const PumpSpec& spec, std::size_t n) {
  const auto pump = fixtures::pump_field(sys, spec);
  const auto grid = fixtures::grid_for(sys, spec, n);
  auto f = pump_pair_function(pump, sys, grid, grid);
  auto k = response_kernels(sys, f);
  auto pair = pair_amplitude(k);
  return {std::move(f), std::move(k), std::move(pair)};
}

double ratio_of(const RingSystem& sys, const PumpSpec& spec, std::size_t n = 256) {
  const auto s = solve(sys, spec, n);
  return observables(s.k, s.pair, sys).ratio.value();
}

RingParams rates(double gs, double ms, double gi, double mi) {
  RingParams p = fixtures::ring(1e10, 0.0);
  p.signal = fixtures::mode(p.signal.omega, gs, ms);
  p.idler = fixtures::mode(p.idler.omega, gi, mi);
  return p;
}

}  // namespace

TEST_CASE("pump-pair function against a regularised double integral") {
  // (1/2pi v) int dk1 dk2 beta(k1) beta(k2) delta_eps(k1 + k2 - K), eps -> 0,
  // evaluated independently for a 100 ps pulse on a lossless 1e10 ring
  const RingSystem sys(fixtures::ring(1e10, 0.0));
  const auto pump = fixtures::pump_field(sys, PumpSpec::gaussian(1.0, 1e-10));
  const cplx at0 = pump_pair_value(pump, 0.0);
  const cplx at7 = pump_pair_value(pump, 7e9 / 1.5e8);
  const cplx ref0(-3.487710479289972e-09, 0.0);
  const cplx ref7(-2.655162732259693e-09, -1.518971383376581e-09);
  CHECK(std::abs(at0 - ref0) / std::abs(ref0) < 1e-6);
  CHECK(std::abs(at7 - ref7) / std::abs(ref7) < 1e-6);
}

TEST_CASE("pump-pair function depends only on kappa v_S + kappa' v_I") {
  std::mt19937_64 rng(3);
  const RingSystem sys(fixtures::random_ring(rng, false));
  const auto pump = fixtures::pump_field(sys, PumpSpec::gaussian(1.0, 1e-10));
  const double vs = sys.mode(Field::signal).v, vi = sys.mode(Field::idler).v;
  for (double shift : {-30.0, 17.0, 55.0}) {
    const cplx a = pump_pair_value(pump, sys, 12.0, -40.0);
    const cplx b = pump_pair_value(pump, sys, 12.0 + shift, -40.0 - shift * vs / vi);
    CHECK(std::abs(a - b) <= 1e-10 * std::abs(a));
  }
}

TEST_CASE("pump-pair function on a grid") {
  std::mt19937_64 rng(5);
  const RingSystem sys(fixtures::random_ring(rng));
  const auto spec = PumpSpec::gaussian(1.0, 1e-10);
  const auto pump = fixtures::pump_field(sys, spec);
  const SpectralGrid sg(300.0, 33), ig(250.0, 29);
  const auto f = pump_pair_function(pump, sys, sg, ig);
  const auto fi = f.idler_view();
  CHECK(fi.axis_signal() == ig);
  for (std::size_t a = 0; a < 33; a += 5)
    for (std::size_t b = 0; b < 29; b += 4) {
      CHECK(fi(b, a) == f.samples(a, b));
      CHECK(std::abs(f.samples(a, b) - pump_pair_value(pump, sys, sg[a], ig[b])) <= 1e-12 * std::abs(f.samples(a, b)) + 1e-300);
    }
  CHECK(f.detuning == sys.detuning());
}

TEST_CASE("pump-pair function refuses a truncated pump spectrum") {
  const RingSystem sys(fixtures::ring(1e10, 0.0));
  const auto spec = PumpSpec::gaussian(1.0, 1e-10);
  const auto narrow = intracavity_field(sys, spec, SpectralGrid(6.5 / (1.5e8 * 1e-10), 65));
  CHECK_THROWS_AS(pump_pair_function(narrow, sys, SpectralGrid(100.0, 9), SpectralGrid(100.0, 9)), CoverageError);
}

TEST_CASE("single-field kernels") {
  SUBCASE("critical coupling extinguishes the through port at resonance") {
    const RingSystem sys(fixtures::ring(1e10, 1e10));
    CHECK(std::abs(diagonal_response(sys, Field::signal, 0.0).channel_from_channel) < 1e-15);
  }
  SUBCASE("lossless ring is all-pass") {
    const RingSystem sys(fixtures::ring(1e10, 0.0));
    for (double k : {-300.0, 0.0, 12.5, 1e3}) {
      CHECK(std::abs(diagonal_response(sys, Field::signal, k).channel_from_channel) == doctest::Approx(1.0).epsilon(1e-14));
    }
  }
  SUBCASE("flat-top identity at random wavevectors") {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> kd(-2e3, 2e3);
    for (int trial = 0; trial < 3; ++trial) {
      const RingSystem sys(fixtures::random_ring(rng));
      for (int n = 0; n < 64; ++n) {
        for (Field f : {Field::signal, Field::idler}) {
          const auto d = diagonal_response(sys, f, kd(rng));
          CHECK(std::abs(std::norm(d.channel_from_channel) + std::norm(d.channel_from_phantom) - 1.0) < 1e-12);
          CHECK(std::abs(std::norm(d.phantom_from_channel) + std::norm(d.phantom_from_phantom) - 1.0) < 1e-12);
        }
      }
    }
  }
}

TEST_CASE("pair amplitude matches the closed-form JSI") {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 5; ++trial) {
    const RingSystem sys(fixtures::random_ring(rng, trial % 2 == 0));
    const auto spec = PumpSpec::gaussian(std::polar(1.3, 0.4), trial < 3 ? 1e-10 : 1e-9);
    const auto s = solve(sys, spec, 64);
    const auto phi = jsi_closed_form(sys, s.f).jsi;
    const auto num = intensity(s.pair);
    double worst = 0.0;
    for (std::size_t k = 0; k < num.values().size(); ++k) {
      const double ref = phi.values()[k];
      if (ref > 0.0) worst = std::max(worst, std::abs(num.values()[k] - ref) / ref);
    }
    CAPTURE(trial);
    CHECK(worst < 1e-8);
    for (double x : phi.values()) CHECK(x >= 0.0);
  }
}

TEST_CASE("pair amplitude scaling") {
  const RingSystem sys(fixtures::ring(1e10, 4e9));
  const auto spec = PumpSpec::gaussian(1.0, 1e-10);
  const auto base = solve(sys, spec, 32);
  const cplx c(0.5, 1.5);
  const auto scaled = solve(sys, spec.scaled(c), 32);
  for (std::size_t k = 0; k < base.pair.values().size(); k += 7) {
    CHECK(std::abs(scaled.pair.values()[k] - c * c * base.pair.values()[k]) <= 1e-9 * std::abs(c * c * base.pair.values()[k]));
  }
  const auto off = solve(sys.with_nonlinearity(0.0, 0.0, 0.0), spec, 32);
  for (auto x : off.pair.values()) CHECK(x == cplx{});
}

TEST_CASE("signal and idler roles are symmetric") {
  std::mt19937_64 rng(29);
  RingParams p = fixtures::random_ring(rng);
  p.signal.v = p.idler.v;
  p.signal.u = p.idler.u;
  RingParams q = p;
  std::swap(q.signal, q.idler);
  const RingSystem a(p), b(q);
  const auto spec = PumpSpec::gaussian(1.0, 1e-10);
  const auto sa = solve(a, spec, 48), sb = solve(b, spec, 48);
  for (std::size_t r = 0; r < 48; r += 3)
    for (std::size_t c = 0; c < 48; c += 5) {
      CHECK(std::abs(sa.pair(r, c) - sb.pair(c, r)) <= 1e-9 * std::abs(sa.pair(r, c)));
    }
  CHECK(a.closed_form_singles_ratio() == doctest::Approx(b.closed_form_singles_ratio()).epsilon(1e-14));
}

TEST_CASE("JSI shape") {
  const RingSystem sys(fixtures::ring(2e10, 0.0));
  const auto spec = PumpSpec::gaussian(1.0, 1e-9);
  const auto s = solve(sys, spec, 257);
  const auto jsi = normalized(intensity(s.pair));
  CHECK(jsi(128, 128) == doctest::Approx(1.0).epsilon(1e-12));
  // along kappa' = -kappa the pump-pair factor is constant and only the
  // two Lorentzians remain
  const double g = 2e10, v = 1.5e8;
  const auto& ax = jsi.axis_signal();
  double hwhm = 0.0;
  for (std::size_t a = 128; a + 1 < 257; ++a) {
    const double x = ax[a] * v;
    const double expect = std::pow(g * g / (x * x + g * g), 2);
    CHECK(jsi(a, 256 - a) == doctest::Approx(expect).epsilon(1e-9));
    if (hwhm == 0.0 && jsi(a + 1, 255 - a) < 0.5) {
      const double y0 = jsi(a, 256 - a), y1 = jsi(a + 1, 255 - a);
      hwhm = x + (y0 - 0.5) / (y0 - y1) * ax.spacing() * v;
    }
  }
  CHECK(hwhm == doctest::Approx(g * std::sqrt(std::sqrt(2.0) - 1.0)).epsilon(0.05));
}

TEST_CASE("singles-to-coincidences ratio") {
  const auto spec = PumpSpec::gaussian(1.0, 1e-10);
  SUBCASE("lossless ring emits no singles") {
    const RingSystem sys(fixtures::ring(1e10, 0.0));
    const auto s = solve(sys, spec, 128);
    const auto o = observables(s.k, s.pair, sys);
    CHECK(o.ratio.value() < 1e-14);
    CHECK(o.coincidences > 0.0);
  }
  SUBCASE("critical coupling gives two") {
    const RingSystem sys(fixtures::ring(1e10, 1e10));
    CHECK(sys.closed_form_singles_ratio() == 2.0);
    CHECK(ratio_of(sys, spec) == doctest::Approx(2.0).epsilon(5e-3));
  }
  SUBCASE("unequal damping") {
    const double u = 1e10 / 3.0;
    const RingSystem sys(rates(2 * u, u, 3 * u, 6 * u));
    CHECK(sys.closed_form_singles_ratio() == doctest::Approx(2.5).epsilon(1e-14));
    CHECK(ratio_of(sys, spec) == doctest::Approx(2.5).epsilon(5e-3));
  }
  SUBCASE("independent of pump and pair coupling") {
    const RingSystem sys(rates(1e10, 4e9, 7e9, 2e9));
    const double r0 = ratio_of(sys, spec);
    CHECK(ratio_of(sys, spec.scaled(10.0)) == doctest::Approx(r0).epsilon(1e-10));
    CHECK(ratio_of(sys.with_nonlinearity(std::polar(40.0, 1.1), 0.0, 0.0), spec) == doctest::Approx(r0).epsilon(1e-10));
    CHECK(ratio_of(sys, PumpSpec::gaussian(1.0, 1e-9)) == doctest::Approx(r0).epsilon(5e-3));
  }
  SUBCASE("no pump, no ratio") {
    const RingSystem sys(fixtures::ring(1e10, 1e10));
    const auto s = solve(sys, PumpSpec::gaussian(0.0, 1e-10), 32);
    const auto o = observables(s.k, s.pair, sys);
    CHECK_FALSE(o.ratio.has_value());
    CHECK(o.coincidences == 0.0);
    CHECK(o.ratio_formula == 2.0);
  }
  SUBCASE("under-resolved grid is reported") {
    const RingSystem sys(fixtures::ring(1e10, 1e10));
    const auto pump = fixtures::pump_field(sys, spec);
    const SpectralGrid coarse(fixtures::grid_for(sys, spec, 8).half_width(), 8);
    const auto f = pump_pair_function(pump, sys, coarse, coarse);
    const auto k = response_kernels(sys, f);
    CHECK_THROWS_AS(observables(k, pair_amplitude(k), sys), AccuracyError);
  }
}

TEST_CASE("Schmidt analysis") {
  const SpectralGrid g(1.0, 24);
  SUBCASE("separable") {
    ComplexGrid s(g, g);
    for (std::size_t a = 0; a < 24; ++a)
      for (std::size_t b = 0; b < 24; ++b) s(a, b) = std::exp(-g[a] * g[a]) * std::polar(std::exp(-3 * g[b] * g[b]), g[b]);
    const auto r = schmidt_analysis(s);
    CHECK(r.K == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(r.purity == doctest::Approx(1.0).epsilon(1e-12));
  }
  SUBCASE("two equal modes") {
    ComplexGrid s(g, g);
    s(2, 5) = 1.0;
    s(9, 1) = cplx(0.0, -1.0);
    const auto r = schmidt_analysis(s);
    CHECK(r.K == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(r.weights[0] == doctest::Approx(0.5));
  }
  SUBCASE("zero amplitude") {
    CHECK_THROWS_AS(schmidt_analysis(ComplexGrid(g, g)), UndefinedAnalysis);
  }
}

TEST_CASE("figure regimes against the frozen reference run") {
  // independent reference: 128-point grids spanning max(8 Gamma_bar, 8/sigma)/v
  struct Case {
    double sigma, loss, K, elongation, fwhm;
  };
  const Case cases[] = {
      {1e-10, 0.0, 1.248582617, 5.0202, 1.684157549e10},
      {1e-10, 1e10, 1.567857531, 11.021, 3.078619409e10},
      {1e-9, 0.0, 5.174135038, 174.4206, 1.321742331e10},
      {1e-9, 1e10, 10.17341546, 717.8706, 2.610886605e10},
  };
  for (const auto& c : cases) {
    CAPTURE(c.sigma);
    CAPTURE(c.loss);
    const RingSystem sys(fixtures::ring(1e10, c.loss));
    const auto s = solve(sys, PumpSpec::gaussian(1.0, c.sigma), 128);
    const auto jsi = intensity(s.pair);
    CHECK(schmidt_analysis(s.pair).K == doctest::Approx(c.K).epsilon(1e-3));
    CHECK(jsi_moments(jsi, 1.5e8, 1.5e8).elongation == doctest::Approx(c.elongation).epsilon(1e-3));
    CHECK(marginal_fwhm(jsi, Field::signal).value() * 1.5e8 == doctest::Approx(c.fwhm).epsilon(1e-3));
    CHECK(marginal_fwhm(jsi, Field::idler).value() * 1.5e8 == doctest::Approx(c.fwhm).epsilon(1e-3));
  }
}

TEST_CASE("marginal FWHM needs a decayed marginal") {
  RealGrid g(SpectralGrid(1.0, 9), SpectralGrid(1.0, 9));
  for (auto& x : g.values()) x = 1.0;
  CHECK_FALSE(marginal_fwhm(g, Field::signal).has_value());
}
