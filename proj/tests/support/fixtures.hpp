#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <random>

#include "ringsfwm/core_model.hpp"
#include "ringsfwm/grid.hpp"
#include "ringsfwm/pump.hpp"

namespace fixtures {

using ringsfwm::cplx;

inline constexpr double v_default = 1.5e8;  // 15 cm/ns
inline constexpr double omega_p = 1.215e15;

inline ringsfwm::ModeParams mode(double omega, double coupling, double loss, double v = v_default,
                                 double u = v_default, double gamma_phase = 0.0, double mu_phase = 0.0) {
  return ringsfwm::ModeParams::from_rates(omega, v, u, coupling, loss, gamma_phase, mu_phase);
}

/// Same coupling and loss for every mode; signal/idler placed symmetrically
/// about the pump plus an optional detuning.
inline ringsfwm::RingParams ring(double coupling, double loss, double detuning = 0.0, cplx lambda = 1.0) {
  ringsfwm::RingParams p;
  p.pump = mode(omega_p, coupling, loss);
  p.signal = mode(omega_p + 3e13 + detuning, coupling, loss);
  p.idler = mode(omega_p - 3e13, coupling, loss);
  p.lambda = lambda;
  return p;
}

inline ringsfwm::RingParams random_ring(std::mt19937_64& rng, bool equal_speeds_phantom = true) {
  std::uniform_real_distribution<double> rate(2e9, 2e10), frac(0.0, 0.8), phase(-3.0, 3.0), speed(1.2e8, 2.0e8),
      det(-5e9, 5e9);
  ringsfwm::RingParams p;
  for (auto f : ringsfwm::all_fields) {
    const double gbar = rate(rng);
    const double m = frac(rng) * gbar;
    const double v = speed(rng);
    const double u = equal_speeds_phantom ? v : speed(rng);
    const double omega = f == ringsfwm::Field::pump ? omega_p : (f == ringsfwm::Field::signal ? omega_p + 3e13 : omega_p - 3e13);
    p.mode(f) = mode(omega, gbar - m, m, v, u, phase(rng), phase(rng));
  }
  p.signal.omega += det(rng);
  p.lambda = std::polar(1.0, phase(rng));
  return p;
}

/// Spectral grid wide enough for both damping and pump bandwidth.
inline ringsfwm::SpectralGrid grid_for(const ringsfwm::RingSystem& sys, const ringsfwm::PumpSpec& pump,
                                       std::size_t n) {
  return ringsfwm::SpectralGrid(ringsfwm::default_spectral_half_width(sys, pump), n);
}

inline ringsfwm::PumpField pump_field(const ringsfwm::RingSystem& sys, const ringsfwm::PumpSpec& spec) {
  const double v = sys.mode(ringsfwm::Field::pump).v;
  return ringsfwm::intracavity_field(sys, spec, ringsfwm::SpectralGrid(spec.support(v), 257));
}

inline double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

}  // namespace fixtures
