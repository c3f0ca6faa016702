#pragma once

// Physical parameters of a microring side-coupled to a channel waveguide,
// with scattering loss modelled as a second (phantom) output channel.
//
// Units are SI throughout. Wavevector offsets kappa are in rad/m, rates in
// s^-1 (angular), coupling constants gamma and mu in (m/s) s^-1/2 so that
// |gamma|^2 / (2 v) is a rate.

#include <array>
#include <complex>
#include <cstddef>

namespace ringsfwm {

using cplx = std::complex<double>;

enum class Field : std::size_t { pump = 0, signal = 1, idler = 2 };

inline constexpr std::array<Field, 3> all_fields{Field::pump, Field::signal, Field::idler};

const char* to_string(Field f) noexcept;

/// Per-resonance parameters.
struct ModeParams {
  double omega = 0.0;  ///< reference angular frequency, rad/s
  double v = 0.0;      ///< physical channel group speed, m/s
  double u = 0.0;      ///< phantom channel group speed, m/s
  cplx gamma{};        ///< ring-channel coupling
  cplx mu{};           ///< ring-phantom coupling

  /// Builds a mode from damping rates instead of raw couplings:
  /// |gamma| = sqrt(2 Gamma v), |mu| = sqrt(2 M u).
  static ModeParams from_rates(double omega, double v, double u, double coupling_rate,
                               double loss_rate, double gamma_phase = 0.0,
                               double mu_phase = 0.0);
};

struct RingParams {
  ModeParams pump;
  ModeParams signal;
  ModeParams idler;
  cplx lambda{};      ///< pair-generation coupling, rad/s
  double eta = 0.0;   ///< pump self-phase modulation, rad/s per photon
  cplx zeta{};        ///< pump-signal/idler cross-phase modulation, rad/s per photon

  const ModeParams& mode(Field f) const noexcept;
  ModeParams& mode(Field f) noexcept;
};

struct ModeRates {
  double coupling = 0.0;  ///< Gamma_J = |gamma_J|^2 / (2 v_J)
  double loss = 0.0;      ///< M_J = |mu_J|^2 / (2 u_J)
  double total = 0.0;     ///< Gamma_J + M_J
  bool critically_coupled = false;
};

struct DerivedRates {
  ModeRates pump;
  ModeRates signal;
  ModeRates idler;

  const ModeRates& mode(Field f) const noexcept;
};

inline constexpr double default_critical_tol = 1e-9;

/// Throws InvalidParameter on a non-positive speed, a non-finite field or a
/// mode with zero total damping.
DerivedRates derive_rates(const RingParams& params, double rel_tol = default_critical_tol);

/// omega_S + omega_I - 2 omega_P, rad/s.
double detuning(const RingParams& params) noexcept;

/// Validated, immutable ring description with its derived rates cached.
class RingSystem {
public:
  explicit RingSystem(RingParams params, double critical_tol = default_critical_tol);

  const RingParams& params() const noexcept { return params_; }
  const DerivedRates& rates() const noexcept { return rates_; }
  const ModeParams& mode(Field f) const noexcept { return params_.mode(f); }
  const ModeRates& rate(Field f) const noexcept { return rates_.mode(f); }
  double detuning() const noexcept { return detuning_; }
  double critical_tol() const noexcept { return critical_tol_; }

  /// Phantom coupling rescaled to the physical-channel wavevector
  /// convention, mu sqrt(v/u). Identical to mu when u == v.
  cplx effective_mu(Field f) const noexcept;

  /// Singles-to-coincidences ratio of the weak-pump limit,
  /// (Gamma_S M_I + Gamma_I M_S) / (Gamma_S Gamma_I).
  double closed_form_singles_ratio() const noexcept;

  /// Copy with new nonlinear coefficients.
  RingSystem with_nonlinearity(cplx lambda, double eta, cplx zeta) const;

private:
  RingParams params_;
  DerivedRates rates_;
  double detuning_ = 0.0;
  double critical_tol_ = default_critical_tol;
};

struct MaterialEstimate {
  double chi3 = 0.0;         ///< m^2/V^2
  double n = 1.0;            ///< refractive index
  double mode_volume = 0.0;  ///< m^3
  double omega_pump = 0.0;   ///< rad/s
};

struct NonlinearCouplings {
  double lambda = 0.0;
  double eta = 0.0;
  double zeta = 0.0;
};

/// hbar lambda ~ 3 (hbar omega_P)^2 chi3 / (4 eps0 n^4 V), eta = lambda/2,
/// zeta = 2 lambda, for a single chi3 component accessed uniformly.
NonlinearCouplings estimate_nonlinear_couplings(const MaterialEstimate& m);

namespace constants {
inline constexpr double hbar = 1.054571817e-34;      // J s
inline constexpr double epsilon0 = 8.8541878128e-12;  // F/m
}  // namespace constants

}  // namespace ringsfwm
