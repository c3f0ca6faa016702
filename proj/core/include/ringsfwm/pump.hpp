#pragma once

// Incoming coherent pump and the semiclassical, undepleted intracavity pump
// amplitude beta_P in the frequency and time domains.
//
// Normalisation: int |alpha_P(kappa)|^2 dkappa is the mean photon number of
// the incoming pulse, so |beta_P(t)|^2 is an intracavity photon number.

#include <complex>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <variant>
#include <vector>

#include "ringsfwm/core_model.hpp"
#include "ringsfwm/grid.hpp"
#include "ringsfwm/numerics.hpp"

namespace ringsfwm {

/// alpha_P(kappa) = amplitude * exp(-(kappa v_P duration / 2)^2), peak at t = 0.
struct GaussianPump {
  cplx amplitude{};  ///< m^1/2
  double duration = 0.0;
};

/// alpha_P sampled on a uniform kappa axis; resampled band-limitedly.
struct TabulatedPump {
  SpectralGrid axis;
  std::vector<cplx> samples;
};

class PumpSpec {
public:
  static PumpSpec gaussian(cplx amplitude, double duration);
  /// Throws CoverageError if the table has not decayed at its edges.
  static PumpSpec tabulated(SpectralGrid axis, std::vector<cplx> samples);

  bool is_gaussian() const noexcept { return std::holds_alternative<GaussianPump>(shape_); }
  const GaussianPump& as_gaussian() const { return std::get<GaussianPump>(shape_); }
  const TabulatedPump& as_tabulated() const { return std::get<TabulatedPump>(shape_); }

  /// alpha_P at one wavevector offset.
  cplx amplitude_at(double kappa, double v_pump) const;

  /// Half-width in kappa outside which alpha_P is negligible (< e^-36 for
  /// the Gaussian, the table range otherwise).
  double support(double v_pump) const;

  /// Copy with every amplitude multiplied by c.
  PumpSpec scaled(cplx c) const;

private:
  using Shape = std::variant<GaussianPump, TabulatedPump>;
  explicit PumpSpec(Shape s) : shape_(std::move(s)) {}
  Shape shape_;
};

/// Samples alpha_P on the grid. Gaussian pumps require the grid to span
/// +-6 / (v_P duration); otherwise CoverageError.
std::vector<cplx> incoming_spectrum(const PumpSpec& spec, double v_pump, const SpectralGrid& grid);

/// Free incoming field at the coupling point, psi_{P<}(0, t) =
/// int dkappa/sqrt(2 pi) alpha_P(kappa) e^{-i kappa v_P t}.
class IncomingDrive {
public:
  IncomingDrive(const PumpSpec& spec, double v_pump);
  cplx operator()(double t) const;
  /// max_t |psi(t)| (closed form for the Gaussian).
  double peak() const noexcept { return peak_; }

private:
  std::optional<GaussianPump> gaussian_;
  double v_ = 0.0;
  std::vector<cplx> table_;
  UniformAxis table_axis_;
  double peak_ = 0.0;
};

/// beta_P(kappa) = -i gamma_P^* alpha_P(kappa) / (-i kappa v_P + Gamma_bar_P).
cplx intracavity_amplitude(const RingSystem& sys, double kappa, cplx alpha);
std::vector<cplx> intracavity_spectrum(const RingSystem& sys, const SpectralGrid& grid,
                                       std::span<const cplx> alpha);

/// Intracavity pump. Always carries the spectrum on a SpectralGrid and an
/// evaluator for arbitrary kappa; carries a time envelope when built by
/// pump_time_evolution.
class PumpField {
public:
  using SpectrumFn = std::function<cplx(double)>;

  PumpField(SpectralGrid grid, std::vector<cplx> spectrum, SpectrumFn evaluator, double support,
            double v_pump);

  const SpectralGrid& spectral_grid() const noexcept { return grid_; }
  std::span<const cplx> spectrum() const noexcept { return spectrum_; }
  cplx spectrum_at(double kappa) const { return evaluator_(kappa); }
  double support() const noexcept { return support_; }
  double v_pump() const noexcept { return v_pump_; }

  bool has_envelope() const noexcept { return time_grid_.has_value(); }
  const TimeGrid& time_grid() const;
  std::span<const cplx> envelope() const noexcept { return envelope_; }
  /// Interpolated beta_P(t); CoverageError outside the time grid.
  cplx envelope_at(double t) const;
  /// |beta_P(t_k)|^2 at every time node.
  std::vector<double> photon_number() const;
  /// Envelope had not decayed to 1e-6 of its peak at the end of the grid.
  bool tail_truncated() const noexcept { return tail_truncated_; }
  /// Step-halving error estimate of the envelope ODE (0 if not requested).
  double ode_error_estimate() const noexcept { return ode_error_; }

  void attach_envelope(TimeGrid grid, std::vector<cplx> envelope, double ode_error);

private:
  SpectralGrid grid_;
  std::vector<cplx> spectrum_;
  SpectrumFn evaluator_;
  double support_ = 0.0;
  double v_pump_ = 0.0;
  std::optional<TimeGrid> time_grid_;
  std::vector<cplx> envelope_;
  bool tail_truncated_ = false;
  double ode_error_ = 0.0;
};

/// Linear (eta = 0) intracavity pump: the Lorentzian filter applied to the
/// incoming spectrum, with a closed-form evaluator.
PumpField intracavity_field(const RingSystem& sys, const PumpSpec& spec, const SpectralGrid& grid);

/// Integrates d beta/dt = -(Gamma_bar_P + 2 i eta |beta|^2) beta - i gamma_P^* psi_{P<}(0,t)
/// from beta(t0) = 0 on the time grid, then transforms the envelope onto
/// the spectral grid. Throws CoverageError if the drive at t0 exceeds 1e-6
/// of its peak, DivergenceError if the ODE blows up.
PumpField pump_time_evolution(const RingSystem& sys, const PumpSpec& spec, const TimeGrid& time_grid,
                              const SpectralGrid& spectral_grid, const OdeOptions& options = {});

/// +-max(8 Gamma_bar_S / v_S, 8 Gamma_bar_I / v_I, 8 / (v_P sigma)); for
/// tabulated pumps the table half-width replaces the last term.
double default_spectral_half_width(const RingSystem& sys, const PumpSpec& spec);

/// [-6 sigma, 6 sigma + 25 / min Gamma_bar] for a Gaussian pump.
TimeGrid default_time_grid(const RingSystem& sys, const PumpSpec& spec, std::size_t n_points);

}  // namespace ringsfwm
