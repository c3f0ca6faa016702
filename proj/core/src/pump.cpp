#include "ringsfwm/pump.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "ringsfwm/errors.hpp"

namespace ringsfwm {

namespace {
constexpr cplx I{0.0, 1.0};
constexpr double drive_start_threshold = 1e-6;
}  // namespace

PumpSpec PumpSpec::gaussian(cplx amplitude, double duration) {
  if (!(duration > 0.0) || !std::isfinite(duration)) {
    throw InvalidParameter("Gaussian pump duration must be positive");
  }
  return PumpSpec(GaussianPump{amplitude, duration});
}

PumpSpec PumpSpec::tabulated(SpectralGrid axis, std::vector<cplx> samples) {
  if (samples.size() != axis.size()) throw ShapeError("tabulated pump: sample count mismatch");
  for (const auto& s : samples) {
    if (!std::isfinite(s.real()) || !std::isfinite(s.imag())) {
      throw InvalidParameter("tabulated pump: non-finite sample");
    }
  }
  if (edges_not_decayed(samples)) {
    throw CoverageError("tabulated pump: spectrum has not decayed at the table edges");
  }
  return PumpSpec(TabulatedPump{axis, std::move(samples)});
}

cplx PumpSpec::amplitude_at(double kappa, double v_pump) const {
  if (const auto* g = std::get_if<GaussianPump>(&shape_)) {
    const double x = 0.5 * kappa * v_pump * g->duration;
    return g->amplitude * std::exp(-x * x);
  }
  const auto& t = std::get<TabulatedPump>(shape_);
  return sinc_interpolate(t.samples, t.axis.axis(), kappa);
}

double PumpSpec::support(double v_pump) const {
  if (const auto* g = std::get_if<GaussianPump>(&shape_)) {
    return 12.0 / (v_pump * g->duration);
  }
  return std::get<TabulatedPump>(shape_).axis.half_width();
}

PumpSpec PumpSpec::scaled(cplx c) const {
  if (const auto* g = std::get_if<GaussianPump>(&shape_)) {
    return PumpSpec(GaussianPump{c * g->amplitude, g->duration});
  }
  auto t = std::get<TabulatedPump>(shape_);
  for (auto& s : t.samples) s *= c;
  return PumpSpec(std::move(t));
}

std::vector<cplx> incoming_spectrum(const PumpSpec& spec, double v_pump, const SpectralGrid& grid) {
  if (spec.is_gaussian()) {
    const double need = 6.0 / (v_pump * spec.as_gaussian().duration);
    if (grid.half_width() < need) {
      throw CoverageError("incoming_spectrum: grid narrower than +-6/(v_P sigma)");
    }
  }
  std::vector<cplx> out(grid.size());
  for (std::size_t k = 0; k < grid.size(); ++k) out[k] = spec.amplitude_at(grid[k], v_pump);
  return out;
}

IncomingDrive::IncomingDrive(const PumpSpec& spec, double v_pump) : v_(v_pump) {
  if (spec.is_gaussian()) {
    gaussian_ = spec.as_gaussian();
    // int dk/sqrt(2pi) a e^{-(k v s/2)^2} e^{-i k v t} = a sqrt(2) / (v s) e^{-(t/s)^2}
    peak_ = std::abs(gaussian_->amplitude) * std::numbers::sqrt2 / (v_ * gaussian_->duration);
  } else {
    const auto& t = spec.as_tabulated();
    table_ = t.samples;
    table_axis_ = t.axis.axis();
    // the envelope of a band-limited table peaks somewhere on its Nyquist grid
    const auto synth = fourier_pair(table_, table_axis_, v_, FourierDirection::spectral_to_time);
    for (const auto& s : synth.samples) peak_ = std::max(peak_, std::abs(s));
  }
}

cplx IncomingDrive::operator()(double t) const {
  if (gaussian_) {
    const double x = t / gaussian_->duration;
    return gaussian_->amplitude * (std::numbers::sqrt2 / (v_ * gaussian_->duration)) * std::exp(-x * x);
  }
  const double ts[1] = {t};
  return fourier_at(table_, table_axis_, v_, FourierDirection::spectral_to_time, ts)[0];
}

cplx intracavity_amplitude(const RingSystem& sys, double kappa, cplx alpha) {
  const auto& p = sys.mode(Field::pump);
  return -I * std::conj(p.gamma) * alpha / (cplx(sys.rate(Field::pump).total, -kappa * p.v));
}

std::vector<cplx> intracavity_spectrum(const RingSystem& sys, const SpectralGrid& grid,
                                       std::span<const cplx> alpha) {
  if (alpha.size() != grid.size()) throw ShapeError("intracavity_spectrum: size mismatch");
  std::vector<cplx> out(grid.size());
  for (std::size_t k = 0; k < grid.size(); ++k) out[k] = intracavity_amplitude(sys, grid[k], alpha[k]);
  return out;
}

PumpField::PumpField(SpectralGrid grid, std::vector<cplx> spectrum, SpectrumFn evaluator,
                     double support, double v_pump)
    : grid_(grid),
      spectrum_(std::move(spectrum)),
      evaluator_(std::move(evaluator)),
      support_(support),
      v_pump_(v_pump) {
  if (spectrum_.size() != grid_.size()) throw ShapeError("PumpField: spectrum size mismatch");
}

const TimeGrid& PumpField::time_grid() const {
  if (!time_grid_) throw CoverageError("PumpField has no time envelope");
  return *time_grid_;
}

cplx PumpField::envelope_at(double t) const {
  return interpolate_uniform(envelope_, time_grid().axis(), t);
}

std::vector<double> PumpField::photon_number() const {
  std::vector<double> n(envelope_.size());
  std::transform(envelope_.begin(), envelope_.end(), n.begin(), [](cplx b) { return std::norm(b); });
  return n;
}

void PumpField::attach_envelope(TimeGrid grid, std::vector<cplx> envelope, double ode_error) {
  if (envelope.size() != grid.size()) throw ShapeError("PumpField: envelope size mismatch");
  time_grid_ = grid;
  envelope_ = std::move(envelope);
  ode_error_ = ode_error;
  double peak = 0.0;
  for (const auto& b : envelope_) peak = std::max(peak, std::abs(b));
  tail_truncated_ = peak > 0.0 && std::abs(envelope_.back()) > 1e-6 * peak;
}

PumpField intracavity_field(const RingSystem& sys, const PumpSpec& spec, const SpectralGrid& grid) {
  const double v = sys.mode(Field::pump).v;
  const auto alpha = incoming_spectrum(spec, v, grid);
  auto beta = intracavity_spectrum(sys, grid, alpha);
  auto eval = [sys, spec, v](double kappa) {
    return intracavity_amplitude(sys, kappa, spec.amplitude_at(kappa, v));
  };
  return PumpField(grid, std::move(beta), eval, spec.support(v), v);
}

PumpField pump_time_evolution(const RingSystem& sys, const PumpSpec& spec, const TimeGrid& time_grid,
                              const SpectralGrid& spectral_grid, const OdeOptions& options) {
  const auto& p = sys.mode(Field::pump);
  const double gbar = sys.rate(Field::pump).total;
  const double eta = sys.params().eta;
  const cplx gconj = std::conj(p.gamma);
  const IncomingDrive drive(spec, p.v);

  if (drive.peak() > 0.0 &&
      std::abs(drive(time_grid.t0())) > drive_start_threshold * drive.peak()) {
    throw CoverageError("pump_time_evolution: drive is not negligible at the start of the time grid");
  }

  auto rhs = [&](double t, cplx b) {
    return -(gbar + 2.0 * I * eta * std::norm(b)) * b - I * gconj * drive(t);
  };
  auto traj = ode_solve(rhs, time_grid, cplx{}, options);

  const auto kappas = spectral_grid.points();
  const auto axis = time_grid.axis();
  // trapezoid end correction: halve the end samples before the Riemann sum
  std::vector<cplx> weighted = traj.states;
  weighted.front() *= 0.5;
  weighted.back() *= 0.5;
  auto spectrum = fourier_at(weighted, axis, p.v, FourierDirection::time_to_spectral, kappas);

  auto shared = std::make_shared<const std::vector<cplx>>(std::move(weighted));
  const double v = p.v;
  auto eval = [shared, axis, v](double kappa) {
    const double k[1] = {kappa};
    return fourier_at(*shared, axis, v, FourierDirection::time_to_spectral, k)[0];
  };
  PumpField field(spectral_grid, std::move(spectrum), eval,
                  std::max(spectral_grid.half_width(), spec.support(p.v)), p.v);
  field.attach_envelope(time_grid, std::move(traj.states), traj.error_estimate);
  return field;
}

double default_spectral_half_width(const RingSystem& sys, const PumpSpec& spec) {
  const auto& s = sys.mode(Field::signal);
  const auto& i = sys.mode(Field::idler);
  double hw = std::max(8.0 * sys.rate(Field::signal).total / s.v, 8.0 * sys.rate(Field::idler).total / i.v);
  if (spec.is_gaussian()) {
    hw = std::max(hw, 8.0 / (sys.mode(Field::pump).v * spec.as_gaussian().duration));
  } else {
    hw = std::max(hw, spec.as_tabulated().axis.half_width());
  }
  return hw;
}

TimeGrid default_time_grid(const RingSystem& sys, const PumpSpec& spec, std::size_t n_points) {
  if (!spec.is_gaussian()) {
    throw InvalidParameter("default_time_grid: explicit time grid required for tabulated pumps");
  }
  const double sigma = spec.as_gaussian().duration;
  double gmin = sys.rate(Field::pump).total;
  gmin = std::min({gmin, sys.rate(Field::signal).total, sys.rate(Field::idler).total});
  return TimeGrid(-6.0 * sigma, 6.0 * sigma + 25.0 / gmin, n_points);
}

}  // namespace ringsfwm
