#include "ringsfwm/core_model.hpp"

#include <cmath>
#include <string>

#include "ringsfwm/errors.hpp"

namespace ringsfwm {

const char* to_string(Field f) noexcept {
  switch (f) {
    case Field::pump:
      return "pump";
    case Field::signal:
      return "signal";
    case Field::idler:
      return "idler";
  }
  return "?";
}

ModeParams ModeParams::from_rates(double omega, double v, double u, double coupling_rate,
                                  double loss_rate, double gamma_phase, double mu_phase) {
  if (!(v > 0.0) || !(u > 0.0)) {
    throw InvalidParameter("group speeds must be strictly positive");
  }
  if (coupling_rate < 0.0 || loss_rate < 0.0) {
    throw InvalidParameter("damping rates must be non-negative");
  }
  ModeParams m;
  m.omega = omega;
  m.v = v;
  m.u = u;
  m.gamma = std::polar(std::sqrt(2.0 * coupling_rate * v), gamma_phase);
  m.mu = std::polar(std::sqrt(2.0 * loss_rate * u), mu_phase);
  return m;
}

const ModeParams& RingParams::mode(Field f) const noexcept {
  switch (f) {
    case Field::pump:
      return pump;
    case Field::signal:
      return signal;
    case Field::idler:
      break;
  }
  return idler;
}

ModeParams& RingParams::mode(Field f) noexcept {
  return const_cast<ModeParams&>(static_cast<const RingParams&>(*this).mode(f));
}

const ModeRates& DerivedRates::mode(Field f) const noexcept {
  switch (f) {
    case Field::pump:
      return pump;
    case Field::signal:
      return signal;
    case Field::idler:
      break;
  }
  return idler;
}

namespace {

bool finite(cplx z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); }

ModeRates rates_for(const ModeParams& m, Field f, double rel_tol) {
  const std::string name = to_string(f);
  if (!(m.v > 0.0) || !std::isfinite(m.v)) {
    throw InvalidParameter(name + ": channel speed v must be strictly positive");
  }
  if (!(m.u > 0.0) || !std::isfinite(m.u)) {
    throw InvalidParameter(name + ": phantom speed u must be strictly positive");
  }
  if (!finite(m.gamma) || !finite(m.mu) || !std::isfinite(m.omega)) {
    throw InvalidParameter(name + ": non-finite mode parameter");
  }
  ModeRates r;
  r.coupling = std::norm(m.gamma) / (2.0 * m.v);
  r.loss = std::norm(m.mu) / (2.0 * m.u);
  r.total = r.coupling + r.loss;
  if (!(r.total > 0.0)) {
    throw InvalidParameter(name + ": total damping rate must be positive");
  }
  r.critically_coupled = std::abs(r.coupling - r.loss) <= rel_tol * r.total;
  return r;
}

}  // namespace

DerivedRates derive_rates(const RingParams& params, double rel_tol) {
  DerivedRates out;
  out.pump = rates_for(params.pump, Field::pump, rel_tol);
  out.signal = rates_for(params.signal, Field::signal, rel_tol);
  out.idler = rates_for(params.idler, Field::idler, rel_tol);
  return out;
}

double detuning(const RingParams& params) noexcept {
  return params.signal.omega + params.idler.omega - 2.0 * params.pump.omega;
}

RingSystem::RingSystem(RingParams params, double critical_tol)
    : params_(params), rates_(derive_rates(params, critical_tol)), detuning_(ringsfwm::detuning(params)),
      critical_tol_(critical_tol) {
  if (!finite(params_.lambda) || !std::isfinite(params_.eta) || !finite(params_.zeta)) {
    throw InvalidParameter("non-finite nonlinear coefficient");
  }
  if (!std::isfinite(detuning_)) {
    throw InvalidParameter("detuning is not finite");
  }
}

cplx RingSystem::effective_mu(Field f) const noexcept {
  const auto& m = mode(f);
  return m.mu * std::sqrt(m.v / m.u);
}

double RingSystem::closed_form_singles_ratio() const noexcept {
  const auto& s = rates_.signal;
  const auto& i = rates_.idler;
  return (s.coupling * i.loss + i.coupling * s.loss) / (s.coupling * i.coupling);
}

RingSystem RingSystem::with_nonlinearity(cplx lambda, double eta, cplx zeta) const {
  RingParams p = params_;
  p.lambda = lambda;
  p.eta = eta;
  p.zeta = zeta;
  return RingSystem(p, critical_tol_);
}

NonlinearCouplings estimate_nonlinear_couplings(const MaterialEstimate& m) {
  if (!(m.n > 0.0)) throw InvalidParameter("refractive index must be positive");
  if (!(m.mode_volume > 0.0)) throw InvalidParameter("mode volume must be positive");
  const double n4 = m.n * m.n * m.n * m.n;
  // hbar lambda = 3 (hbar w)^2 chi3 / (4 eps0 n^4 V)  =>  one hbar cancels
  const double lambda = 3.0 * constants::hbar * m.omega_pump * m.omega_pump * m.chi3 /
                        (4.0 * constants::epsilon0 * n4 * m.mode_volume);
  return {lambda, 0.5 * lambda, 2.0 * lambda};
}

}  // namespace ringsfwm
