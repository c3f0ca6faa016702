#include "ringsfwm/perturbative.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <utility>

#include "ringsfwm/errors.hpp"
#include "ringsfwm/parallel.hpp"

namespace ringsfwm {

namespace {

constexpr cplx I{0.0, 1.0};

struct ModeView {
  double v;
  double coupling;
  double loss;
  double total;
  cplx gamma;
  cplx mu;  // effective, physical-channel convention
};

ModeView view(const RingSystem& sys, Field f) {
  const auto& m = sys.mode(f);
  const auto& r = sys.rate(f);
  return {m.v, r.coupling, r.loss, r.total, m.gamma, sys.effective_mu(f)};
}

// -i kappa v + Gamma_bar
cplx outgoing_pole(const ModeView& m, double kappa) { return {m.total, -kappa * m.v}; }
// +i kappa v + Gamma_bar
cplx conjugate_pole(const ModeView& m, double kappa) { return {m.total, kappa * m.v}; }

void require_same(const SpectralGrid& a, const SpectralGrid& b, const char* what) {
  if (!(a == b)) throw ShapeError(what);
}

}  // namespace

cplx pump_pair_value(const PumpField& pump, double total_kappa, double tol) {
  const double r = pump.support();
  const double lo = std::max(-r, total_kappa - r);
  const double hi = std::min(r, total_kappa + r);
  if (!(hi > lo)) return {};
  auto integrand = [&](double k1) { return pump.spectrum_at(k1) * pump.spectrum_at(total_kappa - k1); };
  const auto q = integrate_1d(std::function<cplx(double)>(integrand), lo, hi, tol);
  return q.value / (2.0 * std::numbers::pi * pump.v_pump());
}

cplx pump_pair_value(const PumpField& pump, const RingSystem& sys, double kappa, double kappa_p,
                     double tol) {
  const double s = kappa * sys.mode(Field::signal).v + kappa_p * sys.mode(Field::idler).v;
  return pump_pair_value(pump, (s + sys.detuning()) / sys.mode(Field::pump).v, tol);
}

PumpPairFunction pump_pair_function(const PumpField& pump, const RingSystem& sys,
                                    const SpectralGrid& signal_axis, const SpectralGrid& idler_axis,
                                    double tol) {
  if (edges_not_decayed(pump.spectrum())) {
    throw CoverageError("pump_pair_function: pump spectrum has not decayed at its grid edges");
  }
  const double vs = sys.mode(Field::signal).v;
  const double vi = sys.mode(Field::idler).v;
  const double vp = sys.mode(Field::pump).v;
  const std::size_t ns = signal_axis.size();
  const std::size_t ni = idler_axis.size();

  // F depends on (kappa, kappa') only through s = kappa v_S + kappa' v_I
  std::vector<std::pair<double, std::size_t>> keyed(ns * ni);
  double scale = 0.0;
  for (std::size_t a = 0; a < ns; ++a) {
    for (std::size_t b = 0; b < ni; ++b) {
      const double s = signal_axis[a] * vs + idler_axis[b] * vi;
      keyed[a * ni + b] = {s, a * ni + b};
      scale = std::max(scale, std::abs(s));
    }
  }
  std::sort(keyed.begin(), keyed.end());
  const double merge = 1e-12 * scale;
  std::vector<std::size_t> group_start;
  for (std::size_t k = 0; k < keyed.size(); ++k) {
    if (k == 0 || keyed[k].first - keyed[group_start.back()].first > merge) group_start.push_back(k);
  }

  std::vector<cplx> group_value(group_start.size());
  parallel_for(group_start.size(), [&](std::size_t g) {
    const double s = keyed[group_start[g]].first;
    group_value[g] = pump_pair_value(pump, (s + sys.detuning()) / vp, tol);
  });

  PumpPairFunction f;
  f.samples = ComplexGrid(signal_axis, idler_axis);
  auto values = f.samples.values();
  for (std::size_t g = 0; g < group_start.size(); ++g) {
    const std::size_t end = g + 1 < group_start.size() ? group_start[g + 1] : keyed.size();
    for (std::size_t k = group_start[g]; k < end; ++k) values[keyed[k].second] = group_value[g];
  }
  f.detuning = sys.detuning();
  f.v_pump = vp;
  f.v_signal = vs;
  f.v_idler = vi;
  return f;
}

DiagonalResponse diagonal_response(const RingSystem& sys, Field f, double kappa) {
  const auto m = view(sys, f);
  const cplx pole = outgoing_pole(m, kappa);
  DiagonalResponse d;
  d.channel_from_channel = cplx(-m.coupling + m.loss, -kappa * m.v) / pole;
  d.channel_from_phantom = (-m.gamma * std::conj(m.mu) / m.v) / pole;
  d.phantom_from_channel = (-m.mu * std::conj(m.gamma) / m.v) / pole;
  d.phantom_from_phantom = cplx(m.coupling - m.loss, -kappa * m.v) / pole;
  return d;
}

namespace {

// Kernel for output field `out` (into the physical channel if `phantom_out`
// is false) from the conjugate of the partner's incoming fields:
//   -i c_out lambda F / ((-i k v_out + Gb_out)(i k' v_in + Gb_in)) * c_in
// where c_out is gamma or mu of the output leg and c_in gamma or mu of the
// partner's input leg.
void fill_cross(ComplexGrid& q, ComplexGrid& p, const ComplexGrid& F, const ModeView& out,
                const ModeView& partner, cplx out_leg, cplx lambda) {
  const auto& rows = F.axis_signal();
  const auto& cols = F.axis_idler();
  q = ComplexGrid(rows, cols);
  p = ComplexGrid(rows, cols);
  for (std::size_t a = 0; a < rows.size(); ++a) {
    const cplx left = outgoing_pole(out, rows[a]);
    for (std::size_t b = 0; b < cols.size(); ++b) {
      const cplx common = -I * out_leg * lambda * F(a, b) / (left * conjugate_pole(partner, cols[b]));
      q(a, b) = common * partner.gamma;
      p(a, b) = common * partner.mu;
    }
  }
}

void fill_diagonal(const RingSystem& sys, Field f, const SpectralGrid& axis, std::vector<cplx>& q,
                   std::vector<cplx>& p, std::vector<cplx>& qg, std::vector<cplx>& pg) {
  const std::size_t n = axis.size();
  q.resize(n);
  p.resize(n);
  qg.resize(n);
  pg.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    const auto d = diagonal_response(sys, f, axis[k]);
    q[k] = d.channel_from_channel;
    p[k] = d.channel_from_phantom;
    qg[k] = d.phantom_from_channel;
    pg[k] = d.phantom_from_phantom;
  }
}

}  // namespace

ResponseKernels response_kernels(const RingSystem& sys, const PumpPairFunction& f) {
  const auto s = view(sys, Field::signal);
  const auto i = view(sys, Field::idler);
  const cplx lambda = sys.params().lambda;

  ResponseKernels k;
  k.signal_axis = f.samples.axis_signal();
  k.idler_axis = f.samples.axis_idler();
  fill_diagonal(sys, Field::signal, k.signal_axis, k.q_ss, k.p_ss, k.qg_ss, k.pg_ss);
  fill_diagonal(sys, Field::idler, k.idler_axis, k.q_ii, k.p_ii, k.qg_ii, k.pg_ii);

  const ComplexGrid fi = f.idler_view();
  fill_cross(k.q_si, k.p_si, f.samples, s, i, s.gamma, lambda);
  fill_cross(k.qg_si, k.pg_si, f.samples, s, i, s.mu, lambda);
  fill_cross(k.q_is, k.p_is, fi, i, s, i.gamma, lambda);
  fill_cross(k.qg_is, k.pg_is, fi, i, s, i.mu, lambda);
  return k;
}

namespace {

// <X_S(k) Y_I(k')> = x_from_a(k) y_is(k', k) + x_from_d(k) y_is_phantom(k', k)
ComplexGrid contract(const ResponseKernels& k, const std::vector<cplx>& from_channel,
                     const std::vector<cplx>& from_phantom, const ComplexGrid& partner_q,
                     const ComplexGrid& partner_p) {
  require_same(partner_q.axis_signal(), k.idler_axis, "pair amplitude: idler axis mismatch");
  require_same(partner_q.axis_idler(), k.signal_axis, "pair amplitude: signal axis mismatch");
  if (from_channel.size() != k.signal_axis.size()) throw ShapeError("pair amplitude: diagonal size mismatch");
  ComplexGrid out(k.signal_axis, k.idler_axis);
  for (std::size_t a = 0; a < out.rows(); ++a) {
    for (std::size_t b = 0; b < out.cols(); ++b) {
      out(a, b) = from_channel[a] * partner_q(b, a) + from_phantom[a] * partner_p(b, a);
    }
  }
  return out;
}

}  // namespace

ComplexGrid pair_amplitude(const ResponseKernels& k) { return contract(k, k.q_ss, k.p_ss, k.q_is, k.p_is); }

ComplexGrid lost_idler_amplitude(const ResponseKernels& k) {
  return contract(k, k.q_ss, k.p_ss, k.qg_is, k.pg_is);
}

ComplexGrid lost_signal_amplitude(const ResponseKernels& k) {
  return contract(k, k.qg_ss, k.pg_ss, k.q_is, k.p_is);
}

RealGrid intensity(const ComplexGrid& amplitude) {
  RealGrid out(amplitude.axis_signal(), amplitude.axis_idler());
  auto src = amplitude.values();
  auto dst = out.values();
  for (std::size_t k = 0; k < src.size(); ++k) dst[k] = std::norm(src[k]);
  return out;
}

RealGrid normalized(const RealGrid& g) {
  RealGrid out = g;
  double peak = 0.0;
  for (double x : g.values()) peak = std::max(peak, x);
  if (peak > 0.0) {
    for (double& x : out.values()) x /= peak;
  }
  return out;
}

JointSpectrum jsi_closed_form(const RingSystem& sys, const PumpPairFunction& f) {
  const auto s = view(sys, Field::signal);
  const auto i = view(sys, Field::idler);
  const double prefactor = std::norm(sys.params().lambda) * std::norm(s.gamma) * std::norm(i.gamma);
  const auto& rows = f.samples.axis_signal();
  const auto& cols = f.samples.axis_idler();
  RealGrid phi(rows, cols);
  for (std::size_t a = 0; a < rows.size(); ++a) {
    const double xs = rows[a] * s.v;
    for (std::size_t b = 0; b < cols.size(); ++b) {
      const double xi = cols[b] * i.v;
      phi(a, b) = prefactor * std::norm(f.samples(a, b)) /
                  ((xs * xs + s.total * s.total) * (xi * xi + i.total * i.total));
    }
  }
  return {phi, normalized(phi)};
}

SchmidtResult schmidt_analysis(const ComplexGrid& amplitude) {
  Eigen::MatrixXcd m = to_matrix(amplitude);
  const double norm = m.norm();
  if (!(norm > 0.0)) throw UndefinedAnalysis("schmidt_analysis: pair amplitude is identically zero");
  m /= norm;
  const auto svd = svd_kernel(m);
  SchmidtResult out;
  const auto& sv = svd.singular_values;
  double total = 0.0;
  for (Eigen::Index n = 0; n < sv.size(); ++n) total += sv[n] * sv[n];
  double sum4 = 0.0;
  out.weights.resize(static_cast<std::size_t>(sv.size()));
  for (Eigen::Index n = 0; n < sv.size(); ++n) {
    const double w = sv[n] * sv[n] / total;
    out.weights[static_cast<std::size_t>(n)] = w;
    sum4 += w * w;
  }
  out.K = 1.0 / sum4;
  out.purity = sum4;
  out.signal_mode.assign(svd.left.col(0).data(), svd.left.col(0).data() + svd.left.rows());
  out.idler_mode.resize(static_cast<std::size_t>(svd.right.rows()));
  for (Eigen::Index r = 0; r < svd.right.rows(); ++r) {
    out.idler_mode[static_cast<std::size_t>(r)] = std::conj(svd.right(r, 0));
  }
  return out;
}

JsiMoments jsi_moments(const RealGrid& jsi, double v_signal, double v_idler) {
  const auto& rows = jsi.axis_signal();
  const auto& cols = jsi.axis_idler();
  double w = 0.0, mx = 0.0, my = 0.0;
  for (std::size_t a = 0; a < rows.size(); ++a)
    for (std::size_t b = 0; b < cols.size(); ++b) {
      const double p = jsi(a, b);
      w += p;
      mx += p * rows[a] * v_signal;
      my += p * cols[b] * v_idler;
    }
  if (!(w > 0.0)) throw UndefinedAnalysis("jsi_moments: zero JSI");
  mx /= w;
  my /= w;
  double dd = 0.0, aa = 0.0;
  for (std::size_t a = 0; a < rows.size(); ++a)
    for (std::size_t b = 0; b < cols.size(); ++b) {
      const double x = rows[a] * v_signal - mx;
      const double y = cols[b] * v_idler - my;
      const double d = (x + y) / std::numbers::sqrt2;
      const double e = (x - y) / std::numbers::sqrt2;
      dd += jsi(a, b) * d * d;
      aa += jsi(a, b) * e * e;
    }
  return {dd / w, aa / w, aa / dd};
}

std::optional<double> marginal_fwhm(const RealGrid& jsi, Field axis) {
  const bool along_signal = axis == Field::signal;
  const SpectralGrid& grid = along_signal ? jsi.axis_signal() : jsi.axis_idler();
  const std::size_t n = grid.size();
  std::vector<double> m(n, 0.0);
  for (std::size_t a = 0; a < jsi.rows(); ++a)
    for (std::size_t b = 0; b < jsi.cols(); ++b) m[along_signal ? a : b] += jsi(a, b);
  const auto peak_it = std::max_element(m.begin(), m.end());
  if (*peak_it <= 0.0) return std::nullopt;
  const double half = 0.5 * *peak_it;
  if (m.front() >= half || m.back() >= half) return std::nullopt;
  std::size_t lo = 0;
  while (m[lo + 1] < half) ++lo;
  std::size_t hi = n - 1;
  while (m[hi - 1] < half) --hi;
  const double x_lo = grid[lo] + (half - m[lo]) / (m[lo + 1] - m[lo]) * grid.spacing();
  const double x_hi = grid[hi] - (half - m[hi]) / (m[hi - 1] - m[hi]) * grid.spacing();
  return x_hi - x_lo;
}

double integrate_grid(const RealGrid& g) {
  const auto wr = trapezoid_weights(g.rows(), g.axis_signal().spacing());
  const auto wc = trapezoid_weights(g.cols(), g.axis_idler().spacing());
  double total = 0.0;
  for (std::size_t a = 0; a < g.rows(); ++a) {
    double row = 0.0;
    for (std::size_t b = 0; b < g.cols(); ++b) row += wc[b] * g(a, b);
    total += wr[a] * row;
  }
  return total;
}

namespace {

// Trapezoid over every other node in both directions.
double integrate_coarse(const RealGrid& g) {
  const std::size_t nr = (g.rows() + 1) / 2;
  const std::size_t nc = (g.cols() + 1) / 2;
  const auto wr = trapezoid_weights(nr, 2.0 * g.axis_signal().spacing());
  const auto wc = trapezoid_weights(nc, 2.0 * g.axis_idler().spacing());
  double total = 0.0;
  for (std::size_t a = 0; a < nr; ++a) {
    double row = 0.0;
    for (std::size_t b = 0; b < nc; ++b) row += wc[b] * g(2 * a, 2 * b);
    total += wr[a] * row;
  }
  return total;
}

}  // namespace

PairObservables observables(const ResponseKernels& kernels, const ComplexGrid& pair, const RingSystem& sys,
                            const ObservableOptions& options) {
  if (!pair.same_axes(kernels.signal_axis, kernels.idler_axis)) {
    throw ShapeError("observables: pair amplitude and kernels are on different grids");
  }
  require_finite(pair, "observables");
  const RealGrid coinc = intensity(pair);
  const RealGrid lost_i = intensity(lost_idler_amplitude(kernels));
  const RealGrid lost_s = intensity(lost_signal_amplitude(kernels));

  PairObservables out;
  out.coincidences = integrate_grid(coinc);
  out.singles_lost_idler = integrate_grid(lost_i);
  out.singles_lost_signal = integrate_grid(lost_s);
  out.singles = out.singles_lost_idler + out.singles_lost_signal;
  out.ratio_formula = sys.closed_form_singles_ratio();

  if (!(out.coincidences > 0.0)) return out;  // no pairs: numeric ratio undefined

  if (options.check_resolution) {
    const double coarse = integrate_coarse(coinc);
    out.resolution_deviation = std::abs(coarse - out.coincidences) / out.coincidences;
    if (out.resolution_deviation > options.resolution_tol) {
      throw AccuracyError("observables: spectral grid under-resolved (coarsened-grid coincidences differ by " +
                              std::to_string(out.resolution_deviation) + ")",
                          out.coincidences, out.resolution_deviation);
    }
  }

  const double r = out.singles / out.coincidences;
  out.ratio = r;
  if (std::isfinite(out.ratio_formula)) {
    const double dev = out.ratio_formula > 0.0 ? std::abs(r - out.ratio_formula) / out.ratio_formula
                                               : std::abs(r);
    out.ratio_deviation = dev;
    if (dev > options.ratio_tol) {
      throw AccuracyError("observables: numeric singles ratio disagrees with the closed form", r, dev);
    }
  }

  if (options.with_schmidt) {
    const auto schmidt = schmidt_analysis(pair);
    out.schmidt_K = schmidt.K;
    out.purity = schmidt.purity;
  }
  out.fwhm_signal = marginal_fwhm(coinc, Field::signal);
  out.fwhm_idler = marginal_fwhm(coinc, Field::idler);
  return out;
}

}  // namespace ringsfwm
