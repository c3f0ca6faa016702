#pragma once

// Weak-pump (leading order in lambda) frequency-domain solution with
// eta = zeta = 0: pump-pair function, input-output response kernels for the
// physical and phantom output channels, pair amplitudes, JSI and the
// singles-to-coincidences ratio.
//
// Kernel naming: q_xy couples an output in channel x to the incoming
// physical-channel field y, p_xy to the incoming phantom field y. A "g"
// prefix marks kernels of the outgoing phantom (loss) field. Single-field
// kernels (q_ss, ...) multiply a Dirac delta and are stored as diagonals.

#include <optional>
#include <vector>

#include "ringsfwm/core_model.hpp"
#include "ringsfwm/grid.hpp"
#include "ringsfwm/numerics.hpp"
#include "ringsfwm/pump.hpp"

namespace ringsfwm {

inline constexpr double default_pair_tol = 1e-10;

/// F_S(kappa, kappa') on (signal, idler) axes.
struct PumpPairFunction {
  ComplexGrid samples;
  double detuning = 0.0;
  double v_pump = 0.0;
  double v_signal = 0.0;
  double v_idler = 0.0;

  /// F_I(kappa', kappa) = F_S(kappa, kappa') on (idler, signal) axes.
  ComplexGrid idler_view() const { return transposed(samples); }
};

/// (1 / (2 pi v_P)) int dk1 beta_P(k1) beta_P(K - k1), with
/// K = (kappa v_S + kappa' v_I + Delta) / v_P.
cplx pump_pair_value(const PumpField& pump, double total_kappa, double tol = default_pair_tol);

/// F_S at a single (kappa, kappa').
cplx pump_pair_value(const PumpField& pump, const RingSystem& sys, double kappa, double kappa_p,
                     double tol = default_pair_tol);

/// Samples F_S over the grid; each distinct kappa v_S + kappa' v_I is
/// integrated once. Throws CoverageError if beta_P has not decayed at the
/// edges of the pump's own spectral grid.
PumpPairFunction pump_pair_function(const PumpField& pump, const RingSystem& sys,
                                    const SpectralGrid& signal_axis, const SpectralGrid& idler_axis,
                                    double tol = default_pair_tol);

/// The four delta-diagonal factors of one resonance at one kappa.
struct DiagonalResponse {
  cplx channel_from_channel;  ///< q_JJ: c_J <- a_J
  cplx channel_from_phantom;  ///< p_JJ: c_J <- d_J
  cplx phantom_from_channel;  ///< g_J <- a_J
  cplx phantom_from_phantom;  ///< g_J <- d_J
};

DiagonalResponse diagonal_response(const RingSystem& sys, Field f, double kappa);

struct ResponseKernels {
  SpectralGrid signal_axis;
  SpectralGrid idler_axis;

  // outgoing physical channel, delta-diagonal
  std::vector<cplx> q_ss, p_ss, q_ii, p_ii;
  // outgoing phantom channel, delta-diagonal
  std::vector<cplx> qg_ss, pg_ss, qg_ii, pg_ii;

  // c_S <- a_I^dag, d_I^dag on (signal, idler)
  ComplexGrid q_si, p_si;
  // c_I <- a_S^dag, d_S^dag on (idler, signal)
  ComplexGrid q_is, p_is;
  // g_S <- a_I^dag, d_I^dag on (signal, idler)
  ComplexGrid qg_si, pg_si;
  // g_I <- a_S^dag, d_S^dag on (idler, signal)
  ComplexGrid qg_is, pg_is;
};

ResponseKernels response_kernels(const RingSystem& sys, const PumpPairFunction& f);

/// <c_S(kappa) c_I(kappa')> = q_ss(k) q_is(k', k) + p_ss(k) p_is(k', k).
ComplexGrid pair_amplitude(const ResponseKernels& k);
/// <c_S(kappa) g_I(kappa')>: signal detected, idler lost.
ComplexGrid lost_idler_amplitude(const ResponseKernels& k);
/// <g_S(kappa) c_I(kappa')>: idler detected, signal lost.
ComplexGrid lost_signal_amplitude(const ResponseKernels& k);

struct JointSpectrum {
  RealGrid jsi;         ///< |lambda|^2 |gamma_S|^2 |gamma_I|^2 |F_S|^2 / (Lorentzians)
  RealGrid normalized;  ///< peak = 1 (all zero if jsi is)
};

JointSpectrum jsi_closed_form(const RingSystem& sys, const PumpPairFunction& f);

RealGrid intensity(const ComplexGrid& amplitude);
RealGrid normalized(const RealGrid& g);

struct SchmidtResult {
  double K = 1.0;
  double purity = 1.0;
  std::vector<double> weights;  ///< sigma_n^2 / sum sigma^2, descending
  std::vector<cplx> signal_mode;
  std::vector<cplx> idler_mode;
};

/// Throws UndefinedAnalysis for an all-zero amplitude.
SchmidtResult schmidt_analysis(const ComplexGrid& amplitude);

struct JsiMoments {
  double diagonal = 0.0;      ///< second central moment along (x + y) / sqrt 2
  double antidiagonal = 0.0;  ///< along (x - y) / sqrt 2
  double elongation = 0.0;    ///< antidiagonal / diagonal
};

/// Moments of a JSI in angular-detuning coordinates x = kappa v_S, y = kappa' v_I.
JsiMoments jsi_moments(const RealGrid& jsi, double v_signal, double v_idler);

/// FWHM of the marginal of a JSI along one axis, rad/m; nullopt if the
/// marginal does not fall below half maximum inside the grid.
std::optional<double> marginal_fwhm(const RealGrid& jsi, Field axis);

struct ObservableOptions {
  double ratio_tol = 5e-3;        ///< |r - r_formula| / r_formula bound
  double resolution_tol = 1e-2;   ///< coincidences vs coarsened-grid estimate
  bool check_resolution = true;
  bool with_schmidt = true;
};

struct PairObservables {
  double coincidences = 0.0;
  double singles = 0.0;
  double singles_lost_idler = 0.0;
  double singles_lost_signal = 0.0;
  std::optional<double> ratio;  ///< undefined when no pairs are produced
  double ratio_formula = 0.0;
  std::optional<double> ratio_deviation;
  std::optional<double> schmidt_K;
  std::optional<double> purity;
  std::optional<double> fwhm_signal;  ///< rad/m
  std::optional<double> fwhm_idler;   ///< rad/m
  double resolution_deviation = 0.0;
};

/// Trapezoid integral of a real grid over both axes.
double integrate_grid(const RealGrid& g);

/// Throws AccuracyError on an under-resolved grid or when the numeric
/// ratio leaves the closed form by more than options.ratio_tol.
PairObservables observables(const ResponseKernels& kernels, const ComplexGrid& pair, const RingSystem& sys,
                            const ObservableOptions& options = {});

}  // namespace ringsfwm
