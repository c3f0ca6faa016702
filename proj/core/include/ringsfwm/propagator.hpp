#pragma once

// Linearised signal/idler envelope dynamics under a classical pump:
// drive matrix M(t), Green function G(t, t') with dG/dt = M G, G(t', t') = 1,
// and the time-domain pair amplitude assembled from the first column of G.

#include <Eigen/Dense>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "ringsfwm/core_model.hpp"
#include "ringsfwm/grid.hpp"
#include "ringsfwm/pump.hpp"

namespace ringsfwm {

using Mat2 = Eigen::Matrix2cd;
using Vec2 = Eigen::Vector2cd;

/// M(t) = [[-Gb_S - i zeta |b|^2,        -i lambda b^2 e^{i Delta t}],
///         [ i lambda^* b^*2 e^{-i Delta t}, -Gb_I + i zeta^* |b|^2]]
/// with b = beta_P(t).
class DriveMatrix {
public:
  using Envelope = std::function<cplx(double)>;

  /// envelope must be valid on [t_min, t_max]; outside, operator() throws CoverageError.
  DriveMatrix(const RingSystem& sys, Envelope envelope, double t_min, double t_max);

  Mat2 operator()(double t) const;
  cplx envelope(double t) const;
  double t_min() const noexcept { return t_min_; }
  double t_max() const noexcept { return t_max_; }

  /// M at every point of the axis.
  std::vector<Mat2> sample(const UniformAxis& axis) const;

private:
  double gbar_s_, gbar_i_, detuning_;
  cplx lambda_, zeta_;
  Envelope envelope_;
  double t_min_, t_max_;
};

/// Uses the pump's sampled time envelope (Lagrange-interpolated between
/// nodes, exact on them). Throws CoverageError if the pump has no envelope.
DriveMatrix build_drive_matrix(const RingSystem& sys, const PumpField& pump);

struct PropagatorOptions {
  std::size_t substeps = 1;     ///< RK4 steps per grid interval
  bool estimate_error = false;  ///< also solve at half step; fills error_estimate
  bool materialize = true;      ///< store every column G(., t_n)
};

/// G(t_m, t_n) for m >= n on a uniform time grid, stored as columns of fixed
/// source time. Immutable once built. Columns not materialised are
/// recomputed on request.
class PropagatorTable {
public:
  PropagatorTable(std::shared_ptr<const DriveMatrix> drive, TimeGrid grid, PropagatorOptions options);

  const TimeGrid& grid() const noexcept { return grid_; }
  const DriveMatrix& drive() const noexcept { return *drive_; }
  std::size_t substeps() const noexcept { return options_.substeps; }
  bool materialized() const noexcept { return !columns_.empty(); }
  /// max |G_h - G_{h/2}| / 15 over the table (0 if not estimated).
  double error_estimate() const noexcept { return error_estimate_; }

  /// G(t_m, t_n) for m = n .. N-1.
  std::vector<Mat2> column(std::size_t n) const;
  /// G(t_m, t_n), m >= n; ShapeError otherwise.
  Mat2 at(std::size_t m, std::size_t n) const;

  /// First column of G(t_m, t_n), (G11, G21), for m = n .. N-1, integrated
  /// with `stride` grid intervals per step (stride 2 = coarsened grid).
  std::vector<Vec2> first_column(std::size_t n, std::size_t stride = 1) const;

private:
  std::vector<Mat2> solve_column(std::size_t n, std::size_t substeps, const std::vector<Mat2>& table) const;

  std::shared_ptr<const DriveMatrix> drive_;
  TimeGrid grid_;
  PropagatorOptions options_;
  std::vector<Mat2> drive_samples_;  // M at spacing h / (2 substeps)
  std::vector<std::vector<Mat2>> columns_;
  double error_estimate_ = 0.0;
};

/// Integrates every column (in parallel) unless options.materialize is off.
/// Throws DivergenceError with the time stamp on non-finite values.
PropagatorTable solve_propagator(const DriveMatrix& drive, const TimeGrid& grid,
                                 const PropagatorOptions& options = {});

struct TimeDomainOptions {
  bool check_resolution = true;
  double resolution_tol = 1e-2;  ///< L2 disagreement with the coarsened time grid
};

struct TimeDomainDiagnostics {
  std::optional<double> resolution_deviation;
  double max_abs_g11 = 0.0;
  double max_abs_g21 = 0.0;
};

/// S(kappa, kappa') = <c_S(kappa) c_I(kappa')> for vacuum signal, idler and
/// phantom inputs, from
///   S = gamma_S gamma_I / (2 pi) int ds A(kappa, s) B(kappa', s),
///   A = e^{i kappa v_S s} - 2 Gb_S int_{t>s} dt e^{i kappa v_S t} G11(t, s),
///   B = int_{t'>s} dt' e^{i kappa' v_I t'} G21(t', s)^*.
/// Throws AccuracyError if the coarsened time grid disagrees by more than
/// options.resolution_tol (relative L2).
ComplexGrid pair_amplitude_time_domain(const RingSystem& sys, const PropagatorTable& table,
                                       const SpectralGrid& signal_axis, const SpectralGrid& idler_axis,
                                       const TimeDomainOptions& options = {},
                                       TimeDomainDiagnostics* diagnostics = nullptr);

struct TimeDomainRun {
  PumpField pump;
  ComplexGrid amplitude;
  TimeDomainDiagnostics diagnostics;
  double pump_ode_error = 0.0;
};

/// Pump ODE on the refined (half-step) grid, drive matrix, lazily evaluated
/// propagator and pair amplitude on the given axes.
TimeDomainRun run_time_domain(const RingSystem& sys, const PumpSpec& spec, const TimeGrid& time_grid,
                              const SpectralGrid& signal_axis, const SpectralGrid& idler_axis,
                              const TimeDomainOptions& options = {}, std::size_t substeps = 1);

}  // namespace ringsfwm
