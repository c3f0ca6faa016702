#pragma once

// Shared numerical kernels: adaptive quadrature, fixed-step RK4 with
// step-halving error control, uniform-grid Fourier transforms in the
// symmetric 1/sqrt(2 pi) convention, interpolation and SVD.

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <type_traits>
#include <vector>

#include "ringsfwm/errors.hpp"
#include "ringsfwm/grid.hpp"

namespace ringsfwm {

using cplx = std::complex<double>;

// ---------------------------------------------------------------- quadrature

template <typename T>
struct QuadResult {
  T value{};
  double error = 0.0;
};

inline constexpr int default_quad_depth = 18;

/// Globally adaptive Gauss-Kronrod (7/15) on [a, b]: the piece with the
/// largest error is bisected until the summed error is below tol * |value|.
/// Throws AccuracyError carrying the best estimate when a piece would need
/// more than max_depth bisections.
QuadResult<double> integrate_1d(const std::function<double(double)>& f, double a, double b,
                                double tol, int max_depth = default_quad_depth);
QuadResult<cplx> integrate_1d(const std::function<cplx(double)>& f, double a, double b,
                              double tol, int max_depth = default_quad_depth);

/// Picks the real or complex overload from the callable's return type.
template <typename F>
  requires(!std::is_same_v<std::remove_cvref_t<F>, std::function<double(double)>> &&
           !std::is_same_v<std::remove_cvref_t<F>, std::function<cplx(double)>>)
auto integrate_1d(F&& f, double a, double b, double tol, int max_depth = default_quad_depth) {
  using R = std::invoke_result_t<F&, double>;
  if constexpr (std::is_convertible_v<R, double>) {
    return integrate_1d(std::function<double(double)>(std::forward<F>(f)), a, b, tol, max_depth);
  } else {
    return integrate_1d(std::function<cplx(double)>(std::forward<F>(f)), a, b, tol, max_depth);
  }
}

/// Composite trapezoid weights for n uniformly spaced nodes.
std::vector<double> trapezoid_weights(std::size_t n, double step);

// ---------------------------------------------------------------------- ODEs

struct OdeOptions {
  std::size_t substeps = 1;      ///< RK4 steps per grid interval
  bool estimate_error = false;   ///< rerun at half step and compare
  double tol = 0.0;              ///< relative; 0 disables refinement
  int max_refinements = 0;       ///< substep doublings allowed to meet tol
};

template <typename State>
struct Trajectory {
  std::vector<double> times;
  std::vector<State> states;
  double error_estimate = 0.0;  ///< max |y_h - y_{h/2}| / 15, relative to max |y|
  std::size_t substeps = 1;
};

namespace detail {

template <typename State>
double state_norm(const State& y) {
  if constexpr (std::is_arithmetic_v<State>) {
    return std::abs(y);
  } else if constexpr (std::is_same_v<State, cplx>) {
    return std::abs(y);
  } else {
    return y.norm();
  }
}

template <typename State>
bool state_finite(const State& y) {
  if constexpr (std::is_arithmetic_v<State>) {
    return std::isfinite(y);
  } else if constexpr (std::is_same_v<State, cplx>) {
    return std::isfinite(y.real()) && std::isfinite(y.imag());
  } else {
    return y.allFinite();
  }
}

template <typename State, typename Rhs>
std::vector<State> rk4_on_grid(Rhs& rhs, const TimeGrid& grid, const State& y0,
                               std::size_t substeps) {
  std::vector<State> out;
  out.reserve(grid.size());
  out.push_back(y0);
  State y = y0;
  const double h = grid.step() / static_cast<double>(substeps);
  for (std::size_t k = 0; k + 1 < grid.size(); ++k) {
    const double tk = grid[k];
    for (std::size_t j = 0; j < substeps; ++j) {
      const double t = tk + static_cast<double>(j) * h;
      const State k1 = rhs(t, y);
      const State k2 = rhs(t + 0.5 * h, State(y + (0.5 * h) * k1));
      const State k3 = rhs(t + 0.5 * h, State(y + (0.5 * h) * k2));
      const State k4 = rhs(t + h, State(y + h * k3));
      y = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    if (!state_finite(y)) {
      throw DivergenceError("ode_solve: state became non-finite at t = " +
                                std::to_string(grid[k + 1]),
                            grid[k + 1]);
    }
    out.push_back(y);
  }
  return out;
}

}  // namespace detail

/// Classic RK4 sampled at every grid node. rhs(t, y) -> dy/dt.
template <typename State, typename Rhs>
Trajectory<State> ode_solve(Rhs&& rhs, const TimeGrid& grid, const State& y0,
                            const OdeOptions& opt = {}) {
  Trajectory<State> traj;
  traj.times.resize(grid.size());
  for (std::size_t k = 0; k < grid.size(); ++k) traj.times[k] = grid[k];

  std::size_t substeps = opt.substeps == 0 ? 1 : opt.substeps;
  if (!opt.estimate_error && opt.tol <= 0.0) {
    traj.states = detail::rk4_on_grid(rhs, grid, y0, substeps);
    traj.substeps = substeps;
    return traj;
  }

  auto coarse = detail::rk4_on_grid(rhs, grid, y0, substeps);
  for (int attempt = 0;; ++attempt) {
    auto fine = detail::rk4_on_grid(rhs, grid, y0, 2 * substeps);
    double diff = 0.0;
    double scale = 0.0;
    for (std::size_t k = 0; k < fine.size(); ++k) {
      diff = std::max(diff, detail::state_norm(State(fine[k] - coarse[k])));
      scale = std::max(scale, detail::state_norm(fine[k]));
    }
    const double err = (scale > 0.0 ? diff / scale : diff) / 15.0;
    traj.error_estimate = err;
    traj.substeps = 2 * substeps;
    traj.states = std::move(fine);
    if (opt.tol <= 0.0 || err <= opt.tol) break;
    if (attempt >= opt.max_refinements) {
      throw AccuracyError("ode_solve: step-halving error estimate above tolerance",
                          detail::state_norm(traj.states.back()), err);
    }
    coarse = traj.states;
    substeps *= 2;
  }
  return traj;
}

// ------------------------------------------------------------------ Fourier

/// time_to_spectral:  F(kappa) = v   * int dt     / sqrt(2 pi) f(t)     e^{+i kappa v t}
/// spectral_to_time:  f(t)     =       int dkappa / sqrt(2 pi) F(kappa) e^{-i kappa v t}
enum class FourierDirection { time_to_spectral, spectral_to_time };

struct FourierResult {
  std::vector<cplx> samples;
  UniformAxis axis;
  bool aliasing_warning = false;  ///< input edges above 1e-6 of the peak
};

inline constexpr double aliasing_threshold = 1e-6;

/// Discrete transform onto the conjugate grid (step 2 pi / (N h v)).
/// The output axis starts at output_start, or is centred (index N/2 at 0).
FourierResult fourier_pair(std::span<const cplx> samples, const UniformAxis& axis, double velocity,
                           FourierDirection direction,
                           std::optional<double> output_start = std::nullopt);

/// Same sums evaluated at arbitrary target points (direct O(N M) evaluation).
std::vector<cplx> fourier_at(std::span<const cplx> samples, const UniformAxis& axis,
                             double velocity, FourierDirection direction,
                             std::span<const double> targets);

/// True if either end of the samples exceeds threshold * max |sample|.
bool edges_not_decayed(std::span<const cplx> samples, double threshold = aliasing_threshold);

// ------------------------------------------------------------ interpolation

/// Local Lagrange interpolation of uniformly sampled data, `order` nodes
/// centred on x. Exact at the nodes. Throws CoverageError outside the axis.
cplx interpolate_uniform(std::span<const cplx> samples, const UniformAxis& axis, double x,
                         int order = 6);

/// Whittaker-Shannon reconstruction from uniform samples; zero outside.
cplx sinc_interpolate(std::span<const cplx> samples, const UniformAxis& axis, double x);

// ---------------------------------------------------------------------- SVD

struct SvdResult {
  Eigen::VectorXd singular_values;  ///< descending, non-negative
  Eigen::MatrixXcd left;            ///< columns are left singular vectors
  Eigen::MatrixXcd right;           ///< columns are right singular vectors
};

Eigen::MatrixXcd to_matrix(const ComplexGrid& g);

SvdResult svd_kernel(const ComplexGrid& kernel);
SvdResult svd_kernel(const Eigen::MatrixXcd& kernel);

}  // namespace ringsfwm
