#include "ringsfwm/propagator.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "ringsfwm/errors.hpp"
#include "ringsfwm/numerics.hpp"
#include "ringsfwm/parallel.hpp"

namespace ringsfwm {

namespace {

constexpr cplx I{0.0, 1.0};

// Drive samples at spacing h / (2 substeps), so every RK4 stage time of a
// step of `stride` grid intervals is a table node.
std::vector<Mat2> drive_samples(const DriveMatrix& drive, const TimeGrid& grid, std::size_t substeps) {
  const std::size_t density = 2 * substeps;
  const std::size_t n = (grid.size() - 1) * density + 1;
  const double step = grid.step() / static_cast<double>(density);
  return drive.sample({grid.t0(), step, n});
}

bool finite(const Mat2& m) { return m.allFinite(); }
bool finite(const Vec2& v) { return v.allFinite(); }

// RK4 from node n with `stride` grid intervals per step.
template <typename State>
std::vector<State> integrate(const TimeGrid& grid, const std::vector<Mat2>& table, std::size_t substeps,
                             std::size_t n, const State& start, std::size_t stride) {
  const std::size_t density = 2 * substeps;
  const double h = static_cast<double>(stride) * grid.step() / static_cast<double>(substeps);
  std::vector<State> out;
  out.reserve((grid.size() - 1 - n) / stride + 1);
  State y = start;
  out.push_back(y);
  for (std::size_t m = n; m + stride < grid.size(); m += stride) {
    std::size_t base = m * density;
    for (std::size_t j = 0; j < substeps; ++j) {
      const Mat2& m0 = table[base];
      const Mat2& m1 = table[base + stride];
      const Mat2& m2 = table[base + 2 * stride];
      const State k1 = m0 * y;
      const State k2 = m1 * (y + (0.5 * h) * k1);
      const State k3 = m1 * (y + (0.5 * h) * k2);
      const State k4 = m2 * (y + h * k3);
      y += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
      base += 2 * stride;
    }
    if (!finite(y)) {
      throw DivergenceError("propagator: non-finite Green function at t = " + std::to_string(grid[m + stride]),
                            grid[m + stride]);
    }
    out.push_back(y);
  }
  return out;
}

}  // namespace

DriveMatrix::DriveMatrix(const RingSystem& sys, Envelope envelope, double t_min, double t_max)
    : gbar_s_(sys.rate(Field::signal).total),
      gbar_i_(sys.rate(Field::idler).total),
      detuning_(sys.detuning()),
      lambda_(sys.params().lambda),
      zeta_(sys.params().zeta),
      envelope_(std::move(envelope)),
      t_min_(t_min),
      t_max_(t_max) {
  if (!(t_max > t_min)) throw InvalidParameter("DriveMatrix: empty time span");
}

cplx DriveMatrix::envelope(double t) const {
  const double slack = 1e-12 * (t_max_ - t_min_);
  if (t < t_min_ - slack || t > t_max_ + slack) {
    throw CoverageError("DriveMatrix: time " + std::to_string(t) + " outside pump coverage");
  }
  return envelope_(std::clamp(t, t_min_, t_max_));
}

Mat2 DriveMatrix::operator()(double t) const {
  const cplx b = envelope(t);
  const double n = std::norm(b);
  const cplx rot = std::polar(1.0, detuning_ * t);
  Mat2 m;
  m(0, 0) = -gbar_s_ - I * zeta_ * n;
  m(0, 1) = -I * lambda_ * b * b * rot;
  m(1, 0) = I * std::conj(lambda_) * std::conj(b * b) * std::conj(rot);
  m(1, 1) = -gbar_i_ + I * std::conj(zeta_) * n;
  return m;
}

std::vector<Mat2> DriveMatrix::sample(const UniformAxis& axis) const {
  std::vector<Mat2> out(axis.size);
  for (std::size_t k = 0; k < axis.size; ++k) out[k] = (*this)(axis[k]);
  return out;
}

DriveMatrix build_drive_matrix(const RingSystem& sys, const PumpField& pump) {
  if (!pump.has_envelope()) throw CoverageError("build_drive_matrix: pump has no time envelope");
  const TimeGrid tg = pump.time_grid();
  auto samples = std::make_shared<const std::vector<cplx>>(pump.envelope().begin(), pump.envelope().end());
  const UniformAxis axis = tg.axis();
  auto env = [samples, axis](double t) { return interpolate_uniform(*samples, axis, t); };
  return DriveMatrix(sys, env, tg.t0(), tg.t1());
}

PropagatorTable::PropagatorTable(std::shared_ptr<const DriveMatrix> drive, TimeGrid grid,
                                 PropagatorOptions options)
    : drive_(std::move(drive)), grid_(grid), options_(options) {
  if (options_.substeps == 0) options_.substeps = 1;
  if (grid_.t0() < drive_->t_min() || grid_.t1() > drive_->t_max()) {
    throw CoverageError("solve_propagator: time grid extends beyond the pump coverage");
  }
  drive_samples_ = drive_samples(*drive_, grid_, options_.substeps);

  const std::size_t n = grid_.size();
  if (options_.materialize) {
    columns_.resize(n);
    parallel_for(n, [&](std::size_t k) { columns_[k] = solve_column(k, options_.substeps, drive_samples_); });
  }
  if (options_.estimate_error) {
    const std::size_t fine_sub = 2 * options_.substeps;
    const auto fine_table = drive_samples(*drive_, grid_, fine_sub);
    std::vector<double> diff(n, 0.0), scale(n, 0.0);
    parallel_for(n, [&](std::size_t k) {
      const auto coarse = materialized() ? columns_[k] : solve_column(k, options_.substeps, drive_samples_);
      const auto fine = solve_column(k, fine_sub, fine_table);
      for (std::size_t m = 0; m < fine.size(); ++m) {
        diff[k] = std::max(diff[k], (fine[m] - coarse[m]).cwiseAbs().maxCoeff());
        scale[k] = std::max(scale[k], fine[m].cwiseAbs().maxCoeff());
      }
    });
    const double d = *std::max_element(diff.begin(), diff.end());
    const double s = *std::max_element(scale.begin(), scale.end());
    error_estimate_ = (s > 0.0 ? d / s : d) / 15.0;
  }
}

std::vector<Mat2> PropagatorTable::solve_column(std::size_t n, std::size_t substeps,
                                                const std::vector<Mat2>& table) const {
  return integrate<Mat2>(grid_, table, substeps, n, Mat2::Identity(), 1);
}

std::vector<Mat2> PropagatorTable::column(std::size_t n) const {
  if (n >= grid_.size()) throw ShapeError("PropagatorTable: source index out of range");
  if (materialized()) return columns_[n];
  return solve_column(n, options_.substeps, drive_samples_);
}

Mat2 PropagatorTable::at(std::size_t m, std::size_t n) const {
  if (m < n || m >= grid_.size()) throw ShapeError("PropagatorTable: requires t_m >= t_n on the grid");
  if (materialized()) return columns_[n][m - n];
  return column(n)[m - n];
}

std::vector<Vec2> PropagatorTable::first_column(std::size_t n, std::size_t stride) const {
  if (n >= grid_.size()) throw ShapeError("PropagatorTable: source index out of range");
  if (stride == 1 && materialized()) {
    std::vector<Vec2> out;
    out.reserve(columns_[n].size());
    for (const auto& g : columns_[n]) out.push_back(g.col(0));
    return out;
  }
  return integrate<Vec2>(grid_, drive_samples_, options_.substeps, n, Vec2(1.0, 0.0), stride);
}

PropagatorTable solve_propagator(const DriveMatrix& drive, const TimeGrid& grid, const PropagatorOptions& options) {
  return PropagatorTable(std::make_shared<const DriveMatrix>(drive), grid, options);
}

namespace {

struct Assembly {
  Eigen::MatrixXcd amplitude;
  double max_g11 = 0.0;
  double max_g21 = 0.0;
};

// Source times are grid nodes 0, stride, 2 stride, ...
Assembly assemble(const RingSystem& sys, const PropagatorTable& table, const SpectralGrid& signal_axis,
                  const SpectralGrid& idler_axis, std::size_t stride) {
  const TimeGrid& grid = table.grid();
  const std::size_t nodes = (grid.size() - 1) / stride + 1;
  const double h = grid.step() * static_cast<double>(stride);
  const double vs = sys.mode(Field::signal).v;
  const double vi = sys.mode(Field::idler).v;
  const double gbar_s = sys.rate(Field::signal).total;
  const auto ns = static_cast<Eigen::Index>(signal_axis.size());
  const auto ni = static_cast<Eigen::Index>(idler_axis.size());
  const auto nt = static_cast<Eigen::Index>(nodes);

  Eigen::MatrixXcd es(ns, nt), ei(ni, nt);
  for (Eigen::Index m = 0; m < nt; ++m) {
    const double t = grid[static_cast<std::size_t>(m) * stride];
    for (Eigen::Index k = 0; k < ns; ++k) es(k, m) = std::polar(1.0, signal_axis[static_cast<std::size_t>(k)] * vs * t);
    for (Eigen::Index k = 0; k < ni; ++k) ei(k, m) = std::polar(1.0, idler_axis[static_cast<std::size_t>(k)] * vi * t);
  }

  Eigen::MatrixXcd a(ns, nt), b(ni, nt);
  std::vector<double> peak11(nodes, 0.0), peak21(nodes, 0.0);
  parallel_for(nodes, [&](std::size_t q) {
    const auto col = table.first_column(q * stride, stride);
    const auto len = static_cast<Eigen::Index>(col.size());
    const auto w = trapezoid_weights(col.size(), h);
    Eigen::VectorXcd g11(len), g21(len);
    for (Eigen::Index m = 0; m < len; ++m) {
      const auto& g = col[static_cast<std::size_t>(m)];
      peak11[q] = std::max(peak11[q], std::abs(g(0)));
      peak21[q] = std::max(peak21[q], std::abs(g(1)));
      g11(m) = w[static_cast<std::size_t>(m)] * g(0);
      g21(m) = w[static_cast<std::size_t>(m)] * std::conj(g(1));
    }
    const auto start = static_cast<Eigen::Index>(q);
    a.col(start) = es.col(start) - 2.0 * gbar_s * (es.middleCols(start, len) * g11);
    b.col(start) = ei.middleCols(start, len) * g21;
  });

  const auto wo = trapezoid_weights(nodes, h);
  for (Eigen::Index m = 0; m < nt; ++m) a.col(m) *= wo[static_cast<std::size_t>(m)];
  const cplx prefactor = sys.mode(Field::signal).gamma * sys.mode(Field::idler).gamma / (2.0 * std::numbers::pi);

  Assembly out;
  out.amplitude = prefactor * (a * b.transpose());
  out.max_g11 = *std::max_element(peak11.begin(), peak11.end());
  out.max_g21 = *std::max_element(peak21.begin(), peak21.end());
  return out;
}

}  // namespace

ComplexGrid pair_amplitude_time_domain(const RingSystem& sys, const PropagatorTable& table,
                                       const SpectralGrid& signal_axis, const SpectralGrid& idler_axis,
                                       const TimeDomainOptions& options, TimeDomainDiagnostics* diagnostics) {
  const auto fine = assemble(sys, table, signal_axis, idler_axis, 1);
  ComplexGrid out(signal_axis, idler_axis);
  for (std::size_t r = 0; r < out.rows(); ++r)
    for (std::size_t c = 0; c < out.cols(); ++c)
      out(r, c) = fine.amplitude(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
  require_finite(out, "pair_amplitude_time_domain");

  TimeDomainDiagnostics diag;
  diag.max_abs_g11 = fine.max_g11;
  diag.max_abs_g21 = fine.max_g21;
  if (options.check_resolution && table.grid().size() >= 5) {
    const auto coarse = assemble(sys, table, signal_axis, idler_axis, 2);
    const double norm = fine.amplitude.norm();
    if (norm > 0.0) {
      const double dev = (coarse.amplitude - fine.amplitude).norm() / norm;
      diag.resolution_deviation = dev;
      if (dev > options.resolution_tol) {
        if (diagnostics) *diagnostics = diag;
        throw AccuracyError("pair_amplitude_time_domain: time grid under-resolved (coarsened grid differs by " +
                                std::to_string(dev) + ")",
                            norm, dev);
      }
    }
  }
  if (diagnostics) *diagnostics = diag;
  return out;
}

TimeDomainRun run_time_domain(const RingSystem& sys, const PumpSpec& spec, const TimeGrid& time_grid,
                              const SpectralGrid& signal_axis, const SpectralGrid& idler_axis,
                              const TimeDomainOptions& options, std::size_t substeps) {
  // half-step pump samples: every RK4 stage of the propagator lands on a node
  const TimeGrid pump_grid = substeps <= 1 ? time_grid.refined()
                                           : TimeGrid(time_grid.t0(), time_grid.t1(),
                                                      (time_grid.size() - 1) * 2 * substeps + 1);
  const double v = sys.mode(Field::pump).v;
  const SpectralGrid pump_axis(spec.support(v), 257);
  PumpField pump = pump_time_evolution(sys, spec, pump_grid, pump_axis);
  auto drive = std::make_shared<const DriveMatrix>(build_drive_matrix(sys, pump));
  PropagatorOptions popt;
  popt.substeps = substeps;
  popt.materialize = false;
  const PropagatorTable table(drive, time_grid, popt);
  TimeDomainDiagnostics diag;
  auto amplitude = pair_amplitude_time_domain(sys, table, signal_axis, idler_axis, options, &diag);
  const double err = pump.ode_error_estimate();
  return {std::move(pump), std::move(amplitude), diag, err};
}

}  // namespace ringsfwm
