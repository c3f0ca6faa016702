#include "ringsfwm/numerics.hpp"

#include <fftw3.h>

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <limits>
#include <mutex>
#include <numbers>

namespace ringsfwm {

namespace {

constexpr double inv_sqrt_2pi = 0.3989422804014327;  // 1 / sqrt(2 pi)

template <typename T>
struct Piece {
  double a, b;
  T value;
  double error;
  double l1;
  int depth;
};

template <typename T>
Piece<T> gk15(const std::function<T(double)>& f, double a, double b, int depth) {
  double err = 0.0;
  double l1 = 0.0;
  const T value = boost::math::quadrature::gauss_kronrod<double, 15>::integrate(f, a, b, 0, 0.0, &err, &l1);
  // boost reports the error of the rule mapped to [-1, 1]
  err *= 0.5 * std::abs(b - a);
  // roundoff floor
  err = std::max(err, 50.0 * std::numeric_limits<double>::epsilon() * l1);
  return {a, b, value, err, l1, depth};
}

// Globally adaptive: always bisect the piece with the largest error.
template <typename T>
QuadResult<T> gk_integrate(const std::function<T(double)>& f, double a, double b, double tol,
                           int max_depth) {
  if (a == b) return {};
  auto worse = [](const Piece<T>& x, const Piece<T>& y) { return x.error < y.error; };
  std::vector<Piece<T>> heap{gk15(f, a, b, 0)};
  T value = heap.front().value;
  double err = heap.front().error;
  double l1 = heap.front().l1;
  for (;;) {
    if (!std::isfinite(std::abs(value)) || !std::isfinite(err)) {
      throw AccuracyError("integrate_1d: non-finite integrand", std::abs(value), err);
    }
    // relative to |value|, falling back to the L1 norm when the integral cancels
    const double scale = std::max(std::abs(value), 1e-3 * l1);
    if (err <= tol * scale) break;
    std::pop_heap(heap.begin(), heap.end(), worse);
    const Piece<T> worst = heap.back();
    heap.pop_back();
    if (worst.depth >= max_depth) {
      throw AccuracyError("integrate_1d: no convergence within the subdivision limit", std::abs(value), err);
    }
    const double mid = 0.5 * (worst.a + worst.b);
    for (auto piece : {gk15(f, worst.a, mid, worst.depth + 1), gk15(f, mid, worst.b, worst.depth + 1)}) {
      value += piece.value;
      err += piece.error;
      l1 += piece.l1;
      heap.push_back(piece);
      std::push_heap(heap.begin(), heap.end(), worse);
    }
    value -= worst.value;
    err = std::max(0.0, err - worst.error);
    l1 -= worst.l1;
  }
  return {value, err};
}

// FFTW planning is not thread-safe; execution with new-array interface is.
std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

}  // namespace

QuadResult<double> integrate_1d(const std::function<double(double)>& f, double a, double b,
                                double tol, int max_depth) {
  return gk_integrate<double>(f, a, b, tol, max_depth);
}

QuadResult<cplx> integrate_1d(const std::function<cplx(double)>& f, double a, double b,
                              double tol, int max_depth) {
  return gk_integrate<cplx>(f, a, b, tol, max_depth);
}

std::vector<double> trapezoid_weights(std::size_t n, double step) {
  std::vector<double> w(n, step);
  if (n == 1) {
    w[0] = 0.0;
  } else if (n > 1) {
    w.front() = 0.5 * step;
    w.back() = 0.5 * step;
  }
  return w;
}

bool edges_not_decayed(std::span<const cplx> samples, double threshold) {
  if (samples.empty()) return false;
  double peak = 0.0;
  for (const auto& s : samples) peak = std::max(peak, std::abs(s));
  if (peak == 0.0) return false;
  return std::abs(samples.front()) > threshold * peak || std::abs(samples.back()) > threshold * peak;
}

FourierResult fourier_pair(std::span<const cplx> samples, const UniformAxis& axis, double velocity,
                           FourierDirection direction, std::optional<double> output_start) {
  const std::size_t n = samples.size();
  if (n < 2 || axis.size != n) throw ShapeError("fourier_pair: samples and axis disagree");
  if (!(velocity > 0.0)) throw InvalidParameter("fourier_pair: velocity must be positive");

  const double sign = direction == FourierDirection::time_to_spectral ? 1.0 : -1.0;
  const double dx = axis.step;
  const double x0 = axis.start;
  const double dy = 2.0 * std::numbers::pi / (static_cast<double>(n) * dx * velocity);
  const double y0 = output_start.value_or(-static_cast<double>(n / 2) * dy);
  const double prefactor = direction == FourierDirection::time_to_spectral
                               ? velocity * dx * inv_sqrt_2pi
                               : dx * inv_sqrt_2pi;

  // sum_n f_n e^{i s v (x0 + n dx)(y0 + m dy)}
  //   = e^{i s v x0 (y0 + m dy)} sum_n [f_n e^{i s v n dx y0}] e^{i s 2 pi n m / N}
  std::vector<cplx> buffer(n);
  for (std::size_t k = 0; k < n; ++k) {
    buffer[k] = samples[k] * std::polar(1.0, sign * velocity * static_cast<double>(k) * dx * y0);
  }

  auto* data = reinterpret_cast<fftw_complex*>(buffer.data());
  fftw_plan plan;
  {
    std::lock_guard lock(fftw_planner_mutex());
    plan = fftw_plan_dft_1d(static_cast<int>(n), data, data,
                            sign > 0 ? FFTW_BACKWARD : FFTW_FORWARD, FFTW_ESTIMATE);
  }
  fftw_execute(plan);
  {
    std::lock_guard lock(fftw_planner_mutex());
    fftw_destroy_plan(plan);
  }

  FourierResult out;
  out.axis = {y0, dy, n};
  out.samples.resize(n);
  for (std::size_t m = 0; m < n; ++m) {
    const double y = y0 + static_cast<double>(m) * dy;
    out.samples[m] = prefactor * buffer[m] * std::polar(1.0, sign * velocity * x0 * y);
  }
  out.aliasing_warning = edges_not_decayed(samples);
  return out;
}

std::vector<cplx> fourier_at(std::span<const cplx> samples, const UniformAxis& axis,
                             double velocity, FourierDirection direction,
                             std::span<const double> targets) {
  if (axis.size != samples.size()) throw ShapeError("fourier_at: samples and axis disagree");
  const double sign = direction == FourierDirection::time_to_spectral ? 1.0 : -1.0;
  const double prefactor = direction == FourierDirection::time_to_spectral
                               ? velocity * axis.step * inv_sqrt_2pi
                               : axis.step * inv_sqrt_2pi;
  std::vector<cplx> out(targets.size());
  for (std::size_t m = 0; m < targets.size(); ++m) {
    const double y = targets[m];
    // phase recursion e^{i s v y (x0 + k dx)}
    const cplx step = std::polar(1.0, sign * velocity * y * axis.step);
    cplx phase = std::polar(1.0, sign * velocity * y * axis.start);
    cplx acc{};
    for (std::size_t k = 0; k < samples.size(); ++k) {
      acc += samples[k] * phase;
      phase *= step;
      if ((k & 255u) == 255u) {
        phase = std::polar(1.0, sign * velocity * y * axis[k + 1]);
      }
    }
    out[m] = prefactor * acc;
  }
  return out;
}

cplx interpolate_uniform(std::span<const cplx> samples, const UniformAxis& axis, double x,
                         int order) {
  const std::size_t n = samples.size();
  if (n == 0 || axis.size != n) throw ShapeError("interpolate_uniform: samples and axis disagree");
  const double pos = (x - axis.start) / axis.step;
  const double last = static_cast<double>(n - 1);
  const double slack = 1e-9;
  if (pos < -slack || pos > last + slack) {
    throw CoverageError("interpolate_uniform: point outside sampled range");
  }
  const double nearest = std::round(pos);
  if (std::abs(pos - nearest) < slack) {
    return samples[static_cast<std::size_t>(std::clamp(nearest, 0.0, last))];
  }
  const int m = std::min<int>(order, static_cast<int>(n));
  long first = static_cast<long>(std::floor(pos)) - (m / 2 - 1);
  first = std::clamp<long>(first, 0, static_cast<long>(n) - m);
  cplx acc{};
  for (int j = 0; j < m; ++j) {
    double weight = 1.0;
    const double xj = static_cast<double>(first + j);
    for (int k = 0; k < m; ++k) {
      if (k == j) continue;
      const double xk = static_cast<double>(first + k);
      weight *= (pos - xk) / (xj - xk);
    }
    acc += weight * samples[static_cast<std::size_t>(first + j)];
  }
  return acc;
}

cplx sinc_interpolate(std::span<const cplx> samples, const UniformAxis& axis, double x) {
  if (axis.size != samples.size()) throw ShapeError("sinc_interpolate: samples and axis disagree");
  const double pos = (x - axis.start) / axis.step;
  if (pos < -0.5 || pos > static_cast<double>(samples.size()) - 0.5) return {};
  cplx acc{};
  for (std::size_t k = 0; k < samples.size(); ++k) {
    const double d = pos - static_cast<double>(k);
    const double w = d == 0.0 ? 1.0 : std::sin(std::numbers::pi * d) / (std::numbers::pi * d);
    acc += w * samples[k];
  }
  return acc;
}

Eigen::MatrixXcd to_matrix(const ComplexGrid& g) {
  Eigen::MatrixXcd m(g.rows(), g.cols());
  for (std::size_t r = 0; r < g.rows(); ++r)
    for (std::size_t c = 0; c < g.cols(); ++c) m(r, c) = g(r, c);
  return m;
}

SvdResult svd_kernel(const Eigen::MatrixXcd& kernel) {
  if (!kernel.allFinite()) throw ShapeError("svd_kernel: non-finite kernel entry");
  Eigen::BDCSVD<Eigen::MatrixXcd> svd(kernel, Eigen::ComputeThinU | Eigen::ComputeThinV);
  return {svd.singularValues(), svd.matrixU(), svd.matrixV()};
}

SvdResult svd_kernel(const ComplexGrid& kernel) { return svd_kernel(to_matrix(kernel)); }

}  // namespace ringsfwm
