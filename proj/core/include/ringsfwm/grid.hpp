#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include "ringsfwm/errors.hpp"

namespace ringsfwm {

/// x_k = start + k * step, k = 0 .. size-1.
struct UniformAxis {
  double start = 0.0;
  double step = 1.0;
  std::size_t size = 0;

  double operator[](std::size_t k) const noexcept { return start + static_cast<double>(k) * step; }
  double back() const noexcept { return (*this)[size - 1]; }
  std::vector<double> points() const;
};

/// Wavevector-offset axis, uniformly sampled and symmetric about zero,
/// endpoints included: kappa_k = -half_width + k * 2 half_width / (n-1).
class SpectralGrid {
public:
  SpectralGrid() = default;
  SpectralGrid(double half_width, std::size_t n_points);

  double half_width() const noexcept { return half_width_; }
  std::size_t size() const noexcept { return n_; }
  double spacing() const noexcept { return 2.0 * half_width_ / static_cast<double>(n_ - 1); }
  double operator[](std::size_t k) const noexcept {
    return -half_width_ + static_cast<double>(k) * spacing();
  }
  UniformAxis axis() const noexcept { return {-half_width_, spacing(), n_}; }
  std::vector<double> points() const { return axis().points(); }

  /// Grid with every other point, same span when n is odd.
  SpectralGrid coarsened() const;

  friend bool operator==(const SpectralGrid&, const SpectralGrid&) = default;

private:
  double half_width_ = 1.0;
  std::size_t n_ = 8;
};

/// t_k = t0 + k (t1 - t0) / (n - 1).
class TimeGrid {
public:
  TimeGrid() = default;
  TimeGrid(double t0, double t1, std::size_t n_points);

  double t0() const noexcept { return t0_; }
  double t1() const noexcept { return t1_; }
  std::size_t size() const noexcept { return n_; }
  double step() const noexcept { return (t1_ - t0_) / static_cast<double>(n_ - 1); }
  double operator[](std::size_t k) const noexcept {
    return k + 1 == n_ ? t1_ : t0_ + static_cast<double>(k) * step();
  }
  UniformAxis axis() const noexcept { return {t0_, step(), n_}; }

  /// Same span, 2n-1 points: every original node plus every midpoint.
  TimeGrid refined() const { return TimeGrid(t0_, t1_, 2 * n_ - 1); }
  /// Same span, every other node. Requires odd n.
  TimeGrid coarsened() const;

  friend bool operator==(const TimeGrid&, const TimeGrid&) = default;

private:
  double t0_ = 0.0;
  double t1_ = 1.0;
  std::size_t n_ = 2;
};

/// Row-major samples over (signal kappa, idler kappa').
template <typename T>
class Grid2D {
public:
  Grid2D() = default;
  Grid2D(SpectralGrid rows, SpectralGrid cols)
      : rows_(rows), cols_(cols), values_(rows.size() * cols.size()) {}
  Grid2D(SpectralGrid rows, SpectralGrid cols, std::vector<T> values)
      : rows_(rows), cols_(cols), values_(std::move(values)) {
    if (values_.size() != rows_.size() * cols_.size()) {
      throw ShapeError("Grid2D: value count does not match axes");
    }
  }

  const SpectralGrid& axis_signal() const noexcept { return rows_; }
  const SpectralGrid& axis_idler() const noexcept { return cols_; }
  std::size_t rows() const noexcept { return rows_.size(); }
  std::size_t cols() const noexcept { return cols_.size(); }

  T& operator()(std::size_t r, std::size_t c) noexcept { return values_[r * cols_.size() + c]; }
  const T& operator()(std::size_t r, std::size_t c) const noexcept {
    return values_[r * cols_.size() + c];
  }

  std::span<T> values() noexcept { return values_; }
  std::span<const T> values() const noexcept { return values_; }

  bool same_axes(const SpectralGrid& rows, const SpectralGrid& cols) const noexcept {
    return rows_ == rows && cols_ == cols;
  }

private:
  SpectralGrid rows_;
  SpectralGrid cols_;
  std::vector<T> values_;
};

using ComplexGrid = Grid2D<std::complex<double>>;
using RealGrid = Grid2D<double>;

/// Swaps axes: result(c, r) = g(r, c).
template <typename T>
Grid2D<T> transposed(const Grid2D<T>& g) {
  Grid2D<T> out(g.axis_idler(), g.axis_signal());
  for (std::size_t r = 0; r < g.rows(); ++r)
    for (std::size_t c = 0; c < g.cols(); ++c) out(c, r) = g(r, c);
  return out;
}

/// Throws ShapeError naming `what` if any value is NaN or infinite.
void require_finite(const ComplexGrid& g, const char* what);
void require_finite(const RealGrid& g, const char* what);

}  // namespace ringsfwm
