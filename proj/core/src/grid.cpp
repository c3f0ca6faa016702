#include "ringsfwm/grid.hpp"

#include <cmath>
#include <string>
#include <type_traits>

namespace ringsfwm {

std::vector<double> UniformAxis::points() const {
  std::vector<double> out(size);
  for (std::size_t k = 0; k < size; ++k) out[k] = (*this)[k];
  return out;
}

SpectralGrid::SpectralGrid(double half_width, std::size_t n_points)
    : half_width_(half_width), n_(n_points) {
  if (!(half_width > 0.0) || !std::isfinite(half_width)) {
    throw InvalidParameter("SpectralGrid: half_width must be positive and finite");
  }
  if (n_points < 8) {
    throw InvalidParameter("SpectralGrid: at least 8 points required");
  }
}

SpectralGrid SpectralGrid::coarsened() const {
  const std::size_t n = (n_ + 1) / 2;
  // keep the spacing exactly doubled; the span shrinks by one step for even n
  const double hw = 0.5 * static_cast<double>(n - 1) * 2.0 * spacing();
  return SpectralGrid(hw, n);
}

TimeGrid::TimeGrid(double t0, double t1, std::size_t n_points) : t0_(t0), t1_(t1), n_(n_points) {
  if (!(t1 > t0) || !std::isfinite(t0) || !std::isfinite(t1)) {
    throw InvalidParameter("TimeGrid: requires finite t1 > t0");
  }
  if (n_points < 2) {
    throw InvalidParameter("TimeGrid: at least 2 points required");
  }
}

TimeGrid TimeGrid::coarsened() const {
  if (n_ % 2 == 0) throw InvalidParameter("TimeGrid::coarsened requires an odd point count");
  return TimeGrid(t0_, t1_, (n_ + 1) / 2);
}

namespace {

template <typename T>
void check_finite(const Grid2D<T>& g, const char* what) {
  for (const auto& x : g.values()) {
    bool ok;
    if constexpr (std::is_same_v<T, double>) {
      ok = std::isfinite(x);
    } else {
      ok = std::isfinite(x.real()) && std::isfinite(x.imag());
    }
    if (!ok) throw ShapeError(std::string(what) + ": non-finite grid entry");
  }
}

}  // namespace

void require_finite(const ComplexGrid& g, const char* what) { check_finite(g, what); }
void require_finite(const RealGrid& g, const char* what) { check_finite(g, what); }

}  // namespace ringsfwm
