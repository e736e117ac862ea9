#ifndef SNLS_TESTS_SUPPORT_HPP
#define SNLS_TESTS_SUPPORT_HPP

#include "snls/grid.hpp"

#include <cmath>
#include <numbers>
#include <random>

namespace snls::ts {

inline double rel(double a, double b) {
  const double s = std::max(std::abs(a), std::abs(b));
  return s == 0.0 ? 0.0 : std::abs(a - b) / s;
}

/// Random radial Gaussian with a random chirp and phase.
inline ComplexField random_radial_field(const GridSpec& g, std::mt19937_64& rng, double amp_max = 2.0) {
  std::uniform_real_distribution<double> amp(-amp_max, amp_max), width(0.6, 2.0), chirp(-1.5, 1.5),
      phase(0.0, 2.0 * std::numbers::pi);
  const double a = amp(rng), w = width(rng), k = chirp(rng), p = phase(rng);
  return ComplexField::from_function(g, [=](const auto& x) {
    return a * std::exp(-x[0] * x[0] / (w * w)) * std::polar(1.0, p + k * x[0] * x[0]);
  });
}

/// Random off-centre Gaussian packet with a random carrier on a Cart3D grid.
inline ComplexField random_cart_field(const GridSpec& g, std::mt19937_64& rng, double amp_max = 1.0) {
  std::uniform_real_distribution<double> amp(0.2, amp_max), width(0.8, 1.5), shift(-0.5, 0.5), carrier(-1.0, 1.0),
      phase(0.0, 2.0 * std::numbers::pi);
  const double a = amp(rng), w = width(rng), p = phase(rng);
  const std::array<double, 3> c{shift(rng), shift(rng), shift(rng)}, k{carrier(rng), carrier(rng), carrier(rng)};
  return ComplexField::from_function(g, [=](const auto& x) {
    double r2 = 0.0, kx = 0.0;
    for (int i = 0; i < 3; ++i) {
      r2 += (x[i] - c[i]) * (x[i] - c[i]);
      kx += k[i] * x[i];
    }
    return a * std::exp(-r2 / (w * w)) * std::polar(1.0, p + kx);
  });
}

inline ComplexField gaussian(const GridSpec& g, double amp = 1.0, double width = 1.0) {
  return ComplexField::from_function(g, [=](const auto& x) {
    return complex(amp * std::exp(-(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]) / (width * width)));
  });
}

} // namespace snls::ts

#endif
