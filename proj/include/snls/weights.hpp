#ifndef SNLS_WEIGHTS_HPP
#define SNLS_WEIGHTS_HPP

#include "snls/grid.hpp"
#include "snls/spectral.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace snls {

namespace profile {

/// Quintic smoothstep t^3 (10 - 15 t + 6 t^2), clamped to [0, 1].
inline double smoothstep(double t) {
  if (t <= 0.0) return 0.0;
  if (t >= 1.0) return 1.0;
  return std::min(1.0, t * t * t * (10.0 - 15.0 * t + 6.0 * t * t));
}

inline double smoothstep_derivative(double t) {
  if (t <= 0.0 || t >= 1.0) return 0.0;
  return 30.0 * t * t * (1.0 - t) * (1.0 - t);
}

// Antiderivatives of the smoothstep on [0, 1], vanishing at 0.
inline double smoothstep_int1(double t) { return 2.5 * std::pow(t, 4) - 3.0 * std::pow(t, 5) + std::pow(t, 6); }
inline double smoothstep_int2(double t) {
  return 0.5 * std::pow(t, 5) - 0.5 * std::pow(t, 6) + std::pow(t, 7) / 7.0;
}

/// zeta: 2 on [0,1], 2 s(2 - r) on (1,2), 0 from 2 on.
inline double zeta(double r) {
  if (r <= 1.0) return 2.0;
  if (r >= 2.0) return 0.0;
  return 2.0 * smoothstep(2.0 - r);
}

/// d/dr vartheta = int_0^r zeta.
inline double vartheta_prime(double r) {
  if (r < 0.0) throw std::domain_error("vartheta is defined for r >= 0");
  if (r <= 1.0) return 2.0 * r;
  if (r >= 2.0) return 3.0;
  return 3.0 - 2.0 * smoothstep_int1(2.0 - r);
}

/// vartheta(r) = int_0^r int_0^tau zeta(s) ds dtau, in closed form.
inline double vartheta(double r) {
  if (r < 0.0) throw std::domain_error("vartheta is defined for r >= 0");
  if (r <= 1.0) return r * r;
  if (r >= 2.0) return 26.0 / 7.0 + 3.0 * (r - 2.0);
  return 1.0 + 3.0 * (r - 1.0) - 2.0 * (1.0 / 7.0 - smoothstep_int2(2.0 - r));
}

/// chi: 1 on [0, 1 - sigma], 0 on [1, inf), smoothstep in between.
inline double chi(double r, double sigma) { return smoothstep((1.0 - r) / sigma); }
inline double chi_prime(double r, double sigma) { return -smoothstep_derivative((1.0 - r) / sigma) / sigma; }

/// varrho: 1 on [0, 1/2], 0 on [1, inf), smoothstep in between.
inline double varrho(double r) { return smoothstep(2.0 * (1.0 - r)); }

} // namespace profile

/// A radial cutoff r -> value(r / R).
struct CutoffProfile {
  enum class Kind { Zeta, Vartheta, Chi, Varrho };
  Kind kind = Kind::Zeta;
  double R = 1.0;
  double sigma = 0.1;

  double operator()(double r) const {
    if (r < 0.0) throw std::domain_error("cutoff profiles are defined for r >= 0");
    const double s = r / R;
    switch (kind) {
    case Kind::Zeta: return profile::zeta(s);
    case Kind::Vartheta: return profile::vartheta(s);
    case Kind::Chi: return profile::chi(s, sigma);
    case Kind::Varrho: return profile::varrho(s);
    }
    return 0.0;
  }
};

/// Weight phi together with analytically evaluated derivative fields.
struct VirialWeight {
  RealField phi;
  std::vector<RealField> gradient; // components in the grid's gradient layout
  RealField laplacian;
  RealField second_radial;         // phi''(r), or psi''(rho) for the cylindrical weight
};

namespace detail {

inline void check_virial_scale(double R, const GridSpec& grid) {
  if (!(R > 0.0)) throw ConfigurationError("weight scale R must be positive");
  double reach = 0.0;
  switch (grid.mode()) {
  case GridMode::Radial3D: reach = grid.extent(0); break;
  case GridMode::Cart3D: reach = std::min({grid.extent(0), grid.extent(1), grid.extent(2)}); break;
  case GridMode::Cyl3D: reach = grid.extent(0); break;
  }
  if (2.0 * R > reach) throw ConfigurationError("2R exceeds the grid extent");
}

// Fills a VirialWeight from a radial profile phi(r), phi'(r), phi''(r).
template <class F, class D1, class D2>
VirialWeight radial_weight_fields(const GridSpec& grid, F phi, D1 dphi, D2 d2phi) {
  const std::size_t n = grid.size();
  VirialWeight w;
  w.phi.resize(n);
  w.laplacian.resize(n);
  w.second_radial.resize(n);
  w.gradient.assign(grid.mode() == GridMode::Radial3D ? 1 : grid.mode() == GridMode::Cyl3D ? 2 : 3,
                    RealField(n));
  for (std::size_t i = 0; i < n; ++i) {
    const auto x = grid.position(i);
    const double r = grid.radius(i);
    const double d1 = dphi(r), d2 = d2phi(r);
    w.phi[i] = phi(r);
    w.second_radial[i] = d2;
    // d1 / r -> phi''(0) as r -> 0 for these profiles.
    const double d1_over_r = r > 0.0 ? d1 / r : d2;
    w.laplacian[i] = d2 + 2.0 * d1_over_r;
    switch (grid.mode()) {
    case GridMode::Radial3D: w.gradient[0][i] = d1; break;
    case GridMode::Cart3D:
      for (std::size_t a = 0; a < 3; ++a) w.gradient[a][i] = x[a] * d1_over_r;
      break;
    case GridMode::Cyl3D:
      w.gradient[0][i] = x[0] * d1_over_r;
      w.gradient[1][i] = x[2] * d1_over_r;
      break;
    }
  }
  return w;
}

} // namespace detail

/// phi_R(x) = R^2 vartheta(|x| / R) with analytic derivatives.
inline VirialWeight radial_virial_weight(double R, const GridSpec& grid) {
  detail::check_virial_scale(R, grid);
  return detail::radial_weight_fields(
      grid, [R](double r) { return R * R * profile::vartheta(r / R); },
      [R](double r) { return R * profile::vartheta_prime(r / R); },
      [R](double r) { return profile::zeta(r / R); });
}

/// phi(x) = |x|^2, the untruncated variance weight.
inline VirialWeight quadratic_virial_weight(const GridSpec& grid) {
  return detail::radial_weight_fields(
      grid, [](double r) { return r * r; }, [](double r) { return 2.0 * r; }, [](double) { return 2.0; });
}

/// phi(x) = psi_R(rho) + z^2 with psi_R = R^2 vartheta(rho / R), on a Cyl3D grid.
inline VirialWeight cylindrical_weight(double R, const GridSpec& grid) {
  if (grid.mode() != GridMode::Cyl3D) throw UnsupportedModeError("cylindrical weight needs a Cyl3D grid");
  detail::check_virial_scale(R, grid);
  const std::size_t n = grid.size();
  VirialWeight w;
  w.phi.resize(n);
  w.laplacian.resize(n);
  w.second_radial.resize(n);
  w.gradient.assign(2, RealField(n));
  for (std::size_t i = 0; i < n; ++i) {
    const auto x = grid.position(i);
    const double rho = x[0], z = x[2];
    const double d1 = R * profile::vartheta_prime(rho / R);
    const double d2 = profile::zeta(rho / R);
    w.phi[i] = R * R * profile::vartheta(rho / R) + z * z;
    w.gradient[0][i] = d1;
    w.gradient[1][i] = 2.0 * z;
    w.second_radial[i] = d2;
    w.laplacian[i] = d2 + d1 / rho + 2.0; // Delta_y psi_R + d_zz z^2
  }
  return w;
}

/// Delta_y psi_R = psi'' + psi' / rho at each sample of a Cyl3D grid.
inline RealField cylindrical_transverse_laplacian(double R, const GridSpec& grid) {
  const VirialWeight w = cylindrical_weight(R, grid);
  RealField out(grid.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = w.laplacian[i] - 2.0;
  return out;
}

/// P_jk(x) = delta_jk - x_j x_k / |x|^2.
inline std::array<std::array<double, 3>, 3> tangential_projector(const std::array<double, 3>& x) {
  const double r2 = x[0] * x[0] + x[1] * x[1] + x[2] * x[2];
  if (!(r2 > 0.0)) throw std::domain_error("tangential projector is undefined at x = 0");
  std::array<std::array<double, 3>, 3> p{};
  for (std::size_t j = 0; j < 3; ++j)
    for (std::size_t k = 0; k < 3; ++k) p[j][k] = (j == k ? 1.0 : 0.0) - x[j] * x[k] / r2;
  return p;
}

/// Linearly interpolated radial table on r_i = i * step, i = 0..size-1.
struct RadialTable {
  double step = 0.0;
  std::vector<double> values;

  double radius(std::size_t i) const { return static_cast<double>(i) * step; }
  double r_max() const { return radius(values.size() - 1); }
  double at(double r) const {
    const double s = r / step;
    const auto i = static_cast<std::size_t>(s);
    if (i + 1 >= values.size()) return values.back();
    const double t = s - static_cast<double>(i);
    return (1.0 - t) * values[i] + t * values[i + 1];
  }
};

/**
 * Morawetz weight family for one scale R and transition width sigma.
 *
 * Phi_R is built by FFT self-convolution of chi_R^2 on a Cartesian grid
 * normalized by omega_3 R^3, then resampled along an axis at half the grid
 * spacing. Psi_R and Theta_R are cumulative radial integrals of that profile.
 * Beyond the table Phi_R = 0, Psi_R = I / r and Theta_R grows linearly.
 */
struct MorawetzWeights {
  double R = 0.0;
  double sigma = 0.1;
  GridSpec grid;
  RadialTable phi;
  RadialTable phi1; // empty when not built
  RadialTable psi;
  RadialTable theta;
  RealField phi_grid; // Phi_R on the build grid

  bool has_phi1() const { return !phi1.values.empty(); }

  double phi_at(double r) const { return r >= phi.r_max() ? 0.0 : phi.at(r); }
  double phi1_at(double r) const { return r >= phi1.r_max() ? 0.0 : phi1.at(r); }
  double psi_at(double r) const {
    if (r <= 0.0) return psi.values.front();
    if (r >= psi.r_max()) return psi.values.back() * psi.r_max() / r;
    return psi.at(r);
  }
  double theta_at(double r) const {
    if (r >= theta.r_max()) return theta.values.back() + psi.values.back() * psi.r_max() * (r - theta.r_max());
    return theta.at(r);
  }
  /// grad Theta_R(x) = x Psi_R(|x|).
  std::array<double, 3> grad_theta(const std::array<double, 3>& x) const {
    const double r = std::sqrt(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]);
    const double p = psi_at(r);
    return {x[0] * p, x[1] * p, x[2] * p};
  }
};

namespace detail {

// Periodic self-convolution (a * b)(x) = sum_z a(x - z) b(z) h^3 for radial
// profiles sampled with the origin at index 0.
inline std::vector<complex> radial_convolution(const GridSpec& grid, double (*fa)(double, double),
                                               double (*fb)(double, double), double R, double sigma) {
  const auto& n = grid.points();
  std::vector<complex> a(grid.size()), b(grid.size());
  auto wrapped = [&](std::size_t i, std::size_t axis) {
    const auto half = n[axis] / 2;
    const double h = grid.spacing(axis);
    return i < half ? static_cast<double>(i) * h : (static_cast<double>(i) - static_cast<double>(n[axis])) * h;
  };
  for (std::size_t i = 0; i < n[0]; ++i)
    for (std::size_t j = 0; j < n[1]; ++j)
      for (std::size_t k = 0; k < n[2]; ++k) {
        const double x = wrapped(i, 0), y = wrapped(j, 1), z = wrapped(k, 2);
        const double r = std::sqrt(x * x + y * y + z * z) / R;
        const std::size_t idx = (i * n[1] + j) * n[2] + k;
        a[idx] = fa(r, sigma);
        b[idx] = fb(r, sigma);
      }
  dft3d(a, n[0], n[1], n[2], FFTW_FORWARD);
  dft3d(b, n[0], n[1], n[2], FFTW_FORWARD);
  const double cell = grid.spacing(0) * grid.spacing(1) * grid.spacing(2);
  for (std::size_t i = 0; i < a.size(); ++i) a[i] *= b[i] * cell / static_cast<double>(grid.size());
  dft3d(a, n[0], n[1], n[2], FFTW_BACKWARD);
  return a;
}

// Values along the +x axis at half spacing by trigonometric interpolation of
// the x-axis line; returns samples at r = m h / 2, m = 0..n.
inline std::vector<double> axis_profile_half_step(const GridSpec& grid, const std::vector<complex>& field) {
  const std::size_t n = grid.points(0);
  std::vector<complex> line(n);
  for (std::size_t i = 0; i < n; ++i) line[i] = field[i * grid.points(1) * grid.points(2)];
  std::vector<complex> spec = line;
  dft_last_axis(spec, 1, n, FFTW_FORWARD);
  std::vector<complex> padded(2 * n);
  for (std::size_t m = 0; m < n / 2; ++m) padded[m] = spec[m];
  for (std::size_t m = n / 2 + 1; m < n; ++m) padded[m + n] = spec[m];
  padded[n / 2] = 0.5 * spec[n / 2];
  padded[n / 2 + n] = 0.5 * spec[n / 2];
  dft_last_axis(padded, 1, 2 * n, FFTW_BACKWARD);
  std::vector<double> out(n + 1);
  for (std::size_t m = 0; m <= n; ++m) out[m] = padded[m].real() / static_cast<double>(n);
  return out;
}

// Cumulative integral F_i = int_0^{r_i} f with fourth-order interior panels.
inline std::vector<double> cumulative_integral(const std::vector<double>& f, double step,
                                               bool even_at_origin) {
  const std::size_t n = f.size();
  std::vector<double> out(n, 0.0);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    double panel;
    // Ghost values use the parity of f about r = 0 and linear extrapolation at the far end.
    const double fm = i > 0 ? f[i - 1] : (even_at_origin ? f[1] : -f[1]);
    const double fp2 = i + 2 < n ? f[i + 2] : 2.0 * f[i + 1] - f[i];
    panel = step / 24.0 * (-fm + 13.0 * f[i] + 13.0 * f[i + 1] - fp2);
    out[i + 1] = out[i] + panel;
  }
  return out;
}

inline double chi_sq(double r, double sigma) {
  const double c = profile::chi(r, sigma);
  return c * c;
}
inline double chi_4(double r, double sigma) {
  const double c = profile::chi(r, sigma);
  return c * c * c * c;
}

} // namespace detail

/// Builds Phi_R, Psi_R, Theta_R (and Phi_{1,R} on request) on a Cartesian grid.
inline MorawetzWeights build_morawetz_weights(double R, double sigma, const GridSpec& grid,
                                              bool with_phi1 = true) {
  if (grid.mode() != GridMode::Cart3D) throw UnsupportedModeError("Morawetz weights need a Cart3D grid");
  if (!(R > 0.0)) throw ConfigurationError("R must be positive");
  if (!(sigma > 0.0 && sigma < 1.0)) throw ConfigurationError("sigma must lie in (0, 1)");
  for (std::size_t a = 0; a < 3; ++a)
    if (grid.axis_length(a) < 4.0 * R) throw ConfigurationError("grid extent must be at least 4R");
  if (grid.points(0) != grid.points(1) || grid.points(0) != grid.points(2) ||
      grid.extent(0) != grid.extent(1) || grid.extent(0) != grid.extent(2))
    throw ConfigurationError("Morawetz weights need a cubic grid");

  const double norm = 1.0 / (4.0 * std::numbers::pi / 3.0 * R * R * R);
  MorawetzWeights w{R, sigma, grid, {}, {}, {}, {}, {}};

  auto conv = detail::radial_convolution(grid, detail::chi_sq, detail::chi_sq, R, sigma);
  for (auto& z : conv) z *= norm;

  // Stored on the build grid in its own (centred) sample order.
  const auto& n = grid.points();
  w.phi_grid.resize(grid.size());
  for (std::size_t i = 0; i < n[0]; ++i)
    for (std::size_t j = 0; j < n[1]; ++j)
      for (std::size_t k = 0; k < n[2]; ++k) {
        const std::size_t src = (((i + n[0] / 2) % n[0]) * n[1] + (j + n[1] / 2) % n[1]) * n[2] + (k + n[2] / 2) % n[2];
        w.phi_grid[(i * n[1] + j) * n[2] + k] = conv[src].real();
      }

  const double step = 0.5 * grid.spacing(0);
  // Phi_R >= 0; the interpolation can ring slightly below zero past the support.
  auto clip = [](std::vector<double> v) {
    for (auto& x : v) x = std::max(x, 0.0);
    return v;
  };
  w.phi = {step, clip(detail::axis_profile_half_step(grid, conv))};
  if (with_phi1) {
    auto conv1 = detail::radial_convolution(grid, detail::chi_sq, detail::chi_4, R, sigma);
    for (auto& z : conv1) z *= norm;
    w.phi1 = {step, clip(detail::axis_profile_half_step(grid, conv1))};
  }

  const auto& phi = w.phi.values;
  const auto cum = detail::cumulative_integral(phi, step, true);
  std::vector<double> psi(phi.size());
  psi[0] = phi[0];
  for (std::size_t i = 1; i < phi.size(); ++i) psi[i] = cum[i] / w.phi.radius(i);
  std::vector<double> r_psi(phi.size());
  for (std::size_t i = 0; i < phi.size(); ++i) r_psi[i] = w.phi.radius(i) * psi[i];
  w.psi = {step, psi};
  w.theta = {step, detail::cumulative_integral(r_psi, step, false)};
  return w;
}

/// Outcome of the weight identity and bound checks.
struct WeightReport {
  double max_phi = 0.0;
  double identity_residual = 0.0;      // max |Delta Theta - 2 Psi - Phi|
  double theta_gradient_residual = 0.0; // max |Theta' - r Psi|
  double max_phi_minus_psi = 0.0;      // max (Phi - Psi)_+
  double min_psi_minus_phi = 0.0;
  double min_phi = 0.0;
  double min_psi = 0.0;
  double c_psi_bound = 0.0;            // |Psi| <= c min(1, R/r)
  double c_grad_phi = 0.0;             // |grad Phi| <= c / (sigma R)
  double c_psi_minus_phi = 0.0;        // |Psi - Phi| <= (c / sigma) min(r/R, R/r)
  double phi1_deviation = 0.0;         // max |Phi - Phi_1|, zero when absent
  double phi1_over_sigma = 0.0;
};

/// Checks the radial identities and bounds of a built weight family by finite differences.
inline WeightReport verify_weight_identities(const MorawetzWeights& w) {
  WeightReport rep;
  const auto& phi = w.phi.values;
  const auto& psi = w.psi.values;
  const auto& theta = w.theta.values;
  const double d = w.phi.step;
  const std::size_t n = phi.size();
  rep.min_phi = phi[0];
  rep.min_psi = psi[0];
  rep.min_psi_minus_phi = psi[0] - phi[0];
  for (std::size_t i = 0; i < n; ++i) {
    const double r = w.phi.radius(i);
    rep.max_phi = std::max(rep.max_phi, std::abs(phi[i]));
    rep.min_phi = std::min(rep.min_phi, phi[i]);
    rep.min_psi = std::min(rep.min_psi, psi[i]);
    rep.min_psi_minus_phi = std::min(rep.min_psi_minus_phi, psi[i] - phi[i]);
    rep.max_phi_minus_psi = std::max(rep.max_phi_minus_psi, phi[i] - psi[i]);
    rep.c_psi_bound = std::max(rep.c_psi_bound, std::abs(psi[i]) / std::min(1.0, r > 0.0 ? w.R / r : 1.0));
    if (r > 0.0)
      rep.c_psi_minus_phi = std::max(rep.c_psi_minus_phi,
                                     std::abs(psi[i] - phi[i]) * w.sigma / std::min(r / w.R, w.R / r));
    if (w.has_phi1()) rep.phi1_deviation = std::max(rep.phi1_deviation, std::abs(phi[i] - w.phi1.values[i]));
    if (i > 0 && i + 2 < n) {
      // Fourth-order central differences; Theta is even about r = 0.
      const double tm2 = i >= 2 ? theta[i - 2] : theta[2 - i];
      const double t1 = (-theta[i + 2] + 8.0 * theta[i + 1] - 8.0 * theta[i - 1] + tm2) / (12.0 * d);
      const double t2 =
          (-theta[i + 2] + 16.0 * theta[i + 1] - 30.0 * theta[i] + 16.0 * theta[i - 1] - tm2) / (12.0 * d * d);
      rep.identity_residual = std::max(rep.identity_residual, std::abs(t2 + 2.0 * t1 / r - 2.0 * psi[i] - phi[i]));
      rep.theta_gradient_residual = std::max(rep.theta_gradient_residual, std::abs(t1 - r * psi[i]));
      const double dphi = (phi[i + 1] - phi[i - 1]) / (2.0 * d);
      rep.c_grad_phi = std::max(rep.c_grad_phi, std::abs(dphi) * w.sigma * w.R);
    }
  }
  // At the origin Delta Theta = 3 Theta''(0).
  const double t2_origin = (-2.0 * theta[2] + 32.0 * theta[1] - 30.0 * theta[0]) / (12.0 * d * d);
  rep.identity_residual = std::max(rep.identity_residual, std::abs(3.0 * t2_origin - 3.0 * phi[0]));
  rep.phi1_over_sigma = rep.phi1_deviation / w.sigma;
  return rep;
}

} // namespace snls

#endif
