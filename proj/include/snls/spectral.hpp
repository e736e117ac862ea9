#ifndef SNLS_SPECTRAL_HPP
#define SNLS_SPECTRAL_HPP

#include "snls/detail/fft.hpp"
#include "snls/grid.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <span>
#include <utility>
#include <vector>

namespace snls {

using Wavevector = std::array<double, 3>;

/// Quadrature of a real integrand with the grid's measure.
inline double integrate(const GridSpec& grid, std::span<const double> field) {
  if (field.size() != grid.size()) throw StructuralError("integrand does not match grid");
  double sum = 0.0;
  for (std::size_t i = 0; i < field.size(); ++i) sum += grid.cell_volume(i) * field[i];
  return sum;
}

/// Squared L^2 norm of a complex field.
inline double norm_squared(const ComplexField& f) {
  RealField d(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) d[i] = std::norm(f[i]);
  return integrate(f.grid(), d);
}

namespace detail {

inline double periodic_wavenumber(std::size_t index, std::size_t n, double length) {
  const auto m = static_cast<long long>(index);
  const auto half = static_cast<long long>(n / 2);
  const long long shifted = m < half ? m : m - static_cast<long long>(n);
  return 2.0 * std::numbers::pi * static_cast<double>(shifted) / length;
}

// Finite-difference radial operator (1/rho) d/drho (rho d/drho) on the midpoint
// grid, regular at rho = 0 and zero beyond rho = L. Self-adjoint with respect
// to the rho-weighted inner product; stored in its symmetrized eigenbasis.
struct CylRadialOperator {
  Eigen::MatrixXd basis;      // orthonormal eigenvectors of the symmetrized operator
  Eigen::VectorXd eigenvalues; // nonpositive
  Eigen::VectorXd sqrt_rho;

  static std::shared_ptr<const CylRadialOperator> get(std::size_t n, double length) {
    static std::mutex mutex;
    static std::map<std::pair<std::size_t, double>, std::shared_ptr<const CylRadialOperator>> cache;
    std::lock_guard lock(mutex);
    auto& slot = cache[{n, length}];
    if (!slot) slot = std::make_shared<const CylRadialOperator>(build(n, length));
    return slot;
  }

  static CylRadialOperator build(std::size_t n, double length) {
    const double h = length / static_cast<double>(n);
    auto rho = [h](double i) { return (i + 0.5) * h; };
    Eigen::MatrixXd s = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) {
      const double ri = rho(static_cast<double>(i));
      const double up = ri + 0.5 * h;
      const double down = i == 0 ? 0.0 : ri - 0.5 * h;
      const auto ii = static_cast<Eigen::Index>(i);
      s(ii, ii) = -(up + down) / (ri * h * h);
      if (i + 1 < n) {
        const double rj = rho(static_cast<double>(i + 1));
        const double off = up / (h * h * std::sqrt(ri * rj));
        s(ii, ii + 1) = off;
        s(ii + 1, ii) = off;
      }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(s);
    CylRadialOperator op;
    op.basis = solver.eigenvectors();
    op.eigenvalues = solver.eigenvalues();
    op.sqrt_rho.resize(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i)
      op.sqrt_rho(static_cast<Eigen::Index>(i)) = std::sqrt(rho(static_cast<double>(i)));
    return op;
  }
};

using RowMajorComplex = Eigen::Matrix<complex, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

} // namespace detail

/**
 * Wavevector attached to each spectral coefficient, in coefficient order.
 *
 * Cart3D: (k_x, k_y, k_z) in FFT order. Radial3D: (kappa, 0, 0) with
 * kappa = pi (m + 1) / L for the sine mode m. Cyl3D: (kappa_rho, 0, k_z) where
 * kappa_rho^2 is minus an eigenvalue of the discrete radial operator.
 */
inline std::vector<Wavevector> wavevectors(const GridSpec& grid) {
  std::vector<Wavevector> out(grid.size());
  const auto& n = grid.points();
  switch (grid.mode()) {
  case GridMode::Radial3D:
    for (std::size_t m = 0; m < n[0]; ++m)
      out[m] = {std::numbers::pi * static_cast<double>(m + 1) / grid.extent(0), 0.0, 0.0};
    break;
  case GridMode::Cart3D:
    for (std::size_t i = 0; i < n[0]; ++i)
      for (std::size_t j = 0; j < n[1]; ++j)
        for (std::size_t k = 0; k < n[2]; ++k)
          out[(i * n[1] + j) * n[2] + k] = {
              detail::periodic_wavenumber(i, n[0], grid.axis_length(0)),
              detail::periodic_wavenumber(j, n[1], grid.axis_length(1)),
              detail::periodic_wavenumber(k, n[2], grid.axis_length(2))};
    break;
  case GridMode::Cyl3D: {
    auto op = detail::CylRadialOperator::get(n[0], grid.extent(0));
    for (std::size_t i = 0; i < n[0]; ++i) {
      const double kappa = std::sqrt(std::max(0.0, -op->eigenvalues(static_cast<Eigen::Index>(i))));
      for (std::size_t k = 0; k < n[1]; ++k)
        out[i * n[1] + k] = {kappa, 0.0, detail::periodic_wavenumber(k, n[1], grid.axis_length(1))};
    }
    break;
  }
  }
  return out;
}

/// In-place map from samples to spectral coefficients.
inline void to_spectral(const GridSpec& grid, std::span<complex> data) {
  if (data.size() != grid.size()) throw StructuralError("field does not match grid");
  const auto& n = grid.points();
  switch (grid.mode()) {
  case GridMode::Radial3D: {
    for (std::size_t j = 0; j < n[0]; ++j) data[j] *= grid.coordinate(0, j);
    detail::r2r(data, detail::PlanCache::Kind::Dst2);
    const double scale = 1.0 / (2.0 * static_cast<double>(n[0]));
    for (auto& z : data) z *= scale;
    break;
  }
  case GridMode::Cart3D:
    detail::dft3d(data, n[0], n[1], n[2], FFTW_FORWARD);
    break;
  case GridMode::Cyl3D: {
    auto op = detail::CylRadialOperator::get(n[0], grid.extent(0));
    Eigen::Map<detail::RowMajorComplex> m(data.data(), static_cast<Eigen::Index>(n[0]),
                                          static_cast<Eigen::Index>(n[1]));
    detail::RowMajorComplex weighted = op->sqrt_rho.cast<complex>().asDiagonal() * m;
    m = op->basis.transpose().cast<complex>() * weighted;
    detail::dft_last_axis(data, n[0], n[1], FFTW_FORWARD);
    break;
  }
  }
}

/// Inverse of to_spectral.
inline void from_spectral(const GridSpec& grid, std::span<complex> data) {
  if (data.size() != grid.size()) throw StructuralError("field does not match grid");
  const auto& n = grid.points();
  switch (grid.mode()) {
  case GridMode::Radial3D:
    detail::r2r(data, detail::PlanCache::Kind::Dst3);
    for (std::size_t j = 0; j < n[0]; ++j) data[j] /= grid.coordinate(0, j);
    break;
  case GridMode::Cart3D: {
    detail::dft3d(data, n[0], n[1], n[2], FFTW_BACKWARD);
    const double scale = 1.0 / static_cast<double>(grid.size());
    for (auto& z : data) z *= scale;
    break;
  }
  case GridMode::Cyl3D: {
    detail::dft_last_axis(data, n[0], n[1], FFTW_BACKWARD);
    auto op = detail::CylRadialOperator::get(n[0], grid.extent(0));
    Eigen::Map<detail::RowMajorComplex> m(data.data(), static_cast<Eigen::Index>(n[0]),
                                          static_cast<Eigen::Index>(n[1]));
    detail::RowMajorComplex back = op->basis.cast<complex>() * m;
    const double scale = 1.0 / static_cast<double>(n[1]);
    m = (op->sqrt_rho.cwiseInverse() * scale).cast<complex>().asDiagonal() * back;
    break;
  }
  }
}

/// Multiplies spectral coefficients by precomputed factors (one per coefficient).
inline ComplexField apply_multiplier(const ComplexField& field, std::span<const complex> factors) {
  if (factors.size() != field.size()) throw StructuralError("multiplier does not match grid");
  ComplexField out = field;
  to_spectral(out.grid(), out.samples());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= factors[i];
  from_spectral(out.grid(), out.samples());
  return out;
}

/// inverse-transform(symbol(k) * transform(field)).
template <class Symbol>
  requires std::invocable<Symbol, const Wavevector&>
ComplexField apply_multiplier(const ComplexField& field, Symbol&& symbol) {
  const auto ks = wavevectors(field.grid());
  std::vector<complex> factors(ks.size());
  for (std::size_t i = 0; i < ks.size(); ++i) factors[i] = complex(symbol(ks[i]));
  return apply_multiplier(field, std::span<const complex>(factors));
}

inline double k_squared(const Wavevector& k) { return k[0] * k[0] + k[1] * k[1] + k[2] * k[2]; }

namespace detail {

// Centered rho derivative: even reflection at rho = 0, zero beyond rho = L.
inline void rho_derivative(const GridSpec& grid, std::span<const complex> in, std::span<complex> out) {
  const std::size_t nr = grid.points(0), nz = grid.points(1);
  const double h = grid.spacing(0);
  for (std::size_t i = 0; i < nr; ++i)
    for (std::size_t k = 0; k < nz; ++k) {
      const complex lo = i == 0 ? in[k] : in[(i - 1) * nz + k];
      const complex hi = i + 1 == nr ? complex{} : in[(i + 1) * nz + k];
      out[i * nz + k] = (hi - lo) / (2.0 * h);
    }
}

// Applies symbol(k_z) along the periodic z axis; odd symbols drop the Nyquist mode.
inline ComplexField z_multiplier(const ComplexField& f, complex (*symbol)(double), bool odd) {
  const GridSpec& g = f.grid();
  ComplexField out = f;
  const std::size_t nr = g.points(0), nz = g.points(1);
  detail::dft_last_axis(out.samples(), nr, nz, FFTW_FORWARD);
  for (std::size_t i = 0; i < nr; ++i)
    for (std::size_t k = 0; k < nz; ++k) {
      const complex s = odd && k == nz / 2 ? complex{} : symbol(periodic_wavenumber(k, nz, g.axis_length(1)));
      out[i * nz + k] *= s / static_cast<double>(nz);
    }
  detail::dft_last_axis(out.samples(), nr, nz, FFTW_BACKWARD);
  return out;
}

} // namespace detail

/// Laplacian in the grid's geometry.
inline ComplexField laplacian(const ComplexField& field) {
  const GridSpec& g = field.grid();
  switch (g.mode()) {
  case GridMode::Radial3D:
  case GridMode::Cart3D:
    return apply_multiplier(field, [](const Wavevector& k) { return complex(-k_squared(k)); });
  case GridMode::Cyl3D: {
    ComplexField out = detail::z_multiplier(field, [](double kz) { return complex(-kz * kz); }, false);
    const std::size_t nr = g.points(0), nz = g.points(1);
    const double h = g.spacing(0);
    for (std::size_t i = 0; i < nr; ++i) {
      const double rho = g.coordinate(0, i);
      const double up = rho + 0.5 * h;
      const double down = i == 0 ? 0.0 : rho - 0.5 * h;
      for (std::size_t k = 0; k < nz; ++k) {
        const complex c = field[i * nz + k];
        const complex hi = i + 1 == nr ? complex{} : field[(i + 1) * nz + k];
        const complex lo = i == 0 ? c : field[(i - 1) * nz + k];
        out[i * nz + k] += (up * (hi - c) - down * (c - lo)) / (rho * h * h);
      }
    }
    return out;
  }
  }
  throw UnsupportedModeError("unknown grid mode");
}

/**
 * Gradient components: (d_x, d_y, d_z) on Cart3D, (d_r) on Radial3D,
 * (d_rho, d_z) on Cyl3D. For radial fields |grad u|^2 = |d_r u|^2.
 */
inline std::vector<ComplexField> gradient(const ComplexField& field) {
  const GridSpec& g = field.grid();
  std::vector<ComplexField> out;
  switch (g.mode()) {
  case GridMode::Cart3D: {
    ComplexField spec = field;
    to_spectral(g, spec.samples());
    const auto ks = wavevectors(g);
    for (std::size_t axis = 0; axis < 3; ++axis) {
      const double nyquist = std::numbers::pi / g.spacing(axis);
      ComplexField comp = spec;
      for (std::size_t i = 0; i < comp.size(); ++i) {
        const double k = ks[i][axis];
        comp[i] *= std::abs(std::abs(k) - nyquist) < 1e-12 * nyquist ? complex{} : complex(0.0, k);
      }
      from_spectral(g, comp.samples());
      out.push_back(std::move(comp));
    }
    break;
  }
  case GridMode::Radial3D: {
    const std::size_t n = g.points(0);
    ComplexField coeffs = field;
    to_spectral(g, coeffs.samples());
    ComplexField dw(g);
    for (std::size_t m = 1; m < n; ++m)
      dw[m] = coeffs[m - 1] * (std::numbers::pi * static_cast<double>(m) / g.extent(0));
    detail::r2r(dw.samples(), detail::PlanCache::Kind::Dct3);
    for (std::size_t j = 0; j < n; ++j) dw[j] = (dw[j] - field[j]) / g.coordinate(0, j);
    out.push_back(std::move(dw));
    break;
  }
  case GridMode::Cyl3D: {
    ComplexField drho(g);
    detail::rho_derivative(g, field.samples(), drho.samples());
    out.push_back(std::move(drho));
    out.push_back(detail::z_multiplier(field, [](double kz) { return complex(0.0, kz); }, true));
    break;
  }
  }
  return out;
}

struct SupportMargin {
  double boundary_ratio = 0.0; // max |f| on the boundary shell over max |f|
  bool ok = true;
};

/// Checks that a field has decayed at the outer boundary shell (threshold 1e-8).
inline SupportMargin support_margin(const ComplexField& f, double threshold = 1e-8) {
  const GridSpec& g = f.grid();
  const auto& n = g.points();
  double peak = 0.0, edge = 0.0;
  for (std::size_t idx = 0; idx < f.size(); ++idx) {
    const double a = std::abs(f[idx]);
    peak = std::max(peak, a);
    bool boundary = false;
    switch (g.mode()) {
    case GridMode::Radial3D: boundary = idx + 1 == n[0]; break;
    case GridMode::Cart3D: {
      const std::size_t k = idx % n[2], j = (idx / n[2]) % n[1], i = idx / (n[1] * n[2]);
      boundary = i == 0 || j == 0 || k == 0 || i + 1 == n[0] || j + 1 == n[1] || k + 1 == n[2];
      break;
    }
    case GridMode::Cyl3D: {
      const std::size_t i = idx / n[1], k = idx % n[1];
      boundary = i + 1 == n[0] || k == 0 || k + 1 == n[1];
      break;
    }
    }
    if (boundary) edge = std::max(edge, a);
  }
  SupportMargin m;
  m.boundary_ratio = peak > 0.0 ? edge / peak : 0.0;
  m.ok = m.boundary_ratio < threshold;
  return m;
}

} // namespace snls

#endif
