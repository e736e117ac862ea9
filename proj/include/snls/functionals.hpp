#ifndef SNLS_FUNCTIONALS_HPP
#define SNLS_FUNCTIONALS_HPP

#include "snls/detail/fft.hpp"
#include "snls/grid.hpp"
#include "snls/spectral.hpp"
#include "snls/weights.hpp"

#include <array>
#include <cmath>
#include <vector>

namespace snls {

/// Snapshot of the conserved and variational functionals.
struct FunctionalReport {
  double time = 0.0;
  double mass_mu = 0.0;
  double mass_3gamma = 0.0;
  double kinetic = 0.0;
  double potential = 0.0;
  double energy_mu = 0.0;
  double pohozaev = 0.0;
  double action_omega = 0.0;
  double omega = 0.0;
};

/// ||u||^2 + weight ||v||^2.
inline double mass(const StatePair& s, double weight) {
  RealField d(s.u.size());
  for (std::size_t i = 0; i < d.size(); ++i) d[i] = std::norm(s.u[i]) + weight * std::norm(s.v[i]);
  return integrate(s.grid(), d);
}

/// ||grad f||^2 for one field.
inline double gradient_norm_squared(const ComplexField& f) {
  RealField d(f.size(), 0.0);
  for (const auto& c : gradient(f))
    for (std::size_t i = 0; i < d.size(); ++i) d[i] += std::norm(c[i]);
  return integrate(f.grid(), d);
}

/// K = ||grad u||^2 + ||grad v||^2.
inline double kinetic(const StatePair& s) { return gradient_norm_squared(s.u) + gradient_norm_squared(s.v); }

/// N(u, v) = |u|^4/36 + 9|v|^4/4 + |u|^2|v|^2 + Re(conj(u)^3 v)/9.
inline double interaction_density(complex u, complex v) {
  const double a = std::norm(u), b = std::norm(v);
  const complex ub = std::conj(u);
  return a * a / 36.0 + 2.25 * b * b + a * b + (ub * ub * ub * v).real() / 9.0;
}

inline double potential(const StatePair& s) {
  RealField d(s.u.size());
  for (std::size_t i = 0; i < d.size(); ++i) d[i] = interaction_density(s.u[i], s.v[i]);
  return integrate(s.grid(), d);
}

namespace detail {
inline double energy_from(double k, double m, double p) { return 0.5 * (k + m) - p; }
} // namespace detail

/// E_mu = (K + M_mu)/2 - P with mu taken from the state.
inline double energy(const StatePair& s) {
  return detail::energy_from(kinetic(s), mass(s, s.mu), potential(s));
}

/// S = E_mu + (omega/2) M_{3 gamma}.
inline double action(const StatePair& s, double omega) {
  return energy(s) + 0.5 * omega * mass(s, 3.0 * s.gamma);
}

/// G = K - 3P.
inline double pohozaev(const StatePair& s) { return kinetic(s) - 3.0 * potential(s); }

/// All functionals from one evaluation of K, M, P.
inline FunctionalReport report(const StatePair& s, double omega = 0.0) {
  FunctionalReport r;
  r.time = s.time;
  r.omega = omega;
  r.mass_mu = mass(s, s.mu);
  r.mass_3gamma = mass(s, 3.0 * s.gamma);
  r.kinetic = kinetic(s);
  r.potential = potential(s);
  r.energy_mu = detail::energy_from(r.kinetic, r.mass_mu, r.potential);
  r.pohozaev = r.kinetic - 3.0 * r.potential;
  r.action_omega = r.energy_mu + 0.5 * omega * r.mass_3gamma;
  return r;
}

/// Im(conj(u) grad u + gamma conj(v) grad v), in the grid's gradient layout.
inline std::vector<RealField> momentum_density(const StatePair& s) {
  const auto gu = gradient(s.u);
  const auto gv = gradient(s.v);
  std::vector<RealField> out(gu.size(), RealField(s.u.size()));
  for (std::size_t a = 0; a < gu.size(); ++a)
    for (std::size_t i = 0; i < s.u.size(); ++i)
      out[a][i] = (std::conj(s.u[i]) * gu[a][i] + s.gamma * std::conj(s.v[i]) * gv[a][i]).imag();
  return out;
}

/// M_phi = 2 int grad phi . Im(conj(u) grad u + gamma conj(v) grad v).
inline double virial_quantity(const StatePair& s, const std::vector<RealField>& weight_gradient) {
  const auto p = momentum_density(s);
  if (weight_gradient.size() != p.size()) throw StructuralError("weight gradient has the wrong component count");
  RealField d(s.u.size(), 0.0);
  for (std::size_t a = 0; a < p.size(); ++a) {
    if (weight_gradient[a].size() != d.size()) throw StructuralError("weight gradient does not match grid");
    for (std::size_t i = 0; i < d.size(); ++i) d[i] += weight_gradient[a][i] * p[a][i];
  }
  return 2.0 * integrate(s.grid(), d);
}

/// int_{|x| <= R} |u|^2 + 3 gamma |v|^2, cell centres deciding membership.
inline double local_mass(const StatePair& s, double R) {
  if (!(R > 0.0)) throw ConfigurationError("local mass radius must be positive");
  const GridSpec& g = s.grid();
  const double w = 3.0 * s.gamma;
  RealField d(s.u.size());
  for (std::size_t i = 0; i < d.size(); ++i)
    d[i] = g.radius(i) <= R ? std::norm(s.u[i]) + w * std::norm(s.v[i]) : 0.0;
  return integrate(g, d);
}

/// int Im(u^3 conj(v)).
inline double flux_integral(const StatePair& s) {
  RealField d(s.u.size());
  for (std::size_t i = 0; i < d.size(); ++i) d[i] = (s.u[i] * s.u[i] * s.u[i] * std::conj(s.v[i])).imag();
  return integrate(s.grid(), d);
}

/// int |f|^p.
inline double lp_integral(const ComplexField& f, double p) {
  RealField d(f.size());
  for (std::size_t i = 0; i < d.size(); ++i) d[i] = std::pow(std::abs(f[i]), p);
  return integrate(f.grid(), d);
}

/// int_{|x| <= R} |f|^p.
inline double local_lp_integral(const ComplexField& f, double p, double R) {
  const GridSpec& g = f.grid();
  RealField d(f.size());
  for (std::size_t i = 0; i < d.size(); ++i) d[i] = g.radius(i) <= R ? std::pow(std::abs(f[i]), p) : 0.0;
  return integrate(g, d);
}

/// H^1 x H^1 distance between two states on one grid.
inline double h1_distance(const StatePair& a, const StatePair& b) {
  const ComplexField du = a.u - b.u, dv = a.v - b.v;
  return std::sqrt(norm_squared(du) + norm_squared(dv) + gradient_norm_squared(du) + gradient_norm_squared(dv));
}

/**
 * Interaction Morawetz quantity
 *   2 int int L(y) grad Theta_R(x - y) . Im(conj(u) grad u + gamma conj(v) grad v)(x) dx dy
 * with L = |u|^2 + gamma^2 |v|^2. The y integral is a linear (zero-padded)
 * convolution over the grid cells, so no periodic images enter.
 */
inline double interaction_morawetz(const StatePair& s, const MorawetzWeights& w) {
  const GridSpec& g = s.grid();
  if (g.mode() != GridMode::Cart3D) throw UnsupportedModeError("interaction Morawetz needs a Cart3D grid");
  const auto& n = g.points();
  const std::array<std::size_t, 3> m{2 * n[0], 2 * n[1], 2 * n[2]};
  const std::size_t total = m[0] * m[1] * m[2];
  auto pidx = [&](std::size_t i, std::size_t j, std::size_t k) { return (i * m[1] + j) * m[2] + k; };

  std::vector<complex> dens(total);
  for (std::size_t i = 0; i < n[0]; ++i)
    for (std::size_t j = 0; j < n[1]; ++j)
      for (std::size_t k = 0; k < n[2]; ++k) {
        const std::size_t f = (i * n[1] + j) * n[2] + k;
        dens[pidx(i, j, k)] = std::norm(s.u[f]) + s.gamma * s.gamma * std::norm(s.v[f]);
      }
  detail::dft3d(dens, m[0], m[1], m[2], FFTW_FORWARD);

  // Kernel on offsets d in (-n, n) per axis, stored cyclically modulo 2n.
  auto offset = [&](std::size_t i, std::size_t axis) {
    const auto ii = static_cast<long long>(i), mm = static_cast<long long>(m[axis]);
    const long long d = ii < mm / 2 ? ii : ii - mm;
    return static_cast<double>(d) * g.spacing(axis);
  };
  std::array<std::vector<complex>, 3> kern;
  for (auto& c : kern) c.assign(total, complex{});
  for (std::size_t i = 0; i < m[0]; ++i)
    for (std::size_t j = 0; j < m[1]; ++j)
      for (std::size_t k = 0; k < m[2]; ++k) {
        if (i == n[0] || j == n[1] || k == n[2]) continue; // offset n never occurs
        const auto gt = w.grad_theta({offset(i, 0), offset(j, 1), offset(k, 2)});
        for (std::size_t a = 0; a < 3; ++a) kern[a][pidx(i, j, k)] = gt[a];
      }

  const auto p = momentum_density(s);
  const double cell = g.spacing(0) * g.spacing(1) * g.spacing(2);
  double sum = 0.0;
  for (std::size_t a = 0; a < 3; ++a) {
    detail::dft3d(kern[a], m[0], m[1], m[2], FFTW_FORWARD);
    for (std::size_t q = 0; q < total; ++q) kern[a][q] *= dens[q] / static_cast<double>(total);
    detail::dft3d(kern[a], m[0], m[1], m[2], FFTW_BACKWARD);
    for (std::size_t i = 0; i < n[0]; ++i)
      for (std::size_t j = 0; j < n[1]; ++j)
        for (std::size_t k = 0; k < n[2]; ++k)
          sum += kern[a][pidx(i, j, k)].real() * p[a][(i * n[1] + j) * n[2] + k];
  }
  return 2.0 * sum * cell * cell;
}

} // namespace snls

#endif
