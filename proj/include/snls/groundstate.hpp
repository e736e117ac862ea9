#ifndef SNLS_GROUNDSTATE_HPP
#define SNLS_GROUNDSTATE_HPP

#include "snls/functionals.hpp"
#include "snls/grid.hpp"
#include "snls/spectral.hpp"

#include <array>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace snls {

/// Seed is zero, non-finite, or has no positive interaction.
class SeedError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Iteration budget exhausted; carries the residual history.
class ConvergenceError : public std::runtime_error {
public:
  ConvergenceError(const std::string& what, std::vector<double> history)
      : std::runtime_error(what), history_(std::move(history)) {}
  const std::vector<double>& history() const { return history_; }

private:
  std::vector<double> history_;
};

/// Iteration collapsed to the zero pair.
class TrivialityError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Ground-state constants at omega = 0, mu = 3 gamma.
struct GroundStateConstants {
  double gamma = 3.0;
  double K_gs = 0.0;
  double M_gs = 0.0; // M_{3 gamma}
  double E_gs = 0.0; // E_{3 gamma}
  double P_gs = 0.0;
  double C_opt = 0.0;
};

struct GroundStateOptions {
  double tol = 1e-8;
  std::size_t max_iter = 5000;
};

struct GroundStateSolution {
  ComplexField phi;
  ComplexField psi;
  double gamma = 3.0;
  double omega = 0.0;
  double mu_eff = 9.0;
  double residual_1 = 0.0;
  double residual_2 = 0.0;
  std::size_t iterations = 0;
  bool semi_trivial = false; // phi vanished: the (0, g) branch
  std::vector<double> residual_history; // max(residual_1, residual_2) per iteration
  std::vector<std::string> warnings;
  GroundStateConstants constants;
  double tolerance = 1e-8;

  bool converged() const { return residual_1 <= tolerance && residual_2 <= tolerance; }
  StatePair state() const { return StatePair(phi, psi, gamma, mu_eff); }
};

namespace detail {

inline double l2_norm(const ComplexField& f) { return std::sqrt(norm_squared(f)); }

inline double inner_real(const ComplexField& a, const ComplexField& b) {
  RealField d(a.size());
  for (std::size_t i = 0; i < d.size(); ++i) d[i] = (std::conj(a[i]) * b[i]).real();
  return integrate(a.grid(), d);
}

// Nonlinearities of the elliptic system for real f, g.
inline std::pair<ComplexField, ComplexField> elliptic_nonlinearity(const ComplexField& f, const ComplexField& g) {
  ComplexField n1(f.grid()), n2(f.grid());
  for (std::size_t i = 0; i < f.size(); ++i) {
    const complex a = f[i], b = g[i];
    n1[i] = (std::norm(a) / 9.0 + 2.0 * std::norm(b)) * a + std::conj(a) * std::conj(a) * b / 3.0;
    n2[i] = (9.0 * std::norm(b) + 2.0 * std::norm(a)) * b + a * a * a / 9.0;
  }
  return {std::move(n1), std::move(n2)};
}

} // namespace detail

/**
 * L^2 norms of the two residuals
 *   Delta f - f + (f^2/9 + 2 g^2) f + f^2 g / 3,
 *   Delta g - 3 gamma g + (9 g^2 + 2 f^2) g + f^3 / 9.
 */
inline std::pair<double, double> elliptic_residual(const ComplexField& f, const ComplexField& g, double gamma) {
  if (!(f.grid() == g.grid())) throw StructuralError("candidate components live on different grids");
  auto [n1, n2] = detail::elliptic_nonlinearity(f, g);
  ComplexField r1 = laplacian(f), r2 = laplacian(g);
  for (std::size_t i = 0; i < f.size(); ++i) {
    r1[i] += n1[i] - f[i];
    r2[i] += n2[i] - 3.0 * gamma * g[i];
  }
  return {detail::l2_norm(r1), detail::l2_norm(r2)};
}

inline GroundStateConstants constants_of(const StatePair& s) {
  GroundStateConstants c;
  c.gamma = s.gamma;
  c.K_gs = kinetic(s);
  c.M_gs = mass(s, 3.0 * s.gamma);
  c.P_gs = potential(s);
  c.E_gs = 0.5 * (c.K_gs + c.M_gs) - c.P_gs;
  c.C_opt = c.K_gs > 0.0 && c.M_gs > 0.0 ? 1.0 / (3.0 * std::sqrt(c.K_gs * c.M_gs)) : 0.0;
  return c;
}

/**
 * Petviashvili iteration for the elliptic system at omega = 0, mu = 3 gamma on
 * a radial grid:
 *   (f, g) <- m^{3/2} ((1 - Delta)^{-1} N1, (3 gamma - Delta)^{-1} N2),
 *   m = (<f, L1 f> + <g, L2 g>) / (<f, N1> + <g, N2>).
 * Default seed (3 e^{-r^2}, e^{-r^2}).
 */
inline GroundStateSolution solve_ground_state(double gamma, const GridSpec& grid,
                                              std::optional<std::pair<ComplexField, ComplexField>> seed = {},
                                              const GroundStateOptions& opt = {}) {
  if (!(gamma > 0.0)) throw ConfigurationError("gamma must be positive");
  if (grid.mode() != GridMode::Radial3D) throw UnsupportedModeError("ground states are solved on a radial grid");
  const double mu = 3.0 * gamma;

  GroundStateSolution sol{ComplexField(grid), ComplexField(grid)};
  sol.gamma = gamma;
  sol.mu_eff = mu;
  sol.tolerance = opt.tol;
  if (std::exp(-grid.extent(0)) > 1e-10)
    sol.warnings.push_back("radial extent too small for e^{-r} decay below 1e-10");

  ComplexField f = ComplexField::from_function(grid, [](const auto& x) { return complex(3.0 * std::exp(-x[0] * x[0])); });
  ComplexField g = ComplexField::from_function(grid, [](const auto& x) { return complex(std::exp(-x[0] * x[0])); });
  if (seed) {
    if (!(seed->first.grid() == grid) || !(seed->second.grid() == grid))
      throw StructuralError("seed does not match the grid");
    f = seed->first;
    g = seed->second;
    for (std::size_t i = 0; i < f.size(); ++i) {
      f[i] = f[i].real();
      g[i] = g[i].real();
    }
  }
  if (!f.all_finite() || !g.all_finite()) throw SeedError("seed contains non-finite samples");
  const double seed_norm = detail::l2_norm(f) + detail::l2_norm(g);
  if (!(seed_norm > 0.0)) throw SeedError("seed is the zero pair");

  const auto ks = wavevectors(grid);
  std::vector<complex> inv1(ks.size()), inv2(ks.size()), op1(ks.size()), op2(ks.size());
  for (std::size_t i = 0; i < ks.size(); ++i) {
    const double k2 = k_squared(ks[i]);
    op1[i] = 1.0 + k2;
    op2[i] = mu + k2;
    inv1[i] = 1.0 / (1.0 + k2);
    inv2[i] = 1.0 / (mu + k2);
  }

  for (std::size_t it = 1; it <= opt.max_iter; ++it) {
    auto [n1, n2] = detail::elliptic_nonlinearity(f, g);
    const double num = detail::inner_real(f, apply_multiplier(f, std::span<const complex>(op1))) +
                       detail::inner_real(g, apply_multiplier(g, std::span<const complex>(op2)));
    const double den = detail::inner_real(f, n1) + detail::inner_real(g, n2);
    if (!(den > 0.0) || !std::isfinite(num)) {
      if (it == 1) throw SeedError("seed has no positive interaction after normalization");
      throw TrivialityError("iteration lost its positive interaction");
    }
    const double scale = std::pow(num / den, 1.5);
    f = apply_multiplier(n1, std::span<const complex>(inv1));
    g = apply_multiplier(n2, std::span<const complex>(inv2));
    f *= scale;
    g *= scale;
    for (std::size_t i = 0; i < f.size(); ++i) {
      f[i] = f[i].real();
      g[i] = g[i].real();
    }
    if (!f.all_finite() || !g.all_finite()) throw ConvergenceError("iteration produced non-finite values", sol.residual_history);
    if (detail::l2_norm(f) + detail::l2_norm(g) < 1e-12 * seed_norm) throw TrivialityError("iteration collapsed to the zero pair");

    const auto [r1, r2] = elliptic_residual(f, g, gamma);
    sol.residual_history.push_back(std::max(r1, r2));
    sol.iterations = it;
    sol.residual_1 = r1;
    sol.residual_2 = r2;
    if (r1 <= opt.tol && r2 <= opt.tol) break;
  }
  if (!(sol.residual_1 <= opt.tol && sol.residual_2 <= opt.tol))
    throw ConvergenceError("ground-state iteration did not reach the tolerance", sol.residual_history);

  const double nf = detail::l2_norm(f), ng = detail::l2_norm(g);
  if (!(nf + ng > 0.0)) throw TrivialityError("solution is the zero pair");
  sol.semi_trivial = ng > 0.0 && nf / ng < 1e-6;
  sol.phi = std::move(f);
  sol.psi = std::move(g);
  sol.constants = constants_of(sol.state());
  return sol;
}

/// Pohozaev ratios |P/E - 1|, |E/M - 1|, |K/(3P) - 1|.
struct PohozaevReport {
  double p_over_e = 0.0;
  double e_over_m = 0.0;
  double k_over_3p = 0.0;
  double max() const { return std::max({p_over_e, e_over_m, k_over_3p}); }
};

inline PohozaevReport pohozaev_report(const GroundStateConstants& c) {
  return {std::abs(c.P_gs / c.E_gs - 1.0), std::abs(c.E_gs / c.M_gs - 1.0), std::abs(c.K_gs / (3.0 * c.P_gs) - 1.0)};
}

/// P / (K^{3/2} M^{1/2}), the second expression for C_opt.
inline double gn_constant_from_potential(const GroundStateConstants& c) {
  return c.P_gs / (std::pow(c.K_gs, 1.5) * std::sqrt(c.M_gs));
}

/// C_opt = (1/3)(K_gs M_gs)^{-1/2}, cross-checked against P/(K^{3/2} M^{1/2}).
inline double gn_constant(const GroundStateSolution& gs) {
  if (!gs.converged()) throw ConvergenceError("ground state is not converged", gs.residual_history);
  const double a = gs.constants.C_opt;
  const double b = gn_constant_from_potential(gs.constants);
  if (std::abs(a - b) > 1e-3 * std::abs(a))
    throw ConvergenceError("the two C_opt expressions disagree beyond 1e-3", gs.residual_history);
  return a;
}

struct Thresholds {
  double gwp = 0.0;    // K_gs M_gs
  double energy = 0.0; // E_gs M_gs / 2
};

inline Thresholds threshold_constants(const GroundStateConstants& c) {
  return {c.K_gs * c.M_gs, 0.5 * c.E_gs * c.M_gs};
}

inline Thresholds threshold_constants(const GroundStateSolution& gs) {
  if (!gs.converged()) throw ConvergenceError("ground state is not converged", gs.residual_history);
  return threshold_constants(gs.constants);
}

using Boost = std::array<double, 3>;

/// (e^{i x.xi} f) on a Cart3D grid; the identity for xi = 0 on any grid.
inline ComplexField phase_boost(const ComplexField& f, const Boost& xi, double charge = 1.0) {
  if (xi[0] == 0.0 && xi[1] == 0.0 && xi[2] == 0.0) return f;
  if (f.grid().mode() != GridMode::Cart3D) throw UnsupportedModeError("phase boosts need a Cart3D grid");
  ComplexField out = f;
  for (std::size_t i = 0; i < out.size(); ++i) {
    const auto x = out.grid().position(i);
    out[i] *= std::polar(1.0, charge * (x[0] * xi[0] + x[1] * xi[1] + x[2] * xi[2]));
  }
  return out;
}

struct RefinedGnCheck {
  Boost xi1{}, xi2{};
  double lhs = 0.0; // P(|f|, |g|)
  double rhs = 0.0;
  bool holds = true;
};

struct GnReport {
  double potential = 0.0;
  double bound = 0.0; // C_opt K^{3/2} M^{1/2}
  double slack = 0.0; // 1 - P / bound (0 when bound = 0)
  bool holds = true;
  std::vector<RefinedGnCheck> refined;
};

/**
 * Sharp GN: P(f,g) <= C_opt K^{3/2} M_{3 gamma}^{1/2} (1 + 1e-6).
 * Refined: P(|f|,|g|) <= (1/3) sqrt(K M / (K_gs M_gs)) K(e^{ix.xi1} f, e^{ix.xi2} g).
 */
inline GnReport gn_test(const StatePair& sample, const GroundStateConstants& gs,
                        const std::vector<std::pair<Boost, Boost>>& boosts = {}) {
  GnReport rep;
  const double k = kinetic(sample);
  const double m = mass(sample, 3.0 * sample.gamma);
  rep.potential = potential(sample);
  rep.bound = gs.C_opt * std::pow(k, 1.5) * std::sqrt(m);
  rep.slack = rep.bound > 0.0 ? 1.0 - rep.potential / rep.bound : 0.0;
  rep.holds = rep.potential <= rep.bound * (1.0 + 1e-6);

  if (!boosts.empty()) {
    ComplexField au(sample.grid()), av(sample.grid());
    for (std::size_t i = 0; i < au.size(); ++i) {
      au[i] = std::abs(sample.u[i]);
      av[i] = std::abs(sample.v[i]);
    }
    const double lhs = potential(StatePair(au, av, sample.gamma, sample.mu));
    const double pref = std::sqrt(k * m / (gs.K_gs * gs.M_gs)) / 3.0;
    for (const auto& [xi1, xi2] : boosts) {
      RefinedGnCheck c{xi1, xi2, lhs, 0.0, true};
      const StatePair b(phase_boost(sample.u, xi1), phase_boost(sample.v, xi2), sample.gamma, sample.mu);
      c.rhs = pref * kinetic(b);
      c.holds = c.lhs <= c.rhs * (1.0 + 1e-6);
      rep.holds = rep.holds && c.holds;
      rep.refined.push_back(c);
    }
  }
  return rep;
}

} // namespace snls

#endif
