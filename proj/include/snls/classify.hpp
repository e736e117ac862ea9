#ifndef SNLS_CLASSIFY_HPP
#define SNLS_CLASSIFY_HPP

#include "snls/functionals.hpp"
#include "snls/groundstate.hpp"
#include "snls/grid.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <vector>

namespace snls {

enum class VerdictKind { GlobalScattering, BlowUp, Indeterminate };
enum class VerdictBasis { EnergyNegative, BelowThreshold, AboveThreshold, Boundary };
enum class Symmetry { Radial, Cylindrical, None };
enum class Caveat { NonRadialGammaFar };

inline const char* to_string(VerdictKind k) {
  switch (k) {
  case VerdictKind::GlobalScattering: return "GlobalScattering";
  case VerdictKind::BlowUp: return "BlowUp";
  case VerdictKind::Indeterminate: return "Indeterminate";
  }
  return "?";
}
inline const char* to_string(VerdictBasis b) {
  switch (b) {
  case VerdictBasis::EnergyNegative: return "EnergyNegative";
  case VerdictBasis::BelowThreshold: return "BelowThreshold";
  case VerdictBasis::AboveThreshold: return "AboveThreshold";
  case VerdictBasis::Boundary: return "Boundary";
  }
  return "?";
}
inline const char* to_string(Symmetry s) {
  switch (s) {
  case Symmetry::Radial: return "radial";
  case Symmetry::Cylindrical: return "cylindrical";
  case Symmetry::None: return "none";
  }
  return "?";
}
inline const char* to_string(Caveat) { return "NonRadialGammaFar"; }

inline Symmetry parse_symmetry(const std::string& s) {
  if (s == "radial") return Symmetry::Radial;
  if (s == "cylindrical") return Symmetry::Cylindrical;
  if (s == "none") return Symmetry::None;
  throw ConfigurationError("unknown symmetry '" + s + "' (radial, cylindrical, none)");
}

struct Verdict {
  VerdictKind kind = VerdictKind::Indeterminate;
  VerdictBasis basis = VerdictBasis::Boundary;
  Symmetry symmetry = Symmetry::None;
  std::vector<Caveat> caveats;
  double energy_mu = 0.0;
  double energy_product = 0.0; // E_mu M_{3 gamma}
  double gwp_product = 0.0;    // K M_{3 gamma}
  Thresholds thresholds;
};

struct SymmetryCheck {
  bool ok = true;
  double deviation = 0.0;     // max |f - shell mean| / max |f|
  double sigma3_moment = 0.0; // int z^2 (|u|^2 + |v|^2)
};

namespace detail {

// Relative spread of a field over classes of samples sharing one key.
template <class Key>
double shell_deviation(const ComplexField& f, Key key) {
  using K = decltype(key(std::size_t{}));
  std::map<K, std::pair<complex, std::size_t>> mean;
  for (std::size_t i = 0; i < f.size(); ++i) {
    auto& m = mean[key(i)];
    m.first += f[i];
    ++m.second;
  }
  const double peak = f.max_abs();
  if (!(peak > 0.0)) return 0.0;
  double dev = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    const auto& m = mean[key(i)];
    dev = std::max(dev, std::abs(f[i] - m.first / static_cast<double>(m.second)));
  }
  return dev / peak;
}

inline double z_moment(const StatePair& s) {
  const GridSpec& g = s.grid();
  RealField d(s.u.size());
  for (std::size_t i = 0; i < d.size(); ++i) {
    double z2 = 0.0;
    if (g.mode() == GridMode::Radial3D) {
      const double r = g.coordinate(0, i);
      z2 = r * r / 3.0; // angular average of z^2
    } else {
      const double z = g.position(i)[2];
      z2 = z * z;
    }
    d[i] = z2 * (std::norm(s.u[i]) + std::norm(s.v[i]));
  }
  return integrate(g, d);
}

} // namespace detail

/**
 * Numerical check of a declared symmetry. Radial data on a Cart3D grid must
 * agree with its mean over each exact lattice shell |x|^2 = const;
 * cylindrical data over each (x^2 + y^2, z) class, with a finite z-moment.
 */
inline SymmetryCheck validate_symmetry(const StatePair& s, Symmetry sym, double tol = 1e-8) {
  SymmetryCheck c;
  const GridSpec& g = s.grid();
  if (sym == Symmetry::None) return c;
  if (sym == Symmetry::Radial && g.mode() == GridMode::Cyl3D)
    throw UnsupportedModeError("radial symmetry cannot be validated on a Cyl3D grid");
  if (g.mode() == GridMode::Cart3D) {
    const auto& n = g.points();
    auto offsets = [&](std::size_t flat) {
      const auto k = static_cast<long long>(flat % n[2]) - static_cast<long long>(n[2] / 2);
      const auto j = static_cast<long long>((flat / n[2]) % n[1]) - static_cast<long long>(n[1] / 2);
      const auto i = static_cast<long long>(flat / (n[1] * n[2])) - static_cast<long long>(n[0] / 2);
      return std::array<long long, 3>{i, j, k};
    };
    if (sym == Symmetry::Radial) {
      if (g.spacing(0) != g.spacing(1) || g.spacing(0) != g.spacing(2))
        throw UnsupportedModeError("radial validation needs equal spacing on all axes");
      auto key = [&](std::size_t f) {
        const auto o = offsets(f);
        return o[0] * o[0] + o[1] * o[1] + o[2] * o[2];
      };
      c.deviation = std::max(detail::shell_deviation(s.u, key), detail::shell_deviation(s.v, key));
    } else {
      if (g.spacing(0) != g.spacing(1)) throw UnsupportedModeError("cylindrical validation needs equal x/y spacing");
      auto key = [&](std::size_t f) {
        const auto o = offsets(f);
        return std::pair<long long, long long>{o[0] * o[0] + o[1] * o[1], o[2]};
      };
      c.deviation = std::max(detail::shell_deviation(s.u, key), detail::shell_deviation(s.v, key));
    }
  }
  if (sym == Symmetry::Cylindrical) c.sigma3_moment = detail::z_moment(s);
  c.ok = c.deviation <= tol && std::isfinite(c.sigma3_moment);
  return c;
}

struct ClassifyOptions {
  double band = 1e-9;       // relative boundary band
  bool validate_symmetry = true;
};

/**
 * Threshold classification of initial data against ground-state constants.
 *
 * GlobalScattering: E M < E_gs M_gs / 2 and K M < K_gs M_gs.
 * BlowUp (radial or cylindrical data only): E_mu < 0, or E M < E_gs M_gs / 2
 * with K M > K_gs M_gs. Everything else, including products within the
 * relative band of a threshold, is Indeterminate.
 */
inline Verdict classify(const StatePair& data, const GroundStateConstants& gs, Symmetry sym,
                        const ClassifyOptions& opt = {}) {
  if (std::abs(data.gamma - gs.gamma) > 1e-12 * std::max(1.0, std::abs(gs.gamma)))
    throw ConfigurationError("data gamma does not match the ground-state gamma");
  if (opt.validate_symmetry) {
    const auto chk = validate_symmetry(data, sym);
    if (!chk.ok) throw ConfigurationError("declared symmetry fails numerical validation");
  }
  Verdict v;
  v.symmetry = sym;
  const FunctionalReport r = report(data);
  v.energy_mu = r.energy_mu;
  v.energy_product = r.energy_mu * r.mass_3gamma;
  v.gwp_product = r.kinetic * r.mass_3gamma;
  v.thresholds = threshold_constants(gs);
  const bool symmetric = sym != Symmetry::None;
  auto near = [&](double a, double b) { return std::abs(a - b) <= opt.band * std::max(std::abs(a), std::abs(b)); };

  const double energy_scale = 0.5 * (r.kinetic + r.mass_mu);
  if (r.energy_mu < 0.0 && std::abs(r.energy_mu) > opt.band * energy_scale) {
    v.basis = VerdictBasis::EnergyNegative;
    v.kind = symmetric ? VerdictKind::BlowUp : VerdictKind::Indeterminate;
    return v;
  }
  if (near(v.energy_product, v.thresholds.energy) || near(v.gwp_product, v.thresholds.gwp) ||
      (r.energy_mu <= 0.0 && energy_scale > 0.0)) {
    v.basis = VerdictBasis::Boundary;
    v.kind = VerdictKind::Indeterminate;
    return v;
  }
  const bool below_energy = v.energy_product < v.thresholds.energy;
  if (below_energy && v.gwp_product < v.thresholds.gwp) {
    v.kind = VerdictKind::GlobalScattering;
    v.basis = VerdictBasis::BelowThreshold;
    if (sym == Symmetry::None && data.gamma != 3.0) v.caveats.push_back(Caveat::NonRadialGammaFar);
    return v;
  }
  v.basis = VerdictBasis::AboveThreshold;
  v.kind = below_energy && symmetric ? VerdictKind::BlowUp : VerdictKind::Indeterminate;
  return v;
}

} // namespace snls

#endif
