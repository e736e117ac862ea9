#ifndef SNLS_EVOLUTION_HPP
#define SNLS_EVOLUTION_HPP

#include "snls/functionals.hpp"
#include "snls/grid.hpp"
#include "snls/spectral.hpp"
#include "snls/weights.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace snls {

/// Non-finite values produced during time stepping.
class NumericalFault : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

namespace detail {

inline void nonlinear_rhs(complex u, complex v, double inv_gamma, complex& du, complex& dv) {
  const double a = std::norm(u), b = std::norm(v);
  const complex ub = std::conj(u);
  const complex f1 = (a / 9.0 + 2.0 * b) * u + ub * ub * v / 3.0;
  const complex f2 = (9.0 * b + 2.0 * a) * v + u * u * u / 9.0;
  du = complex(-f1.imag(), f1.real());
  dv = complex(-f2.imag(), f2.real()) * inv_gamma;
}

// Pointwise RK4 with four internal substeps of dt / 4.
inline void nonlinear_flow(StatePair& s, double dt) {
  const double h = dt / 4.0;
  const double ig = 1.0 / s.gamma;
  bool finite = true;
  for (std::size_t i = 0; i < s.u.size(); ++i) {
    complex u = s.u[i], v = s.v[i];
    for (int sub = 0; sub < 4; ++sub) {
      complex k1u, k1v, k2u, k2v, k3u, k3v, k4u, k4v;
      nonlinear_rhs(u, v, ig, k1u, k1v);
      nonlinear_rhs(u + 0.5 * h * k1u, v + 0.5 * h * k1v, ig, k2u, k2v);
      nonlinear_rhs(u + 0.5 * h * k2u, v + 0.5 * h * k2v, ig, k3u, k3v);
      nonlinear_rhs(u + h * k3u, v + h * k3v, ig, k4u, k4v);
      u += h / 6.0 * (k1u + 2.0 * k2u + 2.0 * k3u + k4u);
      v += h / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
    }
    finite = finite && std::isfinite(u.real()) && std::isfinite(u.imag()) && std::isfinite(v.real()) &&
             std::isfinite(v.imag());
    s.u[i] = u;
    s.v[i] = v;
  }
  if (!finite) throw NumericalFault("nonlinear substep produced non-finite values");
}

} // namespace detail

/**
 * Split-step integrator with cached linear propagator factors:
 *   u_hat *= exp(-i dt (|k|^2 + 1)),  v_hat *= exp(-i (dt/gamma)(|k|^2 + mu)).
 */
class SplitStepper {
public:
  SplitStepper(const GridSpec& grid, double gamma, double mu) : grid_(grid), gamma_(gamma), mu_(mu) {
    const auto ks = wavevectors(grid);
    k2_.resize(ks.size());
    for (std::size_t i = 0; i < ks.size(); ++i) k2_[i] = k_squared(ks[i]);
  }

  void linear(StatePair& s, double dt) {
    check(s);
    if (dt == 0.0) return;
    if (dt != cached_dt_) {
      fu_.resize(k2_.size());
      fv_.resize(k2_.size());
      for (std::size_t i = 0; i < k2_.size(); ++i) {
        fu_[i] = std::polar(1.0, -dt * (k2_[i] + 1.0));
        fv_[i] = std::polar(1.0, -dt / gamma_ * (k2_[i] + mu_));
      }
      cached_dt_ = dt;
    }
    apply(s.u, fu_);
    apply(s.v, fv_);
  }

  void nonlinear(StatePair& s, double dt) {
    check(s);
    detail::nonlinear_flow(s, dt);
  }

  /// N(dt/2) L(dt) N(dt/2); advances the state's time by dt.
  void strang(StatePair& s, double dt) {
    nonlinear(s, 0.5 * dt);
    linear(s, dt);
    nonlinear(s, 0.5 * dt);
    s.time += dt;
  }

private:
  void check(const StatePair& s) const {
    if (!(s.grid() == grid_) || s.gamma != gamma_ || s.mu != mu_)
      throw StructuralError("state does not match the stepper's grid or parameters");
  }
  void apply(ComplexField& f, const std::vector<complex>& factors) const {
    to_spectral(grid_, f.samples());
    for (std::size_t i = 0; i < factors.size(); ++i) f[i] *= factors[i];
    from_spectral(grid_, f.samples());
  }

  GridSpec grid_;
  double gamma_, mu_;
  std::vector<double> k2_;
  std::vector<complex> fu_, fv_;
  double cached_dt_ = std::numeric_limits<double>::quiet_NaN();
};

/// Exact linear flow over dt.
inline StatePair linear_step(StatePair s, double dt) {
  SplitStepper(s.grid(), s.gamma, s.mu).linear(s, dt);
  s.time += dt;
  return s;
}

/// Pointwise nonlinear flow over dt (RK4, four substeps).
inline StatePair nonlinear_step(StatePair s, double dt) {
  detail::nonlinear_flow(s, dt);
  s.time += dt;
  return s;
}

inline StatePair strang_step(StatePair s, double dt) {
  SplitStepper(s.grid(), s.gamma, s.mu).strang(s, dt);
  return s;
}

/// (S_1(-t) u, S_2(-t) v): the state pulled back along the linear flow.
inline StatePair scattering_profile(StatePair s, double t) {
  SplitStepper(s.grid(), s.gamma, s.mu).linear(s, -t);
  return s;
}

struct BoostParams {
  std::array<double, 3> xi{};
};

/**
 * Galilean map at time t on a Cart3D grid:
 *   u -> e^{i x.xi} e^{-i t |xi|^2} u(x - 2 t xi),
 *   v -> e^{3 i x.xi} e^{-3 i t |xi|^2} v(x - 2 t xi).
 * The translation is a Fourier phase; xi should be a multiple of pi / L per
 * axis so the phases are periodic.
 */
inline StatePair galilean_boost(const StatePair& s, const BoostParams& b, double t) {
  const GridSpec& g = s.grid();
  if (g.mode() != GridMode::Cart3D) throw UnsupportedModeError("Galilean boosts need a Cart3D grid");
  const auto& xi = b.xi;
  const double xi2 = xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2];
  StatePair out = s;
  if (t != 0.0) {
    const std::array<double, 3> shift{2.0 * t * xi[0], 2.0 * t * xi[1], 2.0 * t * xi[2]};
    auto translate = [&](ComplexField& f) {
      f = apply_multiplier(f, [&](const Wavevector& k) {
        return std::polar(1.0, -(k[0] * shift[0] + k[1] * shift[1] + k[2] * shift[2]));
      });
    };
    translate(out.u);
    translate(out.v);
  }
  for (std::size_t i = 0; i < out.u.size(); ++i) {
    const auto x = g.position(i);
    const double phase = x[0] * xi[0] + x[1] * xi[1] + x[2] * xi[2];
    out.u[i] *= std::polar(1.0, phase - t * xi2);
    out.v[i] *= std::polar(1.0, 3.0 * phase - 3.0 * t * xi2);
  }
  return out;
}

/// Fires once K(t) >= trigger K(t_first).
class BlowupDetector {
public:
  explicit BlowupDetector(double trigger = 100.0) : trigger_(trigger) {}

  bool observe(double t, double k) {
    if (!k0_) k0_ = k;
    if (!fired_ && *k0_ > 0.0 && k >= trigger_ * *k0_) {
      fired_ = true;
      fire_time_ = t;
    }
    return fired_;
  }
  bool fired() const { return fired_; }
  double fire_time() const { return fire_time_; }
  double trigger() const { return trigger_; }

private:
  double trigger_;
  std::optional<double> k0_;
  bool fired_ = false;
  double fire_time_ = std::numeric_limits<double>::quiet_NaN();
};

inline const std::set<std::string>& known_monitors() {
  static const std::set<std::string> names{"virial", "local_mass", "l5", "g_eps_k", "morawetz", "l103", "flux", "k_bound"};
  return names;
}

struct AdaptConfig {
  bool enabled = false;
  double trigger = 2.0;   // halve dt when K grows by this factor since the last halving
  double dt_floor = 1e-7;
};

struct EvolutionConfig {
  double dt = 1e-3;
  double t_end = 1.0;
  std::size_t output_stride = 10;
  AdaptConfig adapt;
  double blowup_trigger = 100.0;
  double epsilon = 0.25;    // G + epsilon K monitor
  double omega = 0.0;       // for the reported action
  std::set<std::string> monitors;
  double virial_R = 0.0;
  double local_mass_R = 0.0;
  double morawetz_R = 0.0;
  double morawetz_sigma = 0.1;
  double local_lp_R = 0.0;  // L^{10/3} average is taken over |x| <= R/2
  std::function<void(const StatePair&)> on_report; // called at every report

  void validate() const {
    if (!(dt > 0.0)) throw ConfigurationError("dt must be positive");
    if (!(t_end > 0.0)) throw ConfigurationError("t_end must be positive");
    if (output_stride == 0) throw ConfigurationError("output_stride must be at least 1");
    if (adapt.enabled && !(adapt.dt_floor < dt)) throw ConfigurationError("dt_floor must be below dt");
    if (adapt.enabled && !(adapt.trigger > 1.0)) throw ConfigurationError("adaptivity trigger must exceed 1");
    if (!(blowup_trigger > 1.0)) throw ConfigurationError("blow-up trigger must exceed 1");
    for (const auto& m : monitors)
      if (!known_monitors().contains(m)) throw ConfigurationError("unknown monitor '" + m + "'");
    if (monitors.contains("virial") && !(virial_R > 0.0)) throw ConfigurationError("virial monitor needs virial_R > 0");
    if (monitors.contains("local_mass") && !(local_mass_R > 0.0))
      throw ConfigurationError("local_mass monitor needs local_mass_R > 0");
    if (monitors.contains("morawetz") && !(morawetz_R > 0.0))
      throw ConfigurationError("morawetz monitor needs morawetz_R > 0");
    if (monitors.contains("l103") && !(local_lp_R > 0.0)) throw ConfigurationError("l103 monitor needs local_lp_R > 0");
  }
};

enum class Termination { HorizonReached, BlowUpDetected, DtFloor, NumericalFault };

inline const char* to_string(Termination t) {
  switch (t) {
  case Termination::HorizonReached: return "horizon_reached";
  case Termination::BlowUpDetected: return "blowup_detected";
  case Termination::DtFloor: return "dt_floor";
  case Termination::NumericalFault: return "numerical_fault";
  }
  return "?";
}

/**
 * Time series of reports and monitors. Every series in monitor_series has
 * one value per report. Always present: mass_drift, energy_drift (relative
 * to t = 0) and dt. Monitor columns follow the enabled monitor names; the
 * virial monitor also fills "z", the l5 monitor "l5_density".
 */
struct TrajectoryRecord {
  std::vector<FunctionalReport> reports;
  std::map<std::string, std::vector<double>> monitor_series;
  std::vector<double> z_series;
  bool blowup_fired = false;
  double blowup_time = std::numeric_limits<double>::quiet_NaN();
  Termination termination = Termination::HorizonReached;
  std::string fault_message;
  std::vector<std::string> warnings;
  std::optional<StatePair> final_state;
  std::size_t steps = 0;
  double final_dt = 0.0;

  std::vector<double> times() const {
    std::vector<double> t;
    t.reserve(reports.size());
    for (const auto& r : reports) t.push_back(r.time);
    return t;
  }
  const std::vector<double>& series(const std::string& name) const {
    auto it = monitor_series.find(name);
    if (it == monitor_series.end()) throw ConfigurationError("unknown series '" + name + "'");
    return it->second;
  }
};

namespace detail {

class MonitorSet {
public:
  MonitorSet(const StatePair& s0, const EvolutionConfig& cfg) : cfg_(cfg) {
    const GridSpec& g = s0.grid();
    if (cfg.monitors.contains("virial")) {
      weight_ = g.mode() == GridMode::Cyl3D ? cylindrical_weight(cfg.virial_R, g) : radial_virial_weight(cfg.virial_R, g);
    }
    if (cfg.monitors.contains("morawetz")) {
      if (g.mode() != GridMode::Cart3D) throw UnsupportedModeError("morawetz monitor needs a Cart3D grid");
      morawetz_ = build_morawetz_weights(cfg.morawetz_R, cfg.morawetz_sigma, g, false);
    }
  }

  void record(const StatePair& s, TrajectoryRecord& rec) {
    const FunctionalReport r = report(s, cfg_.omega);
    if (rec.reports.empty()) {
      m0_ = r.mass_3gamma;
      e0_ = r.energy_mu;
    }
    const double t_prev = rec.reports.empty() ? r.time : rec.reports.back().time;
    rec.reports.push_back(r);
    auto& ms = rec.monitor_series;
    ms["mass_drift"].push_back(m0_ != 0.0 ? (r.mass_3gamma - m0_) / m0_ : r.mass_3gamma);
    ms["energy_drift"].push_back((r.energy_mu - e0_) / std::max(1.0, std::abs(e0_)));
    ms["dt"].push_back(dt_);
    const auto& on = cfg_.monitors;
    if (on.contains("virial")) {
      const double m = virial_quantity(s, weight_->gradient);
      ms["virial"].push_back(m);
      // z(t) = int_{t0}^t |M|^2, t0 the first report with M < 0.
      if (!z_started_ && m < 0.0) z_started_ = true;
      else if (z_started_) z_ += 0.5 * (r.time - t_prev) * (m * m + last_virial_ * last_virial_);
      last_virial_ = m;
      ms["z"].push_back(z_);
      rec.z_series.push_back(z_);
    }
    if (on.contains("local_mass")) ms["local_mass"].push_back(local_mass(s, cfg_.local_mass_R));
    if (on.contains("l5")) {
      const double d = lp_integral(s.u, 5.0) + lp_integral(s.v, 5.0);
      l5_ += (r.time - t_prev) * d;
      ms["l5_density"].push_back(d);
      ms["l5"].push_back(l5_);
    }
    if (on.contains("g_eps_k")) ms["g_eps_k"].push_back(r.pohozaev + cfg_.epsilon * r.kinetic);
    if (on.contains("morawetz")) ms["morawetz"].push_back(interaction_morawetz(s, *morawetz_));
    if (on.contains("l103")) {
      const double R = 0.5 * cfg_.local_lp_R;
      ms["l103"].push_back(local_lp_integral(s.u, 10.0 / 3.0, R) + local_lp_integral(s.v, 10.0 / 3.0, R));
    }
    if (on.contains("flux")) ms["flux"].push_back(flux_integral(s));
    if (on.contains("k_bound")) {
      if (rec.reports.size() == 1) six_e0_ = 6.0 * r.energy_mu;
      ms["k_bound"].push_back(six_e0_ != 0.0 ? r.kinetic / six_e0_ : 0.0);
    }
    if (cfg_.on_report) cfg_.on_report(s);
  }

  void set_dt(double dt) { dt_ = dt; }

private:
  const EvolutionConfig& cfg_;
  std::optional<VirialWeight> weight_;
  std::optional<MorawetzWeights> morawetz_;
  double m0_ = 0.0, e0_ = 0.0, six_e0_ = 0.0;
  double dt_ = 0.0;
  bool z_started_ = false;
  double z_ = 0.0, last_virial_ = 0.0, l5_ = 0.0;
};

} // namespace detail

/**
 * Strang-split evolution to t_end with periodic reports and monitors.
 *
 * With adaptivity the step is halved whenever K has grown by adapt.trigger
 * since the last halving; falling below dt_floor ends the run (DtFloor,
 * counted as a blow-up signal). The detector fires when K >= blowup_trigger K(0).
 * A numerical fault ends the run with termination NumericalFault.
 */
inline TrajectoryRecord evolve(StatePair state, const EvolutionConfig& cfg) {
  cfg.validate();
  TrajectoryRecord rec;
  for (const auto* f : {&state.u, &state.v}) {
    const auto margin = support_margin(*f);
    if (!margin.ok)
      rec.warnings.push_back("support margin: boundary/peak ratio " + std::to_string(margin.boundary_ratio));
  }
  detail::MonitorSet monitors(state, cfg);
  SplitStepper stepper(state.grid(), state.gamma, state.mu);
  BlowupDetector detector(cfg.blowup_trigger);

  double dt = cfg.dt;
  monitors.set_dt(dt);
  monitors.record(state, rec);
  double k_ref = rec.reports.front().kinetic;
  detector.observe(state.time, k_ref);
  const double t_start = state.time;
  const double t_stop = t_start + cfg.t_end;
  std::size_t since_report = 0;

  try {
    while (t_stop - state.time > 1e-12 * std::max(1.0, std::abs(t_stop))) {
      const double h = std::min(dt, t_stop - state.time);
      stepper.strang(state, h);
      ++rec.steps;
      ++since_report;
      bool stop = false;
      if (cfg.adapt.enabled) {
        const double k = kinetic(state);
        if (detector.observe(state.time, k)) {
          rec.termination = Termination::BlowUpDetected;
          stop = true;
        } else if (k >= cfg.adapt.trigger * k_ref && k_ref > 0.0) {
          dt *= 0.5;
          k_ref = k;
          monitors.set_dt(dt);
          if (dt < cfg.adapt.dt_floor) {
            rec.termination = Termination::DtFloor;
            stop = true;
          }
        }
      }
      const bool at_end = !(t_stop - state.time > 1e-12 * std::max(1.0, std::abs(t_stop)));
      if (stop || at_end || since_report >= cfg.output_stride) {
        monitors.record(state, rec);
        since_report = 0;
        if (!cfg.adapt.enabled && detector.observe(state.time, rec.reports.back().kinetic)) {
          rec.termination = Termination::BlowUpDetected;
          stop = true;
        }
      }
      if (stop) break;
    }
  } catch (const NumericalFault& e) {
    rec.termination = Termination::NumericalFault;
    rec.fault_message = e.what();
  }
  rec.blowup_fired = rec.termination == Termination::BlowUpDetected || rec.termination == Termination::DtFloor;
  if (rec.blowup_fired) rec.blowup_time = detector.fired() ? detector.fire_time() : state.time;
  rec.final_dt = dt;
  rec.final_state = std::move(state);
  return rec;
}

struct VirialRateReport {
  std::size_t samples = 0;
  double max_relative_error = 0.0; // max |dM/dt - 8G| / |8G| over interior reports
  double max_absolute_error = 0.0;
  double fitted_C = 0.0;           // smallest C with dM/dt <= 8G + C (R^-p K + R^-2)
};

/**
 * Central-difference d/dt of a virial series against 8G. For localized
 * weights the one-sided estimate dM/dt <= 8G + C(R^{-p} K + R^{-2}) is fitted,
 * p = 2 for radial runs and p = 1 for cylindrical runs.
 */
inline VirialRateReport virial_rate_check(const std::vector<double>& t, const std::vector<double>& m,
                                          const std::vector<double>& g, const std::vector<double>& k,
                                          double R = 0.0, double p = 2.0) {
  if (t.size() < 3 || m.size() != t.size() || g.size() != t.size() || k.size() != t.size())
    throw ConfigurationError("virial rate check needs at least 3 aligned samples");
  VirialRateReport rep;
  for (std::size_t i = 1; i + 1 < t.size(); ++i) {
    const double rate = (m[i + 1] - m[i - 1]) / (t[i + 1] - t[i - 1]);
    const double err = rate - 8.0 * g[i];
    rep.max_absolute_error = std::max(rep.max_absolute_error, std::abs(err));
    if (g[i] != 0.0) rep.max_relative_error = std::max(rep.max_relative_error, std::abs(err) / std::abs(8.0 * g[i]));
    if (R > 0.0) {
      const double env = std::pow(R, -p) * k[i] + std::pow(R, -2.0);
      rep.fitted_C = std::max(rep.fitted_C, err / env);
    }
    ++rep.samples;
  }
  return rep;
}

inline VirialRateReport virial_rate_check(const TrajectoryRecord& rec, double R = 0.0, double p = 2.0) {
  std::vector<double> g, k;
  for (const auto& r : rec.reports) {
    g.push_back(r.pohozaev);
    k.push_back(r.kinetic);
  }
  return virial_rate_check(rec.times(), rec.series("virial"), g, k, R, p);
}

/// ODE comparison z' >= A^2 z^2 from M <= -A z: A fitted, t* = t1 + 1 / (A^2 z(t1)).
struct BlowupEstimate {
  bool valid = false;
  double t0 = 0.0;
  double t1 = 0.0;
  double A = 0.0;
  double z1 = 0.0;
  double t_star = std::numeric_limits<double>::infinity();
};

inline BlowupEstimate blowup_estimate(const std::vector<double>& t, const std::vector<double>& virial) {
  BlowupEstimate est;
  std::size_t start = t.size();
  for (std::size_t i = 0; i < t.size(); ++i)
    if (virial[i] < 0.0) {
      start = i;
      break;
    }
  if (start + 1 >= t.size()) return est;
  est.t0 = t[start];
  double z = 0.0;
  double a = std::numeric_limits<double>::infinity();
  for (std::size_t i = start + 1; i < t.size(); ++i) {
    z += 0.5 * (t[i] - t[i - 1]) * (virial[i] * virial[i] + virial[i - 1] * virial[i - 1]);
    if (virial[i] >= 0.0) return est;
    a = std::min(a, -virial[i] / z);
  }
  est.valid = std::isfinite(a) && a > 0.0 && z > 0.0;
  est.A = a;
  est.t1 = t.back();
  est.z1 = z;
  if (est.valid) est.t_star = est.t1 + 1.0 / (a * a * z);
  return est;
}

struct MorawetzMonitorReport {
  double time_average_l103 = 0.0; // (1/T) int_0^T int_{|x|<=R/2} |u|^{10/3} + |v|^{10/3}
  double envelope_C = 0.0;        // average / (R/T + R^{-2})
  double max_morawetz_over_R = 0.0;
};

inline MorawetzMonitorReport morawetz_monitor(const TrajectoryRecord& rec, double R) {
  MorawetzMonitorReport rep;
  const auto t = rec.times();
  if (t.size() < 2) return rep;
  const double T = t.back() - t.front();
  if (auto it = rec.monitor_series.find("l103"); it != rec.monitor_series.end() && T > 0.0) {
    double acc = 0.0;
    for (std::size_t i = 1; i < t.size(); ++i) acc += 0.5 * (t[i] - t[i - 1]) * (it->second[i] + it->second[i - 1]);
    rep.time_average_l103 = acc / T;
    rep.envelope_C = rep.time_average_l103 / (R / T + 1.0 / (R * R));
  }
  if (auto it = rec.monitor_series.find("morawetz"); it != rec.monitor_series.end())
    for (double m : it->second) rep.max_morawetz_over_R = std::max(rep.max_morawetz_over_R, std::abs(m) / R);
  return rep;
}

/// Discrete L^5_{t,x} norm of the pair over reports with t_a < t <= t_b (right-endpoint rule).
inline double spacetime_norm_window(const TrajectoryRecord& rec, double t_a, double t_b) {
  const auto& d = rec.series("l5_density");
  const auto t = rec.times();
  double acc = 0.0;
  for (std::size_t i = 1; i < t.size(); ++i)
    if (t[i] > t_a && t[i] <= t_b) acc += (t[i] - t[i - 1]) * d[i];
  return std::pow(acc, 0.2);
}

} // namespace snls

#endif
