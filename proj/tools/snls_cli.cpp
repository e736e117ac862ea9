#include "snls/config.hpp"
#include "snls/snls.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <optional>
#include <random>
#include <sstream>
#include <string>

namespace fs = std::filesystem;
using namespace snls;

namespace {

struct Options {
  std::string config_path;
  std::string out_dir;
  std::string seed_snapshot;
  std::string trajectory;
  std::optional<double> gamma, mu, extent, dt, t_end;
  std::optional<std::size_t> grid;
};

Config load_config(const Options& o) {
  Config c;
  if (!o.config_path.empty()) {
    std::ifstream is(o.config_path);
    if (!is) throw ValidationError("cannot read config " + o.config_path);
    std::stringstream ss;
    ss << is.rdbuf();
    c = Config::parse(ss.str());
  }
  auto num = [](double x) { return format_g17(x); };
  if (o.gamma) c.set("physics.gamma", num(*o.gamma));
  if (o.mu) c.set("physics.mu", num(*o.mu));
  if (o.grid) c.set("grid.points", std::to_string(*o.grid));
  if (o.extent) c.set("grid.extent", num(*o.extent));
  if (o.dt) c.set("evolve.dt", num(*o.dt));
  if (o.t_end) c.set("evolve.t_end", num(*o.t_end));
  if (!o.seed_snapshot.empty()) c.set("initial.snapshot", o.seed_snapshot);
  return c;
}

fs::path out_dir(const Options& o) {
  fs::path dir = o.out_dir;
  if (dir.empty()) {
    const char* env = std::getenv("SNLS_OUT");
    dir = env ? env : "snls_out";
  }
  fs::create_directories(dir);
  return dir;
}

double gamma_of(const Config& c) { return c.get_double("physics.gamma", 3.0); }
double mu_of(const Config& c) { return c.get_double("physics.mu", 3.0 * gamma_of(c)); }

GridSpec groundstate_grid(const Config& c) {
  const bool radial = c.get_string("grid.mode", "radial") == "radial";
  const std::size_t n = c.get_size("groundstate.points", radial ? c.get_size("grid.points", 1024) : 1024);
  const double L = c.get_double("groundstate.extent", radial ? c.get_double("grid.extent", 30.0) : 30.0);
  return GridSpec::radial(L, n);
}

GroundStateSolution ground_state(const Config& c, std::optional<StatePair> seed = std::nullopt) {
  GroundStateOptions opt;
  opt.tol = c.get_double("groundstate.tol", opt.tol);
  opt.max_iter = c.get_size("groundstate.max_iter", opt.max_iter);
  std::optional<std::pair<ComplexField, ComplexField>> s;
  if (seed) s.emplace(seed->u, seed->v);
  return solve_ground_state(gamma_of(c), groundstate_grid(c), s, opt);
}

StatePair initial_state(const Config& c) {
  const double gamma = gamma_of(c), mu = mu_of(c);
  const std::string kind = c.get_string("initial.kind", c.has("initial.snapshot") ? "snapshot" : "gaussian");
  if (kind == "snapshot") {
    if (!c.has("initial.snapshot")) throw ValidationError("initial.kind = snapshot needs a snapshot path", {"initial.snapshot"});
    return read_state(c.get_string("initial.snapshot", ""), gamma, mu);
  }
  if (kind == "groundstate") {
    const auto gs = ground_state(c);
    StatePair s = gs.state();
    const double scale = c.get_double("initial.scale", 1.0);
    s.u *= complex(scale);
    s.v *= complex(scale);
    s.mu = mu;
    return s;
  }
  if (kind == "gaussian") {
    const GridSpec g = grid_from_config(c);
    const double au = c.get_double("initial.amplitude_u", 1.0);
    const double av = c.get_double("initial.amplitude_v", 0.5);
    const double w = c.get_double("initial.width", 1.0);
    const complex pv = std::polar(1.0, c.get_double("initial.phase_v", 0.0));
    auto r2 = [&](const std::array<double, 3>& x) {
      return g.mode() == GridMode::Radial3D ? x[0] * x[0] : x[0] * x[0] + x[1] * x[1] + x[2] * x[2];
    };
    ComplexField u = ComplexField::from_function(g, [&](const auto& x) { return complex(au * std::exp(-r2(x) / (w * w))); });
    ComplexField v = ComplexField::from_function(g, [&](const auto& x) { return av * pv * std::exp(-r2(x) / (w * w)); });
    return StatePair(std::move(u), std::move(v), gamma, mu);
  }
  throw ValidationError("unknown initial.kind '" + kind + "'", {"initial.kind"});
}

EvolutionConfig evolution_config(const Config& c) {
  EvolutionConfig e;
  e.dt = c.get_double("evolve.dt", e.dt);
  e.t_end = c.get_double("evolve.t_end", e.t_end);
  e.output_stride = c.get_size("evolve.output_stride", e.output_stride);
  e.adapt.enabled = c.get_bool("evolve.adapt", false);
  e.adapt.trigger = c.get_double("evolve.adapt_trigger", e.adapt.trigger);
  e.adapt.dt_floor = c.get_double("evolve.dt_floor", e.adapt.dt_floor);
  e.blowup_trigger = c.get_double("evolve.blowup_trigger", e.blowup_trigger);
  e.epsilon = c.get_double("evolve.epsilon", e.epsilon);
  e.omega = c.get_double("physics.omega", 0.0);
  for (const auto& m : c.get_list("evolve.monitors")) e.monitors.insert(m);
  e.virial_R = c.get_double("evolve.virial_R", 0.0);
  e.local_mass_R = c.get_double("evolve.local_mass_R", 0.0);
  e.morawetz_R = c.get_double("evolve.morawetz_R", 0.0);
  e.morawetz_sigma = c.get_double("evolve.morawetz_sigma", e.morawetz_sigma);
  e.local_lp_R = c.get_double("evolve.local_lp_R", 0.0);
  e.validate();
  return e;
}

RunManifest manifest_for(const Config& c, const GridSpec& g) {
  RunManifest m{.config_digest = sha256_hex(c.canonical_text()), .grid = g, .gamma = gamma_of(c), .mu = mu_of(c)};
  return m;
}

void write_manifest(const fs::path& dir, RunManifest m) {
  m.outputs.push_back((dir / "manifest.json").string());
  std::ofstream os(dir / "manifest.json");
  os << m.to_json().dump(2) << '\n';
}

void write_json(const fs::path& path, const nlohmann::ordered_json& j) {
  std::ofstream os(path);
  if (!os) throw FormatError("cannot write " + path.string());
  os << j.dump(2) << '\n';
}

nlohmann::ordered_json pohozaev_json(const GroundStateSolution& gs) {
  const auto p = pohozaev_report(gs.constants);
  nlohmann::ordered_json j;
  j["p_over_e"] = p.p_over_e;
  j["e_over_m"] = p.e_over_m;
  j["k_over_3p"] = p.k_over_3p;
  j["max"] = p.max();
  return j;
}

int cmd_groundstate(const Options& o) {
  const Config c = load_config(o);
  const fs::path dir = out_dir(o);
  std::optional<StatePair> seed;
  if (!o.seed_snapshot.empty()) seed = read_state(o.seed_snapshot, gamma_of(c), 3.0 * gamma_of(c));
  const auto gs = ground_state(c, seed);
  auto j = constants_json(gs);
  j["C_opt_check"] = gn_constant(gs);
  j["pohozaev"] = pohozaev_json(gs);
  write_json(dir / "groundstate.json", j);
  write_state(dir / "groundstate.crf", gs.state());
  RunManifest m = manifest_for(c, gs.phi.grid());
  m.constants = gs.constants;
  m.outputs = {(dir / "groundstate.json").string(), (dir / "groundstate.crf").string()};
  write_manifest(dir, m);
  for (const auto& w : gs.warnings) std::cerr << "warning: " << w << '\n';
  std::cout << pohozaev_json(gs).dump() << '\n';
  return 0;
}

int cmd_evolve(const Options& o) {
  const Config c = load_config(o);
  const EvolutionConfig ec = evolution_config(c);
  const std::string format = c.get_string("evolve.format", "csv");
  if (format != "csv" && format != "rows") throw ValidationError("evolve.format must be csv or rows", {"evolve.format"});
  const fs::path dir = out_dir(o);
  const StatePair s0 = initial_state(c);
  const auto rec = evolve(s0, ec);
  RunManifest m = manifest_for(c, s0.grid());
  const fs::path reports = dir / ("reports." + format);
  {
    std::ofstream os(reports);
    if (format == "csv") write_reports_csv(os, rec);
    else write_reports_rows(os, rec);
  }
  m.outputs.push_back(reports.string());
  write_state(dir / "initial.crf", s0);
  m.outputs.push_back((dir / "initial.crf").string());
  if (rec.final_state) {
    write_state(dir / "final.crf", *rec.final_state);
    m.outputs.push_back((dir / "final.crf").string());
  }
  nlohmann::ordered_json summary;
  summary["termination"] = to_string(rec.termination);
  summary["steps"] = rec.steps;
  summary["final_time"] = rec.reports.back().time;
  summary["final_dt"] = rec.final_dt;
  summary["blowup_fired"] = rec.blowup_fired;
  if (rec.blowup_fired) summary["blowup_time"] = rec.blowup_time;
  if (!rec.fault_message.empty()) summary["fault"] = rec.fault_message;
  summary["warnings"] = rec.warnings;
  write_json(dir / "summary.json", summary);
  m.outputs.push_back((dir / "summary.json").string());
  write_manifest(dir, m);
  std::cout << summary.dump() << '\n';
  return rec.termination == Termination::NumericalFault ? 3 : 0;
}

int cmd_classify(const Options& o) {
  const Config c = load_config(o);
  const fs::path dir = out_dir(o);
  const StatePair data = initial_state(c);
  const auto gs = ground_state(c);
  ClassifyOptions opt;
  opt.band = c.get_double("classify.band", opt.band);
  const Verdict v = classify(data, gs.constants, parse_symmetry(c.get_string("classify.symmetry", "radial")), opt);
  nlohmann::ordered_json j;
  j["kind"] = to_string(v.kind);
  j["basis"] = to_string(v.basis);
  j["symmetry"] = to_string(v.symmetry);
  j["caveats"] = nlohmann::json::array();
  for (auto cv : v.caveats) j["caveats"].push_back(to_string(cv));
  j["energy_mu"] = v.energy_mu;
  j["energy_product"] = v.energy_product;
  j["gwp_product"] = v.gwp_product;
  j["energy_threshold"] = v.thresholds.energy;
  j["gwp_threshold"] = v.thresholds.gwp;
  write_json(dir / "verdict.json", j);
  RunManifest m = manifest_for(c, data.grid());
  m.constants = gs.constants;
  m.outputs = {(dir / "verdict.json").string()};
  write_manifest(dir, m);
  std::cout << j.dump() << '\n';
  return 0;
}

StatePair random_radial_state(const GridSpec& g, double gamma, double mu, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> a(-2.0, 2.0), w(0.5, 2.0), ph(0.0, 2.0 * M_PI);
  auto make = [&] {
    const double amp = a(rng), width = w(rng), k = a(rng), phase = ph(rng);
    return ComplexField::from_function(g, [=](const auto& x) {
      return amp * std::exp(-x[0] * x[0] / (width * width)) * std::polar(1.0, phase + k * x[0]);
    });
  };
  ComplexField u = make();
  ComplexField v = make();
  return StatePair(std::move(u), std::move(v), gamma, mu);
}

int cmd_verify(const Options& o) {
  const Config c = load_config(o);
  const fs::path dir = out_dir(o);
  const GridSpec g = GridSpec::radial(20.0, 256);
  std::mt19937_64 rng(20240517);
  std::uniform_real_distribution<double> omega(-2.0, 2.0), gam(0.5, 5.0);
  double identity = 0.0;
  for (int i = 0; i < 200; ++i) {
    const double gamma = gam(rng), mu = 3.0 * gam(rng), w = omega(rng);
    const auto r = report(random_radial_state(g, gamma, mu, rng), w);
    auto rel = [](double a, double b) { return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-300}); };
    identity = std::max({identity, rel(r.energy_mu, 0.5 * (r.kinetic + r.mass_mu) - r.potential),
                         rel(r.pohozaev, r.kinetic - 3.0 * r.potential),
                         rel(r.action_omega, r.energy_mu + 0.5 * w * r.mass_3gamma),
                         rel(r.pohozaev + 0.5 * r.kinetic, 3.0 * r.energy_mu - 1.5 * r.mass_mu)});
  }
  const GridSpec gg = GridSpec::radial(12.0, 4096);
  const StatePair gauss(ComplexField::from_function(gg, [](const auto& x) { return complex(std::exp(-x[0] * x[0])); }),
                        ComplexField(gg), 3.0, 9.0);
  const auto r = report(gauss);
  const std::array<double, 4> got{r.mass_3gamma, r.kinetic, r.potential, r.pohozaev};
  const double pi = std::numbers::pi;
  const double gm = std::pow(pi / 2.0, 1.5), gp = std::pow(pi / 4.0, 1.5) / 36.0;
  const std::array<double, 4> want{gm, 3.0 * gm, gp, 3.0 * gm - 3.0 * gp};
  double gaussian = 0.0;
  for (std::size_t i = 0; i < 4; ++i) gaussian = std::max(gaussian, std::abs(got[i] / want[i] - 1.0));
  nlohmann::ordered_json j;
  j["identity_max_relative"] = identity;
  j["identity_pass"] = identity <= 1e-12;
  j["gaussian_max_relative"] = gaussian;
  j["gaussian_pass"] = gaussian <= 1e-6;
  write_json(dir / "verify.json", j);
  RunManifest m = manifest_for(c, gg);
  m.outputs = {(dir / "verify.json").string()};
  write_manifest(dir, m);
  std::cout << j.dump() << '\n';
  return identity <= 1e-12 && gaussian <= 1e-6 ? 0 : 3;
}

int cmd_weights(const Options& o) {
  const Config c = load_config(o);
  const fs::path dir = out_dir(o);
  const double R = c.get_double("weights.R", 2.0);
  const double sigma = c.get_double("weights.sigma", 0.1);
  const GridSpec g = GridSpec::cartesian(c.get_double("weights.extent", 2.0 * R), c.get_size("weights.points", 128));
  const auto w = build_morawetz_weights(R, sigma, g);
  const auto rep = verify_weight_identities(w);
  std::vector<std::string> outputs;
  for (const auto& [name, table] :
       {std::pair{"phi", &w.phi}, std::pair{"psi", &w.psi}, std::pair{"theta", &w.theta}, std::pair{"phi1", &w.phi1}}) {
    if (table->values.empty()) continue;
    const fs::path p = dir / (std::string(name) + ".dat");
    write_radial_table(p, *table, name);
    outputs.push_back(p.string());
  }
  nlohmann::ordered_json j;
  j["R"] = R;
  j["sigma"] = sigma;
  j["max_phi"] = rep.max_phi;
  j["identity_residual"] = rep.identity_residual;
  j["theta_gradient_residual"] = rep.theta_gradient_residual;
  j["min_psi_minus_phi"] = rep.min_psi_minus_phi;
  j["min_phi"] = rep.min_phi;
  j["min_psi"] = rep.min_psi;
  j["c_psi_bound"] = rep.c_psi_bound;
  j["c_grad_phi"] = rep.c_grad_phi;
  j["c_psi_minus_phi"] = rep.c_psi_minus_phi;
  j["phi1_deviation"] = rep.phi1_deviation;
  const bool pass = rep.identity_residual <= 1e-3 * rep.max_phi && rep.min_psi_minus_phi >= -1e-10;
  j["pass"] = pass;
  write_json(dir / "weights.json", j);
  outputs.push_back((dir / "weights.json").string());
  RunManifest m = manifest_for(c, g);
  m.outputs = outputs;
  write_manifest(dir, m);
  std::cout << j.dump() << '\n';
  return pass ? 0 : 3;
}

int cmd_report(const Options& o) {
  const Config c = load_config(o);
  const fs::path dir = out_dir(o);
  const fs::path src = o.trajectory.empty() ? dir / "reports.rows" : fs::path(o.trajectory);
  std::ifstream is(src);
  if (!is) throw ValidationError("cannot read trajectory " + src.string());
  const auto rec = read_reports_rows(is);
  auto selection = c.get_list("report.series");
  if (selection.empty()) selection = {"all"};
  RunManifest m = manifest_for(c, grid_from_config(c));
  for (const auto& p : emit_plot_data(rec, selection, dir / "plot")) m.outputs.push_back(p.string());
  write_manifest(dir, m);
  std::cout << nlohmann::json(m.outputs).dump() << '\n';
  return 0;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Coupled cubic NLS lab"};
  app.require_subcommand(1);
  app.fallthrough();
  Options o;
  app.add_option("--config", o.config_path, "INI configuration file");
  app.add_option("--out", o.out_dir, "output directory (default $SNLS_OUT or ./snls_out)");
  app.add_option("--seed-snapshot", o.seed_snapshot, "CRF1 state snapshot");
  app.add_option("--gamma", o.gamma);
  app.add_option("--mu", o.mu);
  app.add_option("--grid", o.grid, "points per axis");
  app.add_option("--extent", o.extent);
  app.add_option("--dt", o.dt);
  app.add_option("--t-end", o.t_end);

  int rc = 0;
  auto add = [&](const char* name, const char* help, int (*fn)(const Options&)) {
    return app.add_subcommand(name, help)->callback([&rc, &o, fn] { rc = fn(o); });
  };
  add("groundstate", "solve the elliptic system and persist constants", cmd_groundstate);
  add("evolve", "split-step evolution with monitors", cmd_evolve);
  add("classify", "threshold classification of initial data", cmd_classify);
  add("verify", "identity and Gaussian oracle suites", cmd_verify);
  add("weights", "build and verify Morawetz weights", cmd_weights);
  add("report", "emit plot data from a reports.rows trajectory", cmd_report)
      ->add_option("--trajectory", o.trajectory, "reports.rows file (default <out>/reports.rows)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const ConfigurationError& e) {
    std::cerr << "validation error: " << e.what() << '\n';
    return 2;
  } catch (const FormatError& e) {
    std::cerr << "validation error: " << e.what() << '\n';
    return 2;
  } catch (const StructuralError& e) {
    std::cerr << "validation error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "numerical fault: " << e.what() << '\n';
    return 3;
  }
  return rc;
}
