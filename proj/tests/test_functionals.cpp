#include "snls/functionals.hpp"
#include "snls/weights.hpp"

#include "support.hpp"

#include <gtest/gtest.h>

#include <numbers>

using namespace snls;
using snls::ts::rel;

namespace {

constexpr double kM = 1.9687012;
constexpr double kK = 5.9061037;
const double kP = std::pow(std::numbers::pi / 4.0, 1.5) / 36.0; // 0.01933447
constexpr double kG = 5.8480996;

GridSpec gauss_grid() { return GridSpec::radial(12.0, 4096); }

StatePair pair_of(const ComplexField& u, const ComplexField& v, double gamma = 3.0, double mu = 9.0) {
  return StatePair(u, v, gamma, mu);
}

// e^{i x_1} e^{-|x|^2}; L = 2 pi keeps the carrier periodic.
ComplexField carrier_gaussian(const GridSpec& g) {
  return ComplexField::from_function(g, [](const auto& x) {
    return std::polar(std::exp(-(x[0] * x[0] + x[1] * x[1] + x[2] * x[2])), x[0]);
  });
}

double brute_morawetz(const StatePair& s, const MorawetzWeights& w) {
  const GridSpec& g = s.grid();
  const auto p = momentum_density(s);
  const double cell = g.cell_volume(0);
  double sum = 0.0;
  for (std::size_t x = 0; x < g.size(); ++x) {
    const auto px = g.position(x);
    for (std::size_t y = 0; y < g.size(); ++y) {
      const auto py = g.position(y);
      const double L = std::norm(s.u[y]) + s.gamma * s.gamma * std::norm(s.v[y]);
      const auto gt = w.grad_theta({px[0] - py[0], px[1] - py[1], px[2] - py[2]});
      sum += L * (gt[0] * p[0][x] + gt[1] * p[1][x] + gt[2] * p[2][x]);
    }
  }
  return 2.0 * sum * cell * cell;
}

} // namespace

TEST(Mass, ZeroAndGaussians) {
  const auto g = gauss_grid();
  const auto e = ts::gaussian(g);
  EXPECT_EQ(mass(StatePair::zero(g, 3.0, 9.0), 9.0), 0.0);
  EXPECT_LT(rel(mass(pair_of(e, ComplexField(g)), 9.0), kM), 1e-6);
  EXPECT_LT(rel(mass(pair_of(ComplexField(g), e), 9.0), 17.718311), 1e-6);
}

TEST(Kinetic, Gaussians) {
  const auto g = gauss_grid();
  const auto e = ts::gaussian(g);
  EXPECT_EQ(kinetic(StatePair::zero(g, 3.0, 9.0)), 0.0);
  EXPECT_LT(rel(kinetic(pair_of(e, ComplexField(g))), kK), 1e-6);
  EXPECT_LT(rel(kinetic(pair_of(e, e)), 11.812207), 1e-6);
}

TEST(InteractionDensity, PointValues) {
  EXPECT_EQ(interaction_density(0.0, 0.0), 0.0);
  EXPECT_NEAR(interaction_density(1.0, 1.0), 1.0 / 36 + 9.0 / 4 + 1.0 + 1.0 / 9, 1e-15);
  EXPECT_NEAR(interaction_density(1.0, 1.0), 3.3888889, 1e-7);
  EXPECT_NEAR(interaction_density(1.0, -1.0), 3.1666667, 1e-7);
  const complex u(0.3, -1.2), v(-0.7, 0.4);
  const double want = std::pow(std::abs(u), 4) / 36 + 2.25 * std::pow(std::abs(v), 4) + std::norm(u) * std::norm(v) +
                      (std::pow(std::conj(u), 3) * v).real() / 9;
  EXPECT_NEAR(interaction_density(u, v), want, 1e-14);
}

TEST(Potential, GaussianAndCrossTerm) {
  const auto g = gauss_grid();
  EXPECT_EQ(potential(StatePair::zero(g, 3.0, 9.0)), 0.0);
  EXPECT_LT(rel(potential(pair_of(ts::gaussian(g), ComplexField(g))), kP), 1e-5);

  const auto h = GridSpec::radial(6.0, 64);
  const auto f = ts::gaussian(h, 1.3, 1.1);
  const auto gg = ts::gaussian(h, -0.8, 0.9);
  double cross = 0.0;
  for (std::size_t i = 0; i < h.size(); ++i) cross += std::pow(f[i].real(), 3) * gg[i].real() * h.cell_volume(i);
  EXPECT_NEAR(potential(pair_of(f, gg)) - potential(pair_of(f, complex(-1.0) * gg)), 2.0 / 9.0 * cross, 1e-12);
}

TEST(Energy, GaussianComposition) {
  const auto g = gauss_grid();
  const auto s = pair_of(ts::gaussian(g), ComplexField(g));
  EXPECT_LT(rel(energy(s), 0.5 * (kK + kM) - kP), 1e-6);
  EXPECT_LT(rel(energy(s), 3.9180680), 1e-6);
  EXPECT_EQ(action(s, 0.0), energy(s));
  const auto z = StatePair::zero(g, 3.0, 9.0);
  EXPECT_EQ(energy(z), 0.0);
  EXPECT_EQ(action(z, 1.7), 0.0);
}

TEST(Pohozaev, Gaussian) {
  const auto g = gauss_grid();
  EXPECT_EQ(pohozaev(StatePair::zero(g, 3.0, 9.0)), 0.0);
  EXPECT_LT(rel(pohozaev(pair_of(ts::gaussian(g), ComplexField(g))), kG), 1e-6);
}

TEST(Report, IdentitySuite) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> gam(0.3, 6.0), om(-3.0, 3.0);
  const auto g = GridSpec::radial(20.0, 256);
  for (int i = 0; i < 200; ++i) {
    const double gamma = gam(rng), mu = gam(rng), w = om(rng);
    const auto s = pair_of(ts::random_radial_field(g, rng), ts::random_radial_field(g, rng), gamma, mu);
    const auto r = report(s, w);
    EXPECT_EQ(r.energy_mu, 0.5 * (r.kinetic + r.mass_mu) - r.potential);
    EXPECT_EQ(r.pohozaev, r.kinetic - 3.0 * r.potential);
    EXPECT_LE(rel(r.action_omega, r.energy_mu + 0.5 * w * r.mass_3gamma), 1e-12);
    EXPECT_LE(rel(r.pohozaev + 0.5 * r.kinetic, 3.0 * r.energy_mu - 1.5 * r.mass_mu), 1e-12);
    EXPECT_LE(rel(r.mass_mu, mass(s, mu)), 1e-14);
    EXPECT_LE(rel(r.mass_3gamma, mass(s, 3.0 * gamma)), 1e-14);
  }
}

TEST(Potential, BoundedByModuli) {
  std::mt19937_64 rng(12);
  const auto g = GridSpec::radial(20.0, 256);
  for (int i = 0; i < 100; ++i) {
    const auto f = ts::random_radial_field(g, rng), h = ts::random_radial_field(g, rng);
    ComplexField af(g), ah(g);
    for (std::size_t j = 0; j < g.size(); ++j) {
      af[j] = std::abs(f[j]);
      ah[j] = std::abs(h[j]);
    }
    EXPECT_LE(potential(pair_of(f, h)), potential(pair_of(af, ah)) * (1.0 + 1e-14));
  }
}

TEST(Functionals, GaugeInvariance) {
  std::mt19937_64 rng(13);
  const auto g = GridSpec::radial(20.0, 512);
  for (int i = 0; i < 20; ++i) {
    const auto s = pair_of(ts::random_radial_field(g, rng), ts::random_radial_field(g, rng));
    const double theta = 0.37 * i;
    const auto t = pair_of(std::polar(1.0, theta) * s.u, std::polar(1.0, 3.0 * theta) * s.v);
    EXPECT_LE(rel(mass(t, 9.0), mass(s, 9.0)), 1e-12);
    EXPECT_LE(rel(kinetic(t), kinetic(s)), 1e-12);
    EXPECT_LE(std::abs(potential(t) - potential(s)), 1e-12 * std::max(1.0, std::abs(potential(s))));
  }
}

TEST(Momentum, RealStateVanishes) {
  const auto g = GridSpec::cartesian(6.0, 16);
  const auto e = ts::gaussian(g);
  for (const auto& c : momentum_density(pair_of(e, e)))
    for (double x : c) EXPECT_EQ(x, 0.0);
}

TEST(Momentum, CarrierGaussian) {
  const auto g = GridSpec::cartesian(2.0 * std::numbers::pi, 64);
  const auto u = carrier_gaussian(g);
  const auto p = momentum_density(pair_of(u, ComplexField(g)));
  for (std::size_t i = 0; i < g.size(); ++i) {
    EXPECT_NEAR(p[0][i], std::norm(u[i]), 1e-10);
    EXPECT_NEAR(p[1][i], 0.0, 1e-10);
    EXPECT_NEAR(p[2][i], 0.0, 1e-10);
  }
  const auto v = 2.0 * u;
  const auto q = momentum_density(pair_of(u, v, 1.5, 4.5));
  for (std::size_t i = 0; i < g.size(); i += 97) EXPECT_NEAR(q[0][i], (1.0 + 1.5 * 4.0) * std::norm(u[i]), 1e-10);
}

TEST(Virial, OracleWeights) {
  const auto g = GridSpec::cartesian(2.0 * std::numbers::pi, 64);
  const auto s = pair_of(carrier_gaussian(g), ComplexField(g));
  std::vector<RealField> e1{RealField(g.size(), 1.0), RealField(g.size(), 0.0), RealField(g.size(), 0.0)};
  EXPECT_LT(rel(virial_quantity(s, e1), 2.0 * kM), 1e-6);
  std::vector<RealField> quad(3, RealField(g.size()));
  for (std::size_t i = 0; i < g.size(); ++i)
    for (std::size_t a = 0; a < 3; ++a) quad[a][i] = 2.0 * g.position(i)[a];
  EXPECT_NEAR(virial_quantity(s, quad), 0.0, 1e-10);
  const auto r = pair_of(ts::gaussian(g), ts::gaussian(g));
  EXPECT_EQ(virial_quantity(r, quad), 0.0);
  EXPECT_THROW(virial_quantity(s, {RealField(g.size())}), StructuralError);
}

TEST(LocalMass, Oracles) {
  const auto g = GridSpec::radial(8.0, 4096); // R = 1 falls on a cell edge
  EXPECT_EQ(local_mass(StatePair::zero(g, 3.0, 9.0), 1.0), 0.0);
  const auto s = pair_of(ts::gaussian(g), ts::gaussian(g, 0.5));
  EXPECT_EQ(local_mass(s, 100.0), mass(s, 9.0));
  const double a = 2.0, R = 1.0;
  const double radial = std::sqrt(std::numbers::pi) / (4.0 * std::pow(a, 1.5)) * std::erf(std::sqrt(a) * R) -
                        R * std::exp(-a * R * R) / (2.0 * a);
  EXPECT_LT(rel(local_mass(s, R), (1.0 + 9.0 * 0.25) * 4.0 * std::numbers::pi * radial), 1e-6);
  EXPECT_THROW(local_mass(s, 0.0), ConfigurationError);
}

TEST(InteractionMorawetz, MatchesBruteForceDoubleSum) {
  const auto w = build_morawetz_weights(1.0, 0.1, GridSpec::cartesian(4.0, 64));
  const auto g = GridSpec::cartesian(3.0, 8);
  const auto u = ComplexField::from_function(g, [](const auto& x) {
    return std::polar(std::exp(-0.5 * (x[0] * x[0] + x[1] * x[1] + x[2] * x[2])), 0.8 * x[0] - 0.4 * x[2]);
  });
  const auto v = ComplexField::from_function(g, [](const auto& x) {
    return std::polar(0.6 * std::exp(-0.7 * ((x[0] - 0.3) * (x[0] - 0.3) + x[1] * x[1] + x[2] * x[2])), 2.4 * x[0] + 0.5 * x[1]);
  });
  const auto s = pair_of(u, v);
  const double fast = interaction_morawetz(s, w);
  const double brute = brute_morawetz(s, w);
  EXPECT_NE(brute, 0.0);
  EXPECT_LE(rel(fast, brute), 1e-10);
}

TEST(InteractionMorawetz, TrivialCases) {
  const auto w = build_morawetz_weights(1.0, 0.1, GridSpec::cartesian(4.0, 32));
  const auto g = GridSpec::cartesian(3.0, 16);
  EXPECT_EQ(interaction_morawetz(StatePair::zero(g, 3.0, 9.0), w), 0.0);
  EXPECT_NEAR(interaction_morawetz(pair_of(ts::gaussian(g), ts::gaussian(g)), w), 0.0, 1e-14);
  const auto r = GridSpec::radial(3.0, 64);
  EXPECT_THROW(interaction_morawetz(StatePair::zero(r, 3.0, 9.0), w), UnsupportedModeError);
}

TEST(InteractionMorawetz, GrowsAtMostLinearlyInR) {
  const auto g = GridSpec::cartesian(4.0, 16);
  const auto u = ComplexField::from_function(g, [](const auto& x) {
    return std::polar(std::exp(-(x[0] - 0.5) * (x[0] - 0.5) - x[1] * x[1] - x[2] * x[2]), 0.7 * x[0]);
  });
  const auto v = ComplexField::from_function(g, [](const auto& x) {
    return std::polar(0.5 * std::exp(-(x[0] + 0.5) * (x[0] + 0.5) - x[1] * x[1] - x[2] * x[2]), -0.6 * x[0]);
  });
  const auto s = pair_of(u, v);
  double prev = 0.0;
  for (double R : {4.0, 8.0, 16.0}) {
    const double m = std::abs(interaction_morawetz(s, build_morawetz_weights(R, 0.1, GridSpec::cartesian(2.0 * R, 64))));
    if (prev > 0.0) {
      EXPECT_LE(m / prev, 2.5) << "R = " << R;
    }
    prev = m;
  }
}
