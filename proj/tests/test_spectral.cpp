#include "snls/spectral.hpp"

#include "support.hpp"

#include <gtest/gtest.h>

#include <numbers>

using namespace snls;
using snls::ts::rel;

namespace {

const double kGaussMass = std::pow(std::numbers::pi / 2.0, 1.5); // int e^{-2|x|^2}

RealField modulus_squared(const ComplexField& f) {
  RealField d(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) d[i] = std::norm(f[i]);
  return d;
}

ComplexField plane_wave(const GridSpec& g, const std::array<int, 3>& m) {
  return ComplexField::from_function(g, [&](const auto& x) {
    double phase = 0.0;
    for (int a = 0; a < 3; ++a) phase += std::numbers::pi * m[a] / g.extent(a) * x[a];
    return std::polar(1.0, phase);
  });
}

} // namespace

TEST(Integrate, ZeroField) {
  const auto g = GridSpec::radial(5.0, 64);
  EXPECT_EQ(integrate(g, RealField(64, 0.0)), 0.0);
}

TEST(Integrate, GaussianInAllModes) {
  const auto r = GridSpec::radial(12.0, 4096);
  EXPECT_LT(rel(integrate(r, modulus_squared(ts::gaussian(r))), kGaussMass), 1e-10);
  const auto c = GridSpec::cartesian(6.0, 64);
  EXPECT_LT(rel(integrate(c, modulus_squared(ts::gaussian(c))), kGaussMass), 1e-10);
  const auto y = GridSpec::cylindrical(6.0, 400, 6.0, 64);
  EXPECT_LT(rel(integrate(y, modulus_squared(ts::gaussian(y))), kGaussMass), 1e-4);
}

TEST(Integrate, BallVolume) {
  const auto g = GridSpec::radial(2.0, 2048);
  RealField ind(g.size());
  for (std::size_t i = 0; i < ind.size(); ++i) ind[i] = g.coordinate(0, i) <= 1.0 ? 1.0 : 0.0;
  EXPECT_NEAR(integrate(g, ind), 4.0 * std::numbers::pi / 3.0, 4.0 * std::numbers::pi * g.spacing(0));
}

TEST(Integrate, ShapeMismatch) {
  EXPECT_THROW(integrate(GridSpec::radial(1.0, 16), RealField(15)), StructuralError);
}

TEST(Integrate, LinearAndMonotone) {
  const auto g = GridSpec::radial(8.0, 256);
  RealField a(g.size()), b(g.size()), s(g.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double r = g.coordinate(0, i);
    a[i] = std::exp(-r * r);
    b[i] = std::exp(-r);
    s[i] = 2.0 * a[i] - 3.0 * b[i];
  }
  EXPECT_NEAR(integrate(g, s), 2.0 * integrate(g, a) - 3.0 * integrate(g, b), 1e-12);
  EXPECT_GT(integrate(g, a), 0.0);
}

TEST(Laplacian, ConstantOnCartesianIsZero) {
  const auto g = GridSpec::cartesian(4.0, 16);
  ComplexField f = ComplexField::from_function(g, [](const auto&) { return complex(2.5, -1.0); });
  EXPECT_LT(laplacian(f).max_abs(), 1e-12);
  for (const auto& d : gradient(f)) EXPECT_LT(d.max_abs(), 1e-12);
}

TEST(Laplacian, PlaneWaveEigenfunction) {
  const auto g = GridSpec::cartesian(4.0, 16);
  const std::array<int, 3> m{1, -2, 3};
  const auto f = plane_wave(g, m);
  const double k2 = std::pow(std::numbers::pi / 4.0, 2) * (1 + 4 + 9);
  const auto lap = laplacian(f);
  for (std::size_t i = 0; i < f.size(); ++i) EXPECT_LT(std::abs(lap[i] + k2 * f[i]), 1e-10);
  const auto grad = gradient(f);
  for (std::size_t a = 0; a < 3; ++a) {
    const complex ik(0.0, std::numbers::pi / 4.0 * m[a]);
    for (std::size_t i = 0; i < f.size(); i += 37) EXPECT_LT(std::abs(grad[a][i] - ik * f[i]), 1e-10);
  }
}

TEST(Laplacian, RadialGaussian) {
  const auto g = GridSpec::radial(12.0, 4096);
  const auto lap = laplacian(ts::gaussian(g));
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double r = g.coordinate(0, i);
    EXPECT_NEAR(lap[i].real(), (4.0 * r * r - 6.0) * std::exp(-r * r), 1e-7);
  }
}

TEST(Laplacian, CartesianGaussian) {
  const auto g = GridSpec::cartesian(6.0, 64);
  const auto lap = laplacian(ts::gaussian(g));
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double r2 = std::pow(g.radius(i), 2);
    EXPECT_NEAR(lap[i].real(), (4.0 * r2 - 6.0) * std::exp(-r2), 1e-9);
  }
}

TEST(Laplacian, CylindricalGaussianSecondOrder) {
  double prev = 0.0;
  for (std::size_t n : {200, 400}) {
    const auto g = GridSpec::cylindrical(8.0, n, 8.0, 128);
    const auto lap = laplacian(ts::gaussian(g));
    double err = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
      const double r2 = std::pow(g.radius(i), 2);
      err = std::max(err, std::abs(lap[i].real() - (4.0 * r2 - 6.0) * std::exp(-r2)));
    }
    if (prev > 0.0) {
      EXPECT_NEAR(prev / err, 4.0, 0.5);
    }
    prev = err;
  }
}

TEST(Gradient, GaussianKinetic) {
  const double want = 3.0 * kGaussMass;
  for (const auto& g : {GridSpec::radial(12.0, 4096), GridSpec::cartesian(6.0, 64)}) {
    RealField d(g.size(), 0.0);
    for (const auto& c : gradient(ts::gaussian(g)))
      for (std::size_t i = 0; i < d.size(); ++i) d[i] += std::norm(c[i]);
    EXPECT_LT(rel(integrate(g, d), want), 1e-9);
  }
}

TEST(Multiplier, IdentitySymbol) {
  std::mt19937_64 rng(1);
  const auto g = GridSpec::cartesian(6.0, 32);
  const auto f = ts::random_cart_field(g, rng);
  EXPECT_LT(max_abs_difference(apply_multiplier(f, [](const Wavevector&) { return 1.0; }), f), 1e-14);
}

TEST(Multiplier, UnitModulusPreservesNorm) {
  std::mt19937_64 rng(2);
  for (const auto& g : {GridSpec::cartesian(6.0, 32), GridSpec::radial(20.0, 1024),
                        GridSpec::cylindrical(10.0, 120, 8.0, 64)}) {
    const auto f = g.mode() == GridMode::Cart3D ? ts::random_cart_field(g, rng) : ts::gaussian(g);
    const auto h = apply_multiplier(f, [](const Wavevector& k) { return std::polar(1.0, -0.7 * (k_squared(k) + 1.0)); });
    EXPECT_LT(rel(norm_squared(h), norm_squared(f)), 1e-12);
  }
}

TEST(Multiplier, ReproducesCartesianLaplacianBitwise) {
  std::mt19937_64 rng(3);
  const auto g = GridSpec::cartesian(6.0, 32);
  const auto f = ts::random_cart_field(g, rng);
  const auto a = laplacian(f);
  const auto b = apply_multiplier(f, [](const Wavevector& k) { return -k_squared(k); });
  for (std::size_t i = 0; i < f.size(); ++i) ASSERT_EQ(a[i], b[i]);
}

TEST(Transform, ParsevalRoundTrip) {
  std::mt19937_64 rng(4);
  for (const auto& g : {GridSpec::cartesian(6.0, 32), GridSpec::radial(20.0, 1024),
                        GridSpec::cylindrical(10.0, 120, 8.0, 64)}) {
    ComplexField f = g.mode() == GridMode::Cart3D ? ts::random_cart_field(g, rng) : ts::gaussian(g);
    const double before = norm_squared(f);
    const ComplexField orig = f;
    to_spectral(g, f.samples());
    from_spectral(g, f.samples());
    EXPECT_LT(rel(norm_squared(f), before), 1e-12);
    EXPECT_LT(max_abs_difference(f, orig), 1e-12);
  }
}

TEST(Laplacian, CommutesWithCyclicShift) {
  std::mt19937_64 rng(5);
  const auto g = GridSpec::cartesian(6.0, 16);
  const auto f = ts::random_cart_field(g, rng);
  const std::size_t n = 16;
  auto shift = [&](const ComplexField& h) {
    ComplexField out(g);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        for (std::size_t k = 0; k < n; ++k) out[(((i + 3) % n) * n + (j + 5) % n) * n + (k + 1) % n] = h[(i * n + j) * n + k];
    return out;
  };
  EXPECT_LT(max_abs_difference(laplacian(shift(f)), shift(laplacian(f))), 1e-12);
}

TEST(SupportMargin, FlagsBoundaryMass) {
  const auto g = GridSpec::radial(3.0, 256);
  EXPECT_FALSE(support_margin(ts::gaussian(g, 1.0, 2.0)).ok);
  EXPECT_TRUE(support_margin(ts::gaussian(g, 1.0, 0.5)).ok);
}
