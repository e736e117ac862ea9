#ifndef SNLS_GRID_HPP
#define SNLS_GRID_HPP

#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace snls {

using complex = std::complex<double>;

/// Field shape or grid-compatibility violation.
class StructuralError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Invalid grid, weight or solver configuration.
class ConfigurationError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Operation not available for the grid's geometry mode.
class UnsupportedModeError : public ConfigurationError {
public:
  using ConfigurationError::ConfigurationError;
};

enum class GridMode : unsigned char { Radial3D = 0, Cart3D = 1, Cyl3D = 2 };

inline const char* to_string(GridMode m) {
  switch (m) {
  case GridMode::Radial3D: return "radial";
  case GridMode::Cart3D: return "cartesian";
  case GridMode::Cyl3D: return "cylindrical";
  }
  return "?";
}

inline constexpr std::size_t kMaxRadialPoints = std::size_t{1} << 16;
inline constexpr std::size_t kMaxCartAxisPoints = 256;

/**
 * Discretization of R^3 in one of three geometry modes.
 *
 *  - Radial3D: midpoint samples r_j = (j + 1/2) h on [0, L], h = L / N.
 *  - Cart3D:   periodic box [-L, L)^3, x_j = -L + j h, h = 2L / n.
 *  - Cyl3D:    rho_i = (i + 1/2) h_rho on [0, L_rho], z_k = -L_z + k h_z
 *              on the periodic axis [-L_z, L_z).
 *
 * `extent` holds L (radial), L per axis (Cartesian half-lengths) and
 * (L_rho, L_z) for the cylindrical mode. Unused axes carry one point and
 * zero extent.
 */
class GridSpec {
public:
  static GridSpec radial(double extent, std::size_t points) {
    return GridSpec(GridMode::Radial3D, {points, 1, 1}, {extent, 0.0, 0.0});
  }
  static GridSpec cartesian(double half_length, std::size_t points) {
    return cartesian({half_length, half_length, half_length}, {points, points, points});
  }
  static GridSpec cartesian(std::array<double, 3> half_lengths, std::array<std::size_t, 3> points) {
    return GridSpec(GridMode::Cart3D, points, half_lengths);
  }
  static GridSpec cylindrical(double rho_extent, std::size_t rho_points, double z_half_length,
                              std::size_t z_points) {
    return GridSpec(GridMode::Cyl3D, {rho_points, z_points, 1}, {rho_extent, z_half_length, 0.0});
  }
  /// Rebuilds a grid from raw header data (snapshot files).
  static GridSpec from_raw(GridMode mode, std::array<std::size_t, 3> points,
                           std::array<double, 3> extent) {
    return GridSpec(mode, points, extent);
  }

  GridMode mode() const { return mode_; }
  const std::array<std::size_t, 3>& points() const { return points_; }
  const std::array<double, 3>& extent() const { return extent_; }
  std::size_t points(std::size_t axis) const { return points_[axis]; }
  double extent(std::size_t axis) const { return extent_[axis]; }
  std::size_t size() const { return points_[0] * points_[1] * points_[2]; }

  /// Full length of an axis: L for radial/rho axes, 2L for periodic axes.
  double axis_length(std::size_t axis) const {
    if (axis >= active_axes()) return 0.0;
    if (mode_ == GridMode::Radial3D) return extent_[0];
    if (mode_ == GridMode::Cyl3D && axis == 0) return extent_[0];
    return 2.0 * extent_[axis];
  }
  double spacing(std::size_t axis) const {
    if (axis >= active_axes()) return 0.0;
    return axis_length(axis) / static_cast<double>(points_[axis]);
  }
  std::size_t active_axes() const {
    switch (mode_) {
    case GridMode::Radial3D: return 1;
    case GridMode::Cyl3D: return 2;
    case GridMode::Cart3D: return 3;
    }
    return 0;
  }

  /// Sample coordinate along one axis (r, x/y/z, rho or z).
  double coordinate(std::size_t axis, std::size_t index) const {
    const double h = spacing(axis);
    const bool half_offset =
        mode_ == GridMode::Radial3D || (mode_ == GridMode::Cyl3D && axis == 0);
    if (half_offset) return (static_cast<double>(index) + 0.5) * h;
    return -extent_[axis] + static_cast<double>(index) * h;
  }

  /// Quadrature weight of a cell: 4 pi r^2 dr, dx dy dz, or 2 pi rho drho dz.
  double cell_volume(std::size_t flat) const {
    switch (mode_) {
    case GridMode::Radial3D: {
      const double r = coordinate(0, flat);
      return 4.0 * std::numbers::pi * r * r * spacing(0);
    }
    case GridMode::Cart3D: return spacing(0) * spacing(1) * spacing(2);
    case GridMode::Cyl3D: {
      const double rho = coordinate(0, flat / points_[1]);
      return 2.0 * std::numbers::pi * rho * spacing(0) * spacing(1);
    }
    }
    return 0.0;
  }

  /// Euclidean distance of a sample point to the origin.
  double radius(std::size_t flat) const {
    switch (mode_) {
    case GridMode::Radial3D: return coordinate(0, flat);
    case GridMode::Cart3D: {
      const auto p = position(flat);
      return std::sqrt(p[0] * p[0] + p[1] * p[1] + p[2] * p[2]);
    }
    case GridMode::Cyl3D: {
      const double rho = coordinate(0, flat / points_[1]);
      const double z = coordinate(1, flat % points_[1]);
      return std::hypot(rho, z);
    }
    }
    return 0.0;
  }

  /// Cartesian position (Cart3D) or (r,0,0) / (rho,0,z) for reduced modes.
  std::array<double, 3> position(std::size_t flat) const {
    switch (mode_) {
    case GridMode::Radial3D: return {coordinate(0, flat), 0.0, 0.0};
    case GridMode::Cart3D: {
      const std::size_t k = flat % points_[2];
      const std::size_t j = (flat / points_[2]) % points_[1];
      const std::size_t i = flat / (points_[1] * points_[2]);
      return {coordinate(0, i), coordinate(1, j), coordinate(2, k)};
    }
    case GridMode::Cyl3D:
      return {coordinate(0, flat / points_[1]), 0.0, coordinate(1, flat % points_[1])};
    }
    return {0.0, 0.0, 0.0};
  }

  bool operator==(const GridSpec&) const = default;

private:
  GridSpec(GridMode mode, std::array<std::size_t, 3> points, std::array<double, 3> extent)
      : mode_(mode), points_(points), extent_(extent) {
    validate();
  }

  static bool is_pow2(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

  void validate() const {
    const std::size_t axes = active_axes();
    for (std::size_t a = 0; a < 3; ++a) {
      if (a < axes) {
        if (!(extent_[a] > 0.0) || !std::isfinite(extent_[a]))
          throw ConfigurationError("grid extent must be positive and finite");
        if (points_[a] < 8) throw ConfigurationError("grid axes need at least 8 points");
      } else if (points_[a] != 1) {
        throw ConfigurationError("inactive grid axis must carry exactly one point");
      }
    }
    // The cylindrical rho axis is discretized by finite differences, not a transform.
    for (std::size_t a = (mode_ == GridMode::Cyl3D ? 1 : 0); a < axes; ++a)
      if (!is_pow2(points_[a]))
        throw ConfigurationError("transform axes must have a power-of-two point count");
    if (mode_ == GridMode::Radial3D && points_[0] > kMaxRadialPoints)
      throw ConfigurationError("radial grid exceeds 2^16 points");
    if (mode_ == GridMode::Cart3D)
      for (std::size_t a = 0; a < 3; ++a)
        if (points_[a] > kMaxCartAxisPoints)
          throw ConfigurationError("Cartesian grid exceeds 256 points per axis");
  }

  GridMode mode_;
  std::array<std::size_t, 3> points_;
  std::array<double, 3> extent_;
};

using RealField = std::vector<double>;

/// Complex samples on a grid, row-major in axis order.
class ComplexField {
public:
  explicit ComplexField(GridSpec grid) : grid_(std::move(grid)), samples_(grid_.size()) {}
  ComplexField(GridSpec grid, std::vector<complex> samples)
      : grid_(std::move(grid)), samples_(std::move(samples)) {
    if (samples_.size() != grid_.size())
      throw StructuralError("sample count does not match grid cardinality");
  }

  template <class F>
  static ComplexField from_function(const GridSpec& grid, F&& f) {
    ComplexField out(grid);
    for (std::size_t i = 0; i < grid.size(); ++i) out.samples_[i] = f(grid.position(i));
    return out;
  }

  const GridSpec& grid() const { return grid_; }
  std::size_t size() const { return samples_.size(); }
  std::span<const complex> samples() const { return samples_; }
  std::span<complex> samples() { return samples_; }
  const complex& operator[](std::size_t i) const { return samples_[i]; }
  complex& operator[](std::size_t i) { return samples_[i]; }

  bool all_finite() const {
    for (const auto& z : samples_)
      if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) return false;
    return true;
  }

  ComplexField& operator*=(complex s) {
    for (auto& z : samples_) z *= s;
    return *this;
  }
  ComplexField& operator+=(const ComplexField& o) {
    check_same(o);
    for (std::size_t i = 0; i < samples_.size(); ++i) samples_[i] += o.samples_[i];
    return *this;
  }
  ComplexField& operator-=(const ComplexField& o) {
    check_same(o);
    for (std::size_t i = 0; i < samples_.size(); ++i) samples_[i] -= o.samples_[i];
    return *this;
  }
  friend ComplexField operator*(complex s, ComplexField f) { return f *= s; }
  friend ComplexField operator+(ComplexField a, const ComplexField& b) { return a += b; }
  friend ComplexField operator-(ComplexField a, const ComplexField& b) { return a -= b; }

  double max_abs() const {
    double m = 0.0;
    for (const auto& z : samples_) m = std::max(m, std::abs(z));
    return m;
  }

private:
  void check_same(const ComplexField& o) const {
    if (!(o.grid_ == grid_)) throw StructuralError("fields live on different grids");
  }

  GridSpec grid_;
  std::vector<complex> samples_;
};

/// The system state (u, v) with its parameters.
struct StatePair {
  ComplexField u;
  ComplexField v;
  double gamma = 3.0;
  double mu = 9.0;
  double time = 0.0;

  StatePair(ComplexField u_, ComplexField v_, double gamma_, double mu_, double time_ = 0.0)
      : u(std::move(u_)), v(std::move(v_)), gamma(gamma_), mu(mu_), time(time_) {
    validate();
  }

  static StatePair zero(const GridSpec& grid, double gamma, double mu) {
    return StatePair(ComplexField(grid), ComplexField(grid), gamma, mu);
  }

  const GridSpec& grid() const { return u.grid(); }

  void validate() const {
    if (!(u.grid() == v.grid())) throw StructuralError("u and v must share one grid");
    if (!(gamma > 0.0) || !(mu > 0.0)) throw ConfigurationError("gamma and mu must be positive");
  }
};

inline double max_abs_difference(const ComplexField& a, const ComplexField& b) {
  if (!(a.grid() == b.grid())) throw StructuralError("fields live on different grids");
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

inline double max_abs_difference(const StatePair& a, const StatePair& b) {
  return std::max(max_abs_difference(a.u, b.u), max_abs_difference(a.v, b.v));
}

} // namespace snls

#endif
