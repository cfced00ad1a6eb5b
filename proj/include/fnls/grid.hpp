#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace fnls {

using Vec3 = std::array<double, 3>;

/// Uniform periodic grid on the box [-L, L)^3 with n nodes per axis.
struct GridSpec {
  double half_length = 0.0;
  std::size_t points_per_dim = 0;
  double spacing = 0.0;

  std::size_t size() const { return points_per_dim * points_per_dim * points_per_dim; }
  double cell_volume() const { return spacing * spacing * spacing; }
  double coordinate(std::size_t i) const { return -half_length + static_cast<double>(i) * spacing; }
  /// Linear index, x1 fastest.
  std::size_t index(std::size_t i, std::size_t j, std::size_t k) const {
    return i + points_per_dim * (j + points_per_dim * k);
  }
  Vec3 node(std::size_t idx) const {
    const std::size_t n = points_per_dim;
    return {coordinate(idx % n), coordinate((idx / n) % n), coordinate(idx / (n * n))};
  }
  bool operator==(const GridSpec&) const = default;
};

/// Throws ConfigError unless L > 0 and n is a power of two >= 8.
GridSpec make_grid(double half_length, std::size_t points_per_dim);

/// Samples of a real function at the grid nodes.
struct ScalarField {
  GridSpec grid;
  std::vector<double> values;

  ScalarField() = default;
  explicit ScalarField(const GridSpec& g) : grid(g), values(g.size(), 0.0) {}
  ScalarField(const GridSpec& g, std::vector<double> v);

  static ScalarField from_function(const GridSpec& g, const std::function<double(const Vec3&)>& f);

  std::span<double> span() { return values; }
  std::span<const double> span() const { return values; }
  bool all_finite() const;
};

/// h^3 * sum of values.
double integrate(const ScalarField& f);
double integrate(const GridSpec& g, std::span<const double> values);
/// h^3 * sum a*b.
double inner(const GridSpec& g, std::span<const double> a, std::span<const double> b);

/// Largest |value| on the outermost layer of nodes relative to the global
/// maximum |value|; zero for a zero field.
double boundary_leak(const ScalarField& f);

}  // namespace fnls
