#include "fnls/grid.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "fnls/errors.hpp"

namespace fnls {

GridSpec make_grid(double half_length, std::size_t points_per_dim) {
  if (!(half_length > 0.0) || !std::isfinite(half_length)) {
    throw ConfigError("grid half-length must be positive, got " + std::to_string(half_length));
  }
  if (points_per_dim < 8 || (points_per_dim & (points_per_dim - 1)) != 0) {
    throw ConfigError("grid points per dimension must be a power of two >= 8, got " +
                      std::to_string(points_per_dim));
  }
  GridSpec g;
  g.half_length = half_length;
  g.points_per_dim = points_per_dim;
  g.spacing = 2.0 * half_length / static_cast<double>(points_per_dim);
  return g;
}

ScalarField::ScalarField(const GridSpec& g, std::vector<double> v) : grid(g), values(std::move(v)) {
  if (values.size() != grid.size()) {
    throw DomainError("field payload length " + std::to_string(values.size()) +
                      " does not match grid size " + std::to_string(grid.size()));
  }
}

ScalarField ScalarField::from_function(const GridSpec& g, const std::function<double(const Vec3&)>& f) {
  ScalarField out(g);
  const std::size_t n = g.points_per_dim;
  std::size_t idx = 0;
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t j = 0; j < n; ++j) {
      for (std::size_t i = 0; i < n; ++i, ++idx) {
        out.values[idx] = f({g.coordinate(i), g.coordinate(j), g.coordinate(k)});
      }
    }
  }
  return out;
}

bool ScalarField::all_finite() const {
  return std::all_of(values.begin(), values.end(), [](double v) { return std::isfinite(v); });
}

double integrate(const GridSpec& g, std::span<const double> values) {
  double s = 0.0;
  for (double v : values) s += v;
  return s * g.cell_volume();
}

double integrate(const ScalarField& f) { return integrate(f.grid, f.values); }

double inner(const GridSpec& g, std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s * g.cell_volume();
}

double boundary_leak(const ScalarField& f) {
  const std::size_t n = f.grid.points_per_dim;
  double peak = 0.0;
  double edge = 0.0;
  std::size_t idx = 0;
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t j = 0; j < n; ++j) {
      for (std::size_t i = 0; i < n; ++i, ++idx) {
        const double v = std::abs(f.values[idx]);
        peak = std::max(peak, v);
        if (i == 0 || j == 0 || k == 0 || i == n - 1 || j == n - 1 || k == n - 1) edge = std::max(edge, v);
      }
    }
  }
  return peak > 0.0 ? edge / peak : 0.0;
}

}  // namespace fnls
